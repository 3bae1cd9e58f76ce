// Python bindings for the estimation library.  Fields cross the boundary as
// plain lists of floats; functions taking spans are wrapped to accept
// vectors.  Simulator stacks hold a pointer to their hierarchy, so the
// factories pin the hierarchy to the returned list via keep_alive.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl_bind.h>

#include "fmlmc/diagnostics.hpp"
#include "fmlmc/diffusion.hpp"
#include "fmlmc/errors.hpp"
#include "fmlmc/estimators.hpp"
#include "fmlmc/experiment.hpp"
#include "fmlmc/grid.hpp"
#include "fmlmc/hartley.hpp"
#include "fmlmc/rng.hpp"
#include "fmlmc/transfer.hpp"

namespace py = pybind11;
using namespace fmlmc;

// Bound as a real type (not converted to a list) so the per-level simulators
// can keep their hierarchy alive and estimator calls can borrow the stack
// without copying.
PYBIND11_MAKE_OPAQUE(std::vector<LevelSimulator>);

PYBIND11_MODULE(_core, m) {
    m.doc() = "Multilevel Monte Carlo estimation of discretized random fields";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    // --- grids -------------------------------------------------------------
    py::class_<Level1D>(m, "Level1D")
        .def(py::init([](int n) { return Level1D{n}; }), py::arg("n"))
        .def_readonly("n", &Level1D::n)
        .def("cell_width", &Level1D::cell_width)
        .def("cell_center", &Level1D::cell_center, py::arg("i"));

    py::class_<Level2D>(m, "Level2D")
        .def(py::init([](int nx, int ny) { return Level2D{nx, ny}; }), py::arg("nx"),
             py::arg("ny"))
        .def_readonly("nx", &Level2D::nx)
        .def_readonly("ny", &Level2D::ny)
        .def("cells", &Level2D::cells)
        .def("cell_center_x", &Level2D::cell_center_x, py::arg("i"))
        .def("cell_center_y", &Level2D::cell_center_y, py::arg("j"));

    py::class_<GridHierarchy>(m, "GridHierarchy")
        .def("levels", &GridHierarchy::levels)
        .def("depth", &GridHierarchy::depth)
        .def("gram_weight", &GridHierarchy::gram_weight, py::arg("level"))
        .def("level_1d", &GridHierarchy::level_1d, py::arg("level"),
             py::return_value_policy::copy)
        .def("level_2d", &GridHierarchy::level_2d, py::arg("level"),
             py::return_value_policy::copy);

    m.def("build_hierarchy_1d", &build_hierarchy_1d, py::arg("finest_n"), py::arg("levels"));
    m.def("build_hierarchy_2d", &build_hierarchy_2d, py::arg("finest_nx"), py::arg("finest_ny"),
          py::arg("levels"));

    // --- transfers ----------------------------------------------------------
    py::class_<FilterConfig>(m, "FilterConfig")
        .def(py::init([](bool pre, bool post) { return FilterConfig{pre, post}; }),
             py::arg("pre") = false, py::arg("post") = false)
        .def_readwrite("pre", &FilterConfig::pre)
        .def_readwrite("post", &FilterConfig::post)
        .def_static("unfiltered", &FilterConfig::unfiltered)
        .def_static("filtered", &FilterConfig::filtered)
        .def_static("pre_only", &FilterConfig::pre_only)
        .def_static("post_only", &FilterConfig::post_only);

    m.def("prolong_1d", [](const Field& x) { return prolong_1d(x); }, py::arg("coarse"));
    m.def("restrict_1d", [](const Field& x) { return restrict_1d(x); }, py::arg("fine"));
    m.def("shapiro_1d", [](const Field& x) { return shapiro_1d(x); }, py::arg("field"));
    m.def("prolong_2d",
          [](const Field& x, const Level2D& level) { return prolong_2d(x, level); },
          py::arg("coarse"), py::arg("coarse_level"));
    m.def("restrict_2d",
          [](const Field& x, const Level2D& level) { return restrict_2d(x, level); },
          py::arg("fine"), py::arg("fine_level"));
    m.def("shapiro_2d",
          [](const Field& x, const Level2D& level) { return shapiro_2d(x, level); },
          py::arg("field"), py::arg("level"));

    // --- spectral tools -----------------------------------------------------
    py::class_<HartleyTransform>(m, "HartleyTransform")
        .def(py::init<int>(), py::arg("n"))
        .def("size", &HartleyTransform::size)
        .def("entry", &HartleyTransform::entry, py::arg("j"), py::arg("k"))
        .def("forward", [](const HartleyTransform& t, const Field& x) { return t.forward(x); },
             py::arg("x"))
        .def("inverse", [](const HartleyTransform& t, const Field& c) { return t.inverse(c); },
             py::arg("coeffs"));

    m.def("hartley_forward_2d",
          [](const Field& f, const Level2D& level, const HartleyTransform& tx,
             const HartleyTransform& ty) { return hartley_forward_2d(f, level, tx, ty); },
          py::arg("field"), py::arg("level"), py::arg("tx"), py::arg("ty"));
    m.def("frequency_permutation", &frequency_permutation, py::arg("n"));
    m.def("damping_coefficients", &damping_coefficients, py::arg("n0"));
    m.def("circulant_eigenvalues",
          [](const Field& col) { return circulant_eigenvalues(col); }, py::arg("first_column"));
    m.def("galerkin_coarse_eigenvalues",
          [](const Field& eigs, bool filtered) {
              return galerkin_coarse_eigenvalues(eigs, filtered);
          },
          py::arg("fine_eigenvalues"), py::arg("filtered"));

    py::class_<DampingCurves>(m, "DampingCurves")
        .def_readonly("n1", &DampingCurves::n1)
        .def_readonly("filtered", &DampingCurves::filtered)
        .def_readonly("consistent_diag", &DampingCurves::consistent_diag)
        .def_readonly("spurious_diag", &DampingCurves::spurious_diag)
        .def_readonly("off_diag_consistent", &DampingCurves::off_diag_consistent)
        .def_readonly("off_diag_spurious", &DampingCurves::off_diag_spurious);
    m.def("damping_curves", &damping_curves, py::arg("n1"), py::arg("filtered"));

    // --- simulators -----------------------------------------------------------
    py::enum_<SimulatorKind>(m, "SimulatorKind")
        .value("LinearField", SimulatorKind::LinearField)
        .value("SquaredField", SimulatorKind::SquaredField);

    py::class_<LinearSolveConfig>(m, "LinearSolveConfig")
        .def_static("direct", &LinearSolveConfig::direct)
        .def_static("cg", &LinearSolveConfig::cg)
        .def_readwrite("tolerance", &LinearSolveConfig::tolerance)
        .def_readwrite("max_iterations", &LinearSolveConfig::max_iterations);

    py::class_<GrfParams>(m, "GrfParams")
        .def(py::init([](double mean, double stddev, double lengthscale, std::uint64_t seed) {
                 return GrfParams{mean, stddev, lengthscale, seed};
             }),
             py::arg("mean"), py::arg("stddev"), py::arg("lengthscale"), py::arg("seed"))
        .def_readwrite("mean", &GrfParams::mean)
        .def_readwrite("stddev", &GrfParams::stddev)
        .def_readwrite("lengthscale", &GrfParams::lengthscale)
        .def_readwrite("seed", &GrfParams::seed);

    py::class_<DiffusivityField2D>(m, "DiffusivityField2D")
        .def_readonly("d11", &DiffusivityField2D::d11)
        .def_readonly("d22", &DiffusivityField2D::d22)
        .def_readonly("level", &DiffusivityField2D::level);
    m.def("sample_lengthscale_fields", &sample_lengthscale_fields, py::arg("params"),
          py::arg("level"));

    py::class_<Simulator1D>(m, "Simulator1D")
        .def(py::init([](double lengthscale, int m_exp, const Level1D& level, SimulatorKind kind) {
                 return Simulator1D({lengthscale, m_exp, level}, kind);
             }),
             py::arg("lengthscale"), py::arg("m"), py::arg("level"),
             py::arg("kind") = SimulatorKind::LinearField)
        .def("cells", &Simulator1D::cells)
        .def("gram_weight", &Simulator1D::gram_weight)
        .def("apply", [](const Simulator1D& s, const Field& x) { return s.apply(x); },
             py::arg("x"));

    py::class_<Simulator2D>(m, "Simulator2D")
        .def(py::init([](const DiffusivityField2D& ls, int m_exp, SimulatorKind kind,
                         const LinearSolveConfig& solver) {
                 return Simulator2D({ls, m_exp}, kind, solver);
             }),
             py::arg("lengthscales"), py::arg("m"), py::arg("kind") = SimulatorKind::SquaredField,
             py::arg("solver") = LinearSolveConfig::cg())
        .def("cells", &Simulator2D::cells)
        .def("gram_weight", &Simulator2D::gram_weight)
        .def("apply", [](const Simulator2D& s, const Field& x) { return s.apply(x); },
             py::arg("x"));

    m.def("exact_theta",
          [](const Simulator1D& s, int cap) { return exact_theta(s, cap); }, py::arg("sim"),
          py::arg("cell_cap") = 16384);
    m.def("exact_theta",
          [](const Simulator2D& s, int cap) { return exact_theta(s, cap); }, py::arg("sim"),
          py::arg("cell_cap") = 16384);

    // --- estimators -----------------------------------------------------------
    py::enum_<EstimatorKind>(m, "EstimatorKind")
        .value("MonteCarlo", EstimatorKind::MonteCarlo)
        .value("Mlmc", EstimatorKind::Mlmc)
        .value("FMlmc", EstimatorKind::FMlmc)
        .value("FMlmcPreOnly", EstimatorKind::FMlmcPreOnly)
        .value("FMlmcPostOnly", EstimatorKind::FMlmcPostOnly);

    m.def("estimator_label", &estimator_label, py::arg("kind"));
    m.def("estimator_filters", &estimator_filters, py::arg("kind"));

    py::class_<LevelSimulator>(m, "LevelSimulator")
        .def_readonly("level", &LevelSimulator::level)
        .def("apply", [](const LevelSimulator& s, const Field& x) { return s.apply(x); },
             py::arg("x_finest"));
    py::bind_vector<std::vector<LevelSimulator>>(m, "LevelStack");

    m.def("level_simulators_1d", &level_simulators_1d, py::arg("hierarchy"),
          py::arg("lengthscale"), py::arg("m"), py::arg("sim_kind"), py::arg("filters"),
          py::keep_alive<0, 1>());
    m.def("level_simulators_2d", &level_simulators_2d, py::arg("hierarchy"),
          py::arg("finest_lengthscales"), py::arg("m"), py::arg("sim_kind"), py::arg("filters"),
          py::arg("solver") = LinearSolveConfig::cg(), py::keep_alive<0, 1>());

    py::class_<CostModel>(m, "CostModel")
        .def(py::init<>())
        .def_readwrite("alpha", &CostModel::alpha)
        .def_readwrite("beta", &CostModel::beta)
        .def_readwrite("s", &CostModel::s)
        .def("gamma", &CostModel::gamma)
        .def("normalized_cost", &CostModel::normalized_cost, py::arg("level"), py::arg("depth"))
        .def_static("for_setup", &CostModel::for_setup, py::arg("dim"), py::arg("filters"),
                    py::arg("q") = 5, py::arg("t") = 20);

    py::class_<CostTable>(m, "CostTable")
        .def_readonly("normalized", &CostTable::normalized)
        .def_readonly("ratios", &CostTable::ratios);
    m.def("cost_table", &cost_table, py::arg("model"), py::arg("depth"));

    py::class_<Allocation>(m, "Allocation")
        .def_readonly("samples", &Allocation::samples)
        .def_readonly("variances", &Allocation::variances)
        .def_readonly("pair_costs", &Allocation::pair_costs)
        .def_readonly("budget", &Allocation::budget)
        .def_readonly("normalizer", &Allocation::normalizer)
        .def("realized_cost", &Allocation::realized_cost)
        .def("levels", &Allocation::levels);
    m.def("allocate",
          [](double budget, const Field& costs, const Field& variances) {
              return allocate(budget, costs, variances);
          },
          py::arg("budget"), py::arg("level_costs"), py::arg("variances"));

    m.def("pilot_variances", &pilot_variances, py::arg("hierarchy"), py::arg("sims"),
          py::arg("pilot_size"), py::arg("seed"), py::arg("replicate") = 0);

    py::class_<EstimatorRun>(m, "EstimatorRun")
        .def_readonly("kind", &EstimatorRun::kind)
        .def_readonly("depth", &EstimatorRun::depth)
        .def_readonly("estimate", &EstimatorRun::estimate)
        .def_readonly("allocation", &EstimatorRun::allocation)
        .def_readonly("realized_cost", &EstimatorRun::realized_cost)
        .def_readonly("seed", &EstimatorRun::seed)
        .def_readonly("replicate", &EstimatorRun::replicate);

    m.def("run_estimator", &run_estimator, py::arg("kind"), py::arg("hierarchy"), py::arg("sims"),
          py::arg("allocation"), py::arg("seed"), py::arg("replicate") = 0);
    m.def("run_ensemble", &run_ensemble, py::arg("kind"), py::arg("hierarchy"), py::arg("sims"),
          py::arg("allocation"), py::arg("seed"), py::arg("replicates"), py::arg("threads") = 0);

    // --- diagnostics -----------------------------------------------------------
    py::class_<SpectralDiagnostics>(m, "SpectralDiagnostics")
        .def_readonly("nu", &SpectralDiagnostics::nu)
        .def_readonly("nu_cml", &SpectralDiagnostics::nu_cml)
        .def_readonly("total", &SpectralDiagnostics::total)
        .def_readonly("ensemble_size", &SpectralDiagnostics::ensemble_size)
        .def_readonly("nx", &SpectralDiagnostics::nx)
        .def_readonly("ny", &SpectralDiagnostics::ny)
        .def_readonly("kind", &SpectralDiagnostics::kind)
        .def_readonly("depth", &SpectralDiagnostics::depth);

    m.def("spectral_variance_1d",
          [](const std::vector<EstimatorRun>& runs) { return spectral_variance_1d(runs); },
          py::arg("runs"));
    m.def("spectral_variance_1d",
          [](const std::vector<Field>& estimates) { return spectral_variance_1d(estimates); },
          py::arg("estimates"));
    m.def("spectral_variance_2d",
          [](const std::vector<EstimatorRun>& runs, const Level2D& level) {
              return spectral_variance_2d(runs, level);
          },
          py::arg("runs"), py::arg("level"));
    m.def("spectral_variance_2d",
          [](const std::vector<Field>& estimates, const Level2D& level) {
              return spectral_variance_2d(estimates, level);
          },
          py::arg("estimates"), py::arg("level"));

    py::class_<MseDecomposition>(m, "MseDecomposition")
        .def_readonly("variance", &MseDecomposition::variance)
        .def_readonly("squared_bias", &MseDecomposition::squared_bias)
        .def_readonly("raw_mse", &MseDecomposition::raw_mse);
    m.def("mse_decompose",
          [](const std::vector<Field>& estimates, const Field& truth, double gram_weight) {
              return mse_decompose(estimates, truth, gram_weight);
          },
          py::arg("estimates"), py::arg("truth"), py::arg("gram_weight"));

    // --- experiments -----------------------------------------------------------
    py::enum_<ExperimentKind>(m, "ExperimentKind")
        .value("OneDLinear", ExperimentKind::OneDLinear)
        .value("TwoDTheta", ExperimentKind::TwoDTheta)
        .value("DampingCurves", ExperimentKind::DampingCurves)
        .value("CostTable", ExperimentKind::CostTable);

    py::class_<SolverSettings>(m, "SolverSettings")
        .def(py::init<>())
        .def_readwrite("tolerance", &SolverSettings::tolerance)
        .def_readwrite("max_iterations", &SolverSettings::max_iterations);

    py::class_<FullScaleOverrides>(m, "FullScaleOverrides")
        .def(py::init<>())
        .def_readwrite("finest", &FullScaleOverrides::finest)
        .def_readwrite("finest_nx", &FullScaleOverrides::finest_nx)
        .def_readwrite("finest_ny", &FullScaleOverrides::finest_ny)
        .def_readwrite("ensemble_size", &FullScaleOverrides::ensemble_size);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("kind", &ExperimentConfig::kind)
        .def_readwrite("name", &ExperimentConfig::name)
        .def_readwrite("finest", &ExperimentConfig::finest)
        .def_readwrite("finest_nx", &ExperimentConfig::finest_nx)
        .def_readwrite("finest_ny", &ExperimentConfig::finest_ny)
        .def_readwrite("depths", &ExperimentConfig::depths)
        .def_readwrite("estimators", &ExperimentConfig::estimators)
        .def_readwrite("lengthscale", &ExperimentConfig::lengthscale)
        .def_readwrite("grf", &ExperimentConfig::grf)
        .def_readwrite("m", &ExperimentConfig::m)
        .def_readwrite("budget_multiplier", &ExperimentConfig::budget_multiplier)
        .def_readwrite("pilot_size", &ExperimentConfig::pilot_size)
        .def_readwrite("ensemble_size", &ExperimentConfig::ensemble_size)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("output_dir", &ExperimentConfig::output_dir)
        .def_readwrite("solver", &ExperimentConfig::solver)
        .def_readwrite("damping_n1", &ExperimentConfig::damping_n1)
        .def_readwrite("table_depth", &ExperimentConfig::table_depth)
        .def_readwrite("full", &ExperimentConfig::full);

    py::class_<EnsembleReport>(m, "EnsembleReport")
        .def_readonly("kind", &EnsembleReport::kind)
        .def_readonly("depth", &EnsembleReport::depth)
        .def_readonly("pilot_variances", &EnsembleReport::pilot_variances)
        .def_readonly("allocation", &EnsembleReport::allocation)
        .def_readonly("pilot_cost", &EnsembleReport::pilot_cost)
        .def_readonly("diagnostics", &EnsembleReport::diagnostics)
        .def_readonly("mse", &EnsembleReport::mse)
        .def_readonly("cost_model", &EnsembleReport::cost_model);

    py::class_<ExperimentResult>(m, "ExperimentResult")
        .def_readonly("files", &ExperimentResult::files)
        .def_readonly("reports", &ExperimentResult::reports);

    m.def("load_config", &load_config, py::arg("path"));
    m.def("apply_full_scale", &apply_full_scale, py::arg("config"));
    m.def("run_experiment", &run_experiment, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("run_pre_post_ablation", &run_pre_post_ablation, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("cost_table_csv", &cost_table_csv, py::arg("depth"));
    m.def("damping_curves_csv", &damping_curves_csv, py::arg("n1"));
}
