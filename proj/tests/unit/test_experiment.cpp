#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "fmlmc/errors.hpp"
#include "fmlmc/experiment.hpp"

using namespace fmlmc;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fmlmc_exp_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

fs::path spill(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << body;
  return path;
}

std::string load_error(const fs::path& config_path) {
  try {
    load_config(config_path.string());
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool mentions(const std::string& message, const std::string& needle) {
  return message.find(needle) != std::string::npos;
}

ExperimentConfig smoke_config(const fs::path& out_dir) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::OneDLinear;
  cfg.name = "smoke";
  cfg.finest = 32;
  cfg.depths = {0, 1};
  cfg.estimators = {EstimatorKind::MonteCarlo, EstimatorKind::Mlmc, EstimatorKind::FMlmc};
  cfg.lengthscale = 0.06;
  cfg.m = 10;
  cfg.budget_multiplier = 12.0;
  cfg.pilot_size = 16;
  cfg.ensemble_size = 4;
  cfg.seed = 7;
  cfg.output_dir = out_dir.string();
  return cfg;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("config loading applies defaults and validates fields") {
  const fs::path dir = fresh_dir("config");

  const ExperimentConfig one_d =
      load_config(spill(dir, "min1d.json", R"({"kind": "1d-linear"})").string());
  CHECK(one_d.kind == ExperimentKind::OneDLinear);
  CHECK(one_d.name == "1d-linear");
  CHECK(one_d.finest == 256);
  CHECK(one_d.depths == std::vector<int>{1});
  CHECK(one_d.estimators.size() == 3);
  CHECK(one_d.m == 10);
  CHECK(one_d.budget_multiplier == 100.0);
  CHECK(one_d.pilot_size == 1000);
  CHECK(one_d.ensemble_size == 1000);
  CHECK(one_d.solver.tolerance == 1e-10);

  const ExperimentConfig two_d = load_config(
      spill(dir, "min2d.json", R"({"kind": "2d-theta", "grf": {"mean": 0.1, "lengthscale": 0.2}})")
          .string());
  CHECK(two_d.ensemble_size == 500);        // 2D default is smaller
  CHECK(two_d.grf.stddev == 0.1 / 5.0);     // stddev defaults to mean/5
  CHECK(two_d.finest_nx == 2 * two_d.finest_ny);

  // Error messages carry the offending field path.
  CHECK(mentions(load_error(dir / "missing.json"), "cannot open"));
  CHECK(mentions(load_error(spill(dir, "syntax.json", "{nope")), "cannot parse"));
  CHECK(mentions(load_error(spill(dir, "array.json", "[1,2]")), "root must be a JSON object"));
  CHECK(mentions(load_error(spill(dir, "nokind.json", "{}")), "'kind': required"));
  CHECK(mentions(load_error(spill(dir, "badkind.json", R"({"kind": "3d"})")), "unknown kind '3d'"));
  CHECK(mentions(load_error(spill(dir, "typo.json", R"({"kind": "1d-linear", "finestt": 64})")),
                 "'finestt': unknown key"));
  CHECK(mentions(
      load_error(spill(dir, "badest.json", R"({"kind": "1d-linear", "estimators": ["mcmc"]})")),
      "estimators[0]"));
  CHECK(mentions(
      load_error(spill(dir, "dupest.json",
                       R"({"kind": "1d-linear", "estimators": ["mc", "mc"]})")),
      "duplicate estimator"));
  CHECK(mentions(
      load_error(spill(dir, "dupdepth.json", R"({"kind": "1d-linear", "depths": [1, 1]})")),
      "duplicate depth"));
  CHECK(mentions(
      load_error(spill(dir, "negdepth.json", R"({"kind": "1d-linear", "depths": [-1]})")),
      "between 0 and 20"));
  CHECK(mentions(load_error(spill(dir, "pilot.json", R"({"kind": "1d-linear", "pilot_size": 1})")),
                 "'pilot_size'"));
  CHECK(mentions(load_error(spill(dir, "oddm.json", R"({"kind": "1d-linear", "m": 7})")),
                 "even smoothness"));
  CHECK(mentions(
      load_error(spill(dir, "shallow.json", R"({"kind": "1d-linear", "finest": 32, "depths": [5]})")),
      "cannot be coarsened"));
  CHECK(mentions(load_error(spill(dir, "nogrf.json", R"({"kind": "2d-theta"})")),
                 "'grf': required"));
  CHECK(mentions(
      load_error(spill(dir, "aspect.json",
                       R"({"kind": "2d-theta", "finest_nx": 64, "finest_ny": 64,
                           "grf": {"mean": 0.1, "lengthscale": 0.2}})")),
      "2 * finest_ny"));
  CHECK(mentions(
      load_error(spill(dir, "grftypo.json",
                       R"({"kind": "2d-theta", "grf": {"mean": 0.1, "lengthscale": 0.2, "sd": 1}})")),
      "grf.sd"));
  CHECK(mentions(
      load_error(spill(dir, "oddn1.json", R"({"kind": "damping-curves", "damping_n1": 9})")),
      "damping_n1"));
}

TEST_CASE("full-scale overrides swap in and stay validated") {
  const fs::path dir = fresh_dir("full");
  ExperimentConfig cfg = load_config(
      spill(dir, "full.json",
            R"({"kind": "1d-linear", "finest": 64, "depths": [3],
                "full": {"finest": 512, "ensemble_size": 48}})")
          .string());
  CHECK(cfg.finest == 64);
  apply_full_scale(cfg);
  CHECK(cfg.finest == 512);
  CHECK(cfg.ensemble_size == 48);

  ExperimentConfig broken = cfg;
  broken.full.finest = 33;  // not refinable three times
  CHECK_THROWS_AS(apply_full_scale(broken), ConfigError);
}

TEST_CASE("1d smoke run emits every declared file deterministically") {
  const fs::path dir_a = fresh_dir("smoke_a");
  const fs::path dir_b = fresh_dir("smoke_b");
  const ExperimentResult first = run_experiment(smoke_config(dir_a));

  // mc once, then {mlmc, fmlmc} at each of depths {0, 1}.
  REQUIRE(first.reports.size() == 5);
  CHECK(first.reports[0].kind == EstimatorKind::MonteCarlo);
  CHECK(first.reports[0].depth == 0);
  CHECK(first.reports[3].depth == 1);

  // 5 per-case triples + totals.csv + three shared SVGs + summary.json.
  REQUIRE(first.files.size() == 20);
  for (const std::string& file : first.files) {
    CAPTURE(file);
    CHECK(fs::file_size(file) > 0);
  }

  // A depth-0 multilevel estimator degenerates to the single-grid estimator
  // bit for bit: shared input streams, identity transfers.
  CHECK(first.reports[1].diagnostics.total == first.reports[0].diagnostics.total);
  CHECK(first.reports[2].mse.raw_mse == first.reports[0].mse.raw_mse);

  for (const EnsembleReport& rep : first.reports) {
    for (long long m : rep.allocation.samples) CHECK(m >= 1);
    CHECK(rep.allocation.realized_cost() <= rep.allocation.budget + 1e-9);
    const double identity =
        (rep.diagnostics.ensemble_size - 1.0) / rep.diagnostics.ensemble_size * rep.mse.variance +
        rep.mse.squared_bias;
    CHECK(rep.mse.raw_mse == doctest::Approx(identity).epsilon(1e-12));
  }

  // Rerunning the identical config into another directory reproduces every
  // artifact byte for byte (summaries list basenames, not paths).
  const ExperimentResult second = run_experiment(smoke_config(dir_b));
  REQUIRE(second.files.size() == first.files.size());
  for (std::size_t i = 0; i < first.files.size(); ++i) {
    CAPTURE(first.files[i]);
    CHECK(fs::path(first.files[i]).filename() == fs::path(second.files[i]).filename());
    CHECK(slurp(first.files[i]) == slurp(second.files[i]));
  }

  // Every CSV declares its column schema in the first line.
  for (const std::string& file : first.files) {
    if (fs::path(file).extension() != ".csv") continue;
    const std::string body = slurp(file);
    const std::string header = body.substr(0, body.find('\n'));
    CAPTURE(file);
    CHECK(header.find_first_not_of("abcdefghijklmnopqrstuvwxyz_,") == std::string::npos);
    CHECK(header.find(',') != std::string::npos);
  }

  // Machine-readable artifacts parse and agree with the in-memory reports.
  const nlohmann::json summary = nlohmann::json::parse(slurp(dir_a / "summary.json"));
  CHECK(summary.at("files").size() == first.files.size());
  CHECK(!summary.contains("output_dir"));
  CHECK(summary.at("reports").size() == 5);
  const nlohmann::json alloc = nlohmann::json::parse(slurp(dir_a / "allocation_mlmc_L1.json"));
  CHECK(alloc.at("samples").size() == 2);
  CHECK(alloc.at("gamma").get<double>() == doctest::Approx(2.0 / 300.0).epsilon(1e-12));

  // SVGs are self-contained documents.
  for (const std::string& file : first.files) {
    if (fs::path(file).extension() != ".svg") continue;
    const std::string body = slurp(file);
    CAPTURE(file);
    CHECK(body.rfind("<svg", 0) == 0);
    CHECK(mentions(body, "</svg>"));
  }
}

TEST_CASE("2d run emits the intrinsic-variance artifacts") {
  const fs::path dir = fresh_dir("twod");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::TwoDTheta;
  cfg.name = "tiny 2d";
  cfg.finest_nx = 16;
  cfg.finest_ny = 8;
  cfg.depths = {1};
  cfg.estimators = {EstimatorKind::MonteCarlo, EstimatorKind::FMlmc};
  cfg.grf = {0.12, 0.024, 0.2, 5};
  cfg.m = 10;
  cfg.budget_multiplier = 10.0;
  cfg.pilot_size = 8;
  cfg.ensemble_size = 3;
  cfg.seed = 9;
  cfg.output_dir = dir.string();

  const ExperimentResult result = run_experiment(cfg);
  REQUIRE(result.reports.size() == 2);

  const std::string theta = slurp(dir / "theta.csv");
  CHECK(std::count(theta.begin(), theta.end(), '\n') == 16 * 8 + 1);
  CHECK(theta.rfind("i,j,x,y,theta\n", 0) == 0);
  CHECK(fs::exists(dir / "theta.svg"));
  CHECK(fs::exists(dir / "spectrum_mc_L0.svg"));
  CHECK(fs::exists(dir / "spectrum_fmlmc_L1.svg"));

  const std::string spectrum = slurp(dir / "spectrum_fmlmc_L1.csv");
  CHECK(std::count(spectrum.begin(), spectrum.end(), '\n') == 16 * 8 + 1);
  const std::string cml = slurp(dir / "cumulative_fmlmc_L1.csv");
  CHECK(std::count(cml.begin(), cml.end(), '\n') == 8 + 1);

  // 2D spectral bookkeeping: the spectral total is twice the weighted-norm
  // ensemble variance.
  for (const EnsembleReport& rep : result.reports)
    CHECK(rep.diagnostics.total == doctest::Approx(2.0 * rep.mse.variance).epsilon(1e-10));
}

TEST_CASE("pre/post ablation fixes the estimator roster and needs 1d") {
  const fs::path dir = fresh_dir("ablation");
  ExperimentConfig cfg = smoke_config(dir);
  cfg.depths = {1};
  cfg.estimators = {EstimatorKind::Mlmc};  // replaced by the ablation roster

  const ExperimentResult result = run_pre_post_ablation(cfg);
  REQUIRE(result.reports.size() == 5);
  CHECK(fs::exists(dir / "allocation_fmlmc-pre_L1.json"));
  CHECK(fs::exists(dir / "allocation_fmlmc-post_L1.json"));

  // Single-filter transfer overheads: restriction-side filtering costs per
  // sample, output-side filtering does not.
  double gamma_pre = 0.0;
  double gamma_post = 0.0;
  for (const EnsembleReport& rep : result.reports) {
    if (rep.kind == EstimatorKind::FMlmcPreOnly) gamma_pre = rep.cost_model.gamma();
    if (rep.kind == EstimatorKind::FMlmcPostOnly) gamma_post = rep.cost_model.gamma();
  }
  CHECK(gamma_pre == doctest::Approx(4.0 * 2.0 / 300.0).epsilon(1e-15));
  CHECK(gamma_post == doctest::Approx(1.0 * 2.0 / 300.0).epsilon(1e-15));

  ExperimentConfig two_d;
  two_d.kind = ExperimentKind::TwoDTheta;
  CHECK_THROWS_AS(run_pre_post_ablation(two_d), ConfigError);
}

TEST_CASE("closed-form CSV bodies carry the known values") {
  const std::string table = cost_table_csv(5);
  CHECK(table.rfind("dim,transfers,level,offset,normalized_cost,ratio_to_coarser\n", 0) == 0);
  CHECK(mentions(table, "1,plain,0,-5,0.0377083333333,"));
  CHECK(mentions(table, "1,plain,4,-1,0.503333333333,1.97385620915"));
  CHECK(mentions(table, "1,filtered,0,-5,0.0570833333333,"));
  CHECK(mentions(table, "2,plain,2,-3,"));  // depth-5 2D ladder still prints all rows

  const std::string table2 = cost_table_csv(3);
  CHECK(mentions(table2, "2,plain,1,-2,0.065,3.56164383562"));
  CHECK(mentions(table2, "2,filtered,0,-3,0.034,"));

  const std::string damping = damping_curves_csv(32);
  const std::string first_row = damping.substr(damping.find('\n') + 1);
  CHECK(first_row.rfind("0,1,0,0,0,1,0,0,0\n", 0) == 0);  // k=0: consistent 1, rest 0
  CHECK(mentions(damping, "\n16,0,0,"));                  // k=n0: everything vanishes
  CHECK(std::count(damping.begin(), damping.end(), '\n') == 32 + 1);

  // The file-writing experiments wrap the same bodies.
  const fs::path dir = fresh_dir("closed");
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::CostTable;
  cfg.table_depth = 5;
  cfg.output_dir = (dir / "table").string();
  const ExperimentResult table_result = run_experiment(cfg);
  CHECK(slurp(dir / "table" / "cost_tables.csv") == table);
  CHECK(fs::exists(dir / "table" / "cost_tables.svg"));

  ExperimentConfig dcfg;
  dcfg.kind = ExperimentKind::DampingCurves;
  dcfg.damping_n1 = 32;
  dcfg.output_dir = (dir / "damping").string();
  const ExperimentResult damping_result = run_experiment(dcfg);
  CHECK(slurp(dir / "damping" / "damping_curves.csv") == damping);
  CHECK(fs::exists(dir / "damping" / "damping_curves.svg"));
}

}  // TEST_SUITE
