#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fmlmc/diagnostics.hpp"
#include "fmlmc/diffusion.hpp"
#include "fmlmc/estimators.hpp"

namespace fmlmc {

enum class ExperimentKind {
  OneDLinear,     // expectation of a linear map of white-ish input, 1D
  TwoDTheta,      // intrinsic variance (diagonal) estimation, 2D squared map
  DampingCurves,  // closed-form two-grid damping factors, no sampling
  CostTable,      // normalized level cost ladders, no sampling
};

struct SolverSettings {
  double tolerance = 1e-10;
  int max_iterations = 0;  // 0 picks the automatic budget
};

/// Values swapped in by the --full flag (0 keeps the desk-scale default).
struct FullScaleOverrides {
  int finest = 0;
  int finest_nx = 0;
  int finest_ny = 0;
  int ensemble_size = 0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::OneDLinear;
  std::string name = "experiment";

  int finest = 256;  // 1D finest cell count
  int finest_nx = 128;
  int finest_ny = 64;
  std::vector<int> depths{1};  // multilevel depths L to run (MC runs once as L=0)
  std::vector<EstimatorKind> estimators{EstimatorKind::MonteCarlo, EstimatorKind::Mlmc,
                                        EstimatorKind::FMlmc};

  double lengthscale = 0.06;  // 1D constant length-scale D
  GrfParams grf{};            // 2D length-scale field parameters
  int m = 10;

  double budget_multiplier = 100.0;  // budget C = multiplier * C_L
  int pilot_size = 1000;
  int ensemble_size = 1000;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  SolverSettings solver;

  int damping_n1 = 32;  // damping-curves: fine grid size
  int table_depth = 5;  // cost-table: ladder depth

  FullScaleOverrides full;
};

/// Parses and validates a JSON config file; throws ConfigError with the
/// offending key in the message.
ExperimentConfig load_config(const std::string& path);

/// Applies the config's `full` overrides (the --full flag).
void apply_full_scale(ExperimentConfig& config);

/// One ensemble's worth of results for a (kind, depth) pair.
struct EnsembleReport {
  EstimatorKind kind = EstimatorKind::MonteCarlo;
  int depth = 0;
  std::vector<double> pilot_variances;
  Allocation allocation;
  double pilot_cost = 0.0;  // separate from the estimator budget
  SpectralDiagnostics diagnostics;
  MseDecomposition mse;
  CostModel cost_model;
};

struct ExperimentResult {
  std::vector<std::string> files;  // paths written, in emission order
  std::vector<EnsembleReport> reports;
};

/// Runs the configured experiment and writes its CSV/JSON/SVG artifacts under
/// config.output_dir.  Deterministic: identical config and seed reproduce
/// every output byte for byte.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// 1D filter ablation: same experiment with the estimator list fixed to
/// MC, MLMC, pre-only, post-only, and both-sides filtering, sharing seeds.
ExperimentResult run_pre_post_ablation(ExperimentConfig config);

/// CSV bodies reused by the one-shot CLI commands; first line is the schema.
std::string cost_table_csv(int depth);
std::string damping_curves_csv(int n1);

}  // namespace fmlmc
