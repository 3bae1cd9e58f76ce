#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fmlmc/diffusion.hpp"
#include "fmlmc/grid.hpp"
#include "fmlmc/transfer.hpp"

namespace fmlmc {

enum class EstimatorKind {
  MonteCarlo,     // single level, finest simulator only
  Mlmc,           // multilevel, plain transfers
  FMlmc,          // multilevel, filtered restriction and prolongation
  FMlmcPreOnly,   // ablation: filter on restriction only
  FMlmcPostOnly,  // ablation: filter on prolongation only
};

/// The transfer filters each estimator kind wires into its pipelines.
FilterConfig estimator_filters(EstimatorKind kind);

/// Stable lowercase label used in serialized records and file names.
const char* estimator_label(EstimatorKind kind);

/// One level of a multilevel estimator: the level's simulator plus the
/// composed transfer pipelines to and from the finest level.  The full-level
/// map is apply(x) = prolong(simulate(restrict(x))); on the finest level both
/// pipelines are identities.
struct LevelSimulator {
  int level = 0;
  std::function<Field(std::span<const double>)> simulate;
  TransferPipeline restriction;   // finest -> level
  TransferPipeline prolongation;  // level -> finest

  Field apply(std::span<const double> x_finest) const;
};

/// Per-level simulator stacks over a hierarchy.  The 1D stack shares one
/// lengthscale; the 2D stack restricts the finest lengthscale fields level by
/// level.  `filters` is wired into every pipeline.
std::vector<LevelSimulator> level_simulators_1d(const GridHierarchy& h, double lengthscale, int m,
                                                SimulatorKind sim_kind, FilterConfig filters);
std::vector<LevelSimulator> level_simulators_2d(const GridHierarchy& h,
                                                const DiffusivityField2D& finest_lengthscales,
                                                int m, SimulatorKind sim_kind, FilterConfig filters,
                                                LinearSolveConfig solver = LinearSolveConfig::cg());

/// Abstract per-sample cost model: one simulator call costs alpha per cell
/// and one transfer step costs beta per cell, so relative level costs are
///   C_l / C_L = s^(l-L) * (1 + gamma (s^(L-l) - 1)),  gamma = s/(s-1) * beta/alpha.
struct CostModel {
  double alpha = 1.0;
  double beta = 0.0;
  int s = 2;

  double gamma() const { return (static_cast<double>(s) / (s - 1)) * (beta / alpha); }
  /// C_level / C_depth (normalized to 1 at the finest level `depth`).
  double normalized_cost(int level, int depth) const;

  /// alpha = (3 or 5) * q * t flops per cell per call; beta = 1 plus the
  /// smoother stencil cost (3 in 1D, 6 for the two 2D sweeps) when the
  /// restriction side is filtered.  Output-side filtering acts on level
  /// means, not samples, so it never enters beta.
  static CostModel for_setup(int dim, FilterConfig filters, int q = 5, int t = 20);
};

struct CostTable {
  std::vector<double> normalized;  // C_l / C_L, l = 0 .. depth
  std::vector<double> ratios;      // C_{l+1} / C_l, l = 0 .. depth-1
};

CostTable cost_table(const CostModel& model, int depth);

/// Sample sizes per level from the usual constrained-minimization rule:
///   M_l = max(1, floor((budget / S) * sqrt(V_l / (C_l + C_{l-1})))),
///   S = sum_l sqrt(V_l (C_l + C_{l-1})),  C_{-1} = 0.
struct Allocation {
  std::vector<long long> samples;   // M_l >= 1
  std::vector<double> variances;    // pilot V_l
  std::vector<double> pair_costs;   // C_l + C_{l-1}
  double budget = 0.0;
  double normalizer = 0.0;          // S

  double realized_cost() const;
  int levels() const { return static_cast<int>(samples.size()); }
};

Allocation allocate(double budget, std::span<const double> level_costs,
                    std::span<const double> variances);

/// Unbiased per-level pilot variances in the finest-level weighted norm:
/// V_0 = Var(fbar_0(X)), V_l = Var(fbar_l(X) - fbar_{l-1}(X)) with one shared
/// fine-level X per pilot member and fresh members.  Pilot draws are keyed
/// separately from estimator draws and are never reused by the estimator.
std::vector<double> pilot_variances(const GridHierarchy& h,
                                    const std::vector<LevelSimulator>& sims, int pilot_size,
                                    std::uint64_t seed, std::uint64_t replicate = 0);

struct EstimatorRun {
  EstimatorKind kind = EstimatorKind::MonteCarlo;
  int depth = 0;  // finest level index
  Field estimate;
  Allocation allocation;
  double realized_cost = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
};

/// Input sampler injection point: returns the fine-level input for a given
/// (level, sample) slot.  The default sampler draws N(0, W_L) from streams
/// keyed by (seed, replicate, level, sample), so every sample is reproducible
/// in isolation and no key depends on the estimator kind (kinds sharing a
/// seed consume identical inputs and pair exactly).
using SamplerFn = std::function<Field(int level, long long sample)>;

SamplerFn gaussian_sampler(const GridHierarchy& h, int finest_level, std::uint64_t seed,
                           std::uint64_t replicate);

/// Runs one estimator.  Multilevel kinds implement the factored form: level 0
/// averages the coarse simulator over its own fresh inputs; every level l >= 1
/// draws fresh fine inputs, restricts them down to level l, takes one more
/// restriction step to l-1 (never a second independent restriction from the
/// top), averages f_l(x_l) - P(f_{l-1}(x_{l-1})), and prolongs each level
/// mean to the finest level once.  MonteCarlo uses only sims.back().
EstimatorRun run_estimator(EstimatorKind kind, const GridHierarchy& h,
                           const std::vector<LevelSimulator>& sims, const Allocation& alloc,
                           std::uint64_t seed, std::uint64_t replicate = 0);

EstimatorRun run_estimator_with_sampler(EstimatorKind kind, const GridHierarchy& h,
                                        const std::vector<LevelSimulator>& sims,
                                        const Allocation& alloc, const SamplerFn& sampler);

/// Independent replicates with pre-assigned streams; `threads` 0 consults
/// FMLMC_THREADS (default 1).  Results are identical for any thread count.
std::vector<EstimatorRun> run_ensemble(EstimatorKind kind, const GridHierarchy& h,
                                       const std::vector<LevelSimulator>& sims,
                                       const Allocation& alloc, std::uint64_t seed, int replicates,
                                       int threads = 0);

}  // namespace fmlmc
