#include "fmlmc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <thread>

namespace fmlmc {

FilterConfig estimator_filters(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::FMlmc:
      return FilterConfig::filtered();
    case EstimatorKind::FMlmcPreOnly:
      return FilterConfig::pre_only();
    case EstimatorKind::FMlmcPostOnly:
      return FilterConfig::post_only();
    case EstimatorKind::MonteCarlo:
    case EstimatorKind::Mlmc:
      break;
  }
  return FilterConfig::unfiltered();
}

const char* estimator_label(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::MonteCarlo:
      return "mc";
    case EstimatorKind::Mlmc:
      return "mlmc";
    case EstimatorKind::FMlmc:
      return "fmlmc";
    case EstimatorKind::FMlmcPreOnly:
      return "fmlmc-pre";
    case EstimatorKind::FMlmcPostOnly:
      return "fmlmc-post";
  }
  return "unknown";
}

Field LevelSimulator::apply(std::span<const double> x_finest) const {
  return pipeline_apply(prolongation, simulate(pipeline_apply(restriction, x_finest)));
}

std::vector<LevelSimulator> level_simulators_1d(const GridHierarchy& h, double lengthscale, int m,
                                                SimulatorKind sim_kind, FilterConfig filters) {
  if (h.dim() != 1) throw std::invalid_argument("level_simulators_1d: 1D hierarchy required");
  std::vector<LevelSimulator> out;
  out.reserve(static_cast<std::size_t>(h.levels()));
  for (int l = 0; l <= h.depth(); ++l) {
    auto sim = std::make_shared<Simulator1D>(DiffusionParams1D{lengthscale, m, h.level_1d(l)},
                                             sim_kind);
    out.push_back(LevelSimulator{
        l,
        [sim](std::span<const double> x) { return sim->apply(x); },
        TransferPipeline{&h, filters, h.depth(), l},
        TransferPipeline{&h, filters, l, h.depth()},
    });
  }
  return out;
}

std::vector<LevelSimulator> level_simulators_2d(const GridHierarchy& h,
                                                const DiffusivityField2D& finest_lengthscales,
                                                int m, SimulatorKind sim_kind, FilterConfig filters,
                                                LinearSolveConfig solver) {
  if (h.dim() != 2) throw std::invalid_argument("level_simulators_2d: 2D hierarchy required");
  const Level2D& finest = h.level_2d(h.depth());
  if (finest_lengthscales.level.nx != finest.nx || finest_lengthscales.level.ny != finest.ny)
    throw std::invalid_argument("level_simulators_2d: lengthscale fields sized for another level");

  // Restrict the lengthscale fields down the hierarchy, then build one
  // simulator per level.
  std::vector<DiffusivityField2D> scales(static_cast<std::size_t>(h.levels()));
  scales[static_cast<std::size_t>(h.depth())] = finest_lengthscales;
  for (int l = h.depth(); l > 0; --l)
    scales[static_cast<std::size_t>(l - 1)] =
        restrict_lengthscale(scales[static_cast<std::size_t>(l)]);

  std::vector<LevelSimulator> out;
  out.reserve(static_cast<std::size_t>(h.levels()));
  for (int l = 0; l <= h.depth(); ++l) {
    auto sim = std::make_shared<Simulator2D>(
        DiffusionParams2D{std::move(scales[static_cast<std::size_t>(l)]), m}, sim_kind, solver);
    out.push_back(LevelSimulator{
        l,
        [sim](std::span<const double> x) { return sim->apply(x); },
        TransferPipeline{&h, filters, h.depth(), l},
        TransferPipeline{&h, filters, l, h.depth()},
    });
  }
  return out;
}

double CostModel::normalized_cost(int level, int depth) const {
  const double down = std::pow(static_cast<double>(s), level - depth);
  return down * (1.0 + gamma() * (1.0 / down - 1.0));
}

CostModel CostModel::for_setup(int dim, FilterConfig filters, int q, int t) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("CostModel: dim must be 1 or 2");
  CostModel m;
  m.s = dim == 1 ? 2 : 4;
  m.alpha = static_cast<double>((dim == 1 ? 3 : 5) * q * t);
  // Only the restriction side shows up per sample: the input is restricted
  // once per sample per step, while the prolongation side acts once on each
  // level mean, amortized away over the sample sizes.
  const double sweep = dim == 1 ? 3.0 : 6.0;
  m.beta = 1.0 + sweep * (filters.pre ? 1.0 : 0.0);
  return m;
}

CostTable cost_table(const CostModel& model, int depth) {
  if (depth < 0) throw std::invalid_argument("cost_table: negative depth");
  CostTable t;
  t.normalized.resize(static_cast<std::size_t>(depth) + 1);
  for (int l = 0; l <= depth; ++l)
    t.normalized[static_cast<std::size_t>(l)] = model.normalized_cost(l, depth);
  for (int l = 0; l < depth; ++l)
    t.ratios.push_back(t.normalized[static_cast<std::size_t>(l) + 1] /
                       t.normalized[static_cast<std::size_t>(l)]);
  return t;
}

double Allocation::realized_cost() const {
  double c = 0.0;
  for (std::size_t l = 0; l < samples.size(); ++l)
    c += static_cast<double>(samples[l]) * pair_costs[l];
  return c;
}

Allocation allocate(double budget, std::span<const double> level_costs,
                    std::span<const double> variances) {
  if (!(budget > 0.0)) throw std::invalid_argument("allocate: budget must be positive");
  if (level_costs.size() != variances.size() || level_costs.empty())
    throw std::invalid_argument("allocate: costs and variances must match and be nonempty");
  const std::size_t levels = level_costs.size();

  Allocation a;
  a.budget = budget;
  a.variances.assign(variances.begin(), variances.end());
  a.pair_costs.resize(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    if (!(level_costs[l] > 0.0)) throw std::invalid_argument("allocate: costs must be positive");
    if (variances[l] < 0.0) throw std::invalid_argument("allocate: negative variance");
    a.pair_costs[l] = level_costs[l] + (l > 0 ? level_costs[l - 1] : 0.0);
  }
  double norm = 0.0;
  for (std::size_t l = 0; l < levels; ++l) norm += std::sqrt(variances[l] * a.pair_costs[l]);
  a.normalizer = norm;

  a.samples.resize(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    long long m = 1;
    if (norm > 0.0 && variances[l] > 0.0) {
      const double raw = (budget / norm) * std::sqrt(variances[l] / a.pair_costs[l]);
      m = std::max(1LL, static_cast<long long>(std::floor(raw)));
    }
    a.samples[l] = m;
  }
  return a;
}

namespace {

double accumulate_weighted_norm2(const Field& x, double w) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return w * s;
}

void add_scaled(Field& acc, const Field& x, double a) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a * x[i];
}

}  // namespace

std::vector<double> pilot_variances(const GridHierarchy& h,
                                    const std::vector<LevelSimulator>& sims, int pilot_size,
                                    std::uint64_t seed, std::uint64_t replicate) {
  if (pilot_size < 2) throw std::invalid_argument("pilot_variances: pilot size must be >= 2");
  if (sims.empty()) throw std::invalid_argument("pilot_variances: no simulators");
  const int finest = sims.back().prolongation.to;
  const std::size_t n = h.cells(finest);
  const double w = h.gram_weight(finest);
  const std::size_t levels = sims.size();

  std::vector<double> sum_norm2(levels, 0.0);
  std::vector<Field> sum(levels, Field(n, 0.0));
  for (int member = 0; member < pilot_size; ++member) {
    RandomStream rs(derive_stream(seed, StreamTag::pilot_sample, replicate,
                                  static_cast<std::uint64_t>(member)));
    Field x = sample_input(n, w, rs);
    Field prev;  // fbar at the previous (coarser) level, on the finest grid
    for (std::size_t l = 0; l < levels; ++l) {
      Field y = sims[l].apply(x);
      if (l == 0) {
        sum_norm2[l] += accumulate_weighted_norm2(y, w);
        add_scaled(sum[l], y, 1.0);
      } else {
        Field d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = y[i] - prev[i];
        sum_norm2[l] += accumulate_weighted_norm2(d, w);
        add_scaled(sum[l], d, 1.0);
      }
      prev = std::move(y);
    }
  }

  std::vector<double> v(levels, 0.0);
  const double m = static_cast<double>(pilot_size);
  for (std::size_t l = 0; l < levels; ++l) {
    const double mean_norm2 = accumulate_weighted_norm2(sum[l], w) / (m * m);
    v[l] = std::max(0.0, (sum_norm2[l] - m * mean_norm2) / (m - 1.0));
  }
  return v;
}

SamplerFn gaussian_sampler(const GridHierarchy& h, int finest_level, std::uint64_t seed,
                           std::uint64_t replicate) {
  const std::size_t n = h.cells(finest_level);
  const double w = h.gram_weight(finest_level);
  return [n, w, seed, replicate](int level, long long sample) {
    const std::uint64_t level_key = derive_stream(seed, StreamTag::estimator_sample, replicate,
                                                  static_cast<std::uint64_t>(level));
    RandomStream rs(derive_stream(level_key, static_cast<std::uint64_t>(sample)));
    return sample_input(n, w, rs);
  };
}

EstimatorRun run_estimator_with_sampler(EstimatorKind kind, const GridHierarchy& h,
                                        const std::vector<LevelSimulator>& sims,
                                        const Allocation& alloc, const SamplerFn& sampler) {
  if (sims.empty()) throw std::invalid_argument("run_estimator: no simulators");
  const bool single = kind == EstimatorKind::MonteCarlo;
  const std::size_t levels = single ? 1 : sims.size();
  if (alloc.samples.size() != levels)
    throw std::invalid_argument("run_estimator: allocation does not match the level count");

  const LevelSimulator& top = sims.back();
  const int finest = top.prolongation.to;
  const std::size_t n = h.cells(finest);

  EstimatorRun run;
  run.kind = kind;
  run.depth = top.level;
  run.estimate.assign(n, 0.0);
  run.allocation = alloc;
  run.realized_cost = alloc.realized_cost();

  if (single) {
    const long long m = alloc.samples[0];
    Field acc(n, 0.0);
    for (long long i = 0; i < m; ++i) {
      Field y = top.apply(sampler(top.level, i));
      add_scaled(acc, y, 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) run.estimate[i] = acc[i] / static_cast<double>(m);
    return run;
  }

  for (std::size_t l = 0; l < sims.size(); ++l) {
    const LevelSimulator& cur = sims[l];
    const long long m = alloc.samples[l];
    const std::size_t nl = h.cells(cur.level);
    Field acc(nl, 0.0);
    if (l == 0) {
      for (long long i = 0; i < m; ++i) {
        Field x = pipeline_apply(cur.restriction, sampler(cur.level, i));
        add_scaled(acc, cur.simulate(x), 1.0);
      }
    } else {
      const LevelSimulator& below = sims[l - 1];
      const FilterConfig filters = cur.restriction.filters;
      const TransferPipeline down{&h, filters, cur.level, below.level};
      const TransferPipeline up{&h, filters, below.level, cur.level};
      for (long long i = 0; i < m; ++i) {
        Field x_l = pipeline_apply(cur.restriction, sampler(cur.level, i));
        // One further restriction step, so the coarse input is exactly the
        // composed restriction of the same fine draw.
        Field x_below = pipeline_apply(down, x_l);
        Field fine = cur.simulate(x_l);
        Field coarse = pipeline_apply(up, below.simulate(x_below));
        for (std::size_t i2 = 0; i2 < nl; ++i2) acc[i2] += fine[i2] - coarse[i2];
      }
    }
    for (auto& v : acc) v /= static_cast<double>(m);
    add_scaled(run.estimate, pipeline_apply(cur.prolongation, acc), 1.0);
  }
  return run;
}

EstimatorRun run_estimator(EstimatorKind kind, const GridHierarchy& h,
                           const std::vector<LevelSimulator>& sims, const Allocation& alloc,
                           std::uint64_t seed, std::uint64_t replicate) {
  const int finest = sims.empty() ? 0 : sims.back().prolongation.to;
  EstimatorRun run = run_estimator_with_sampler(kind, h, sims, alloc,
                                                gaussian_sampler(h, finest, seed, replicate));
  run.seed = seed;
  run.replicate = replicate;
  return run;
}

std::vector<EstimatorRun> run_ensemble(EstimatorKind kind, const GridHierarchy& h,
                                       const std::vector<LevelSimulator>& sims,
                                       const Allocation& alloc, std::uint64_t seed, int replicates,
                                       int threads) {
  if (replicates < 0) throw std::invalid_argument("run_ensemble: negative replicate count");
  if (threads <= 0) {
    threads = 1;
    if (const char* env = std::getenv("FMLMC_THREADS")) {
      const int parsed = std::atoi(env);
      if (parsed > 0) threads = std::min(parsed, 64);
    }
  }
  threads = std::max(1, std::min(threads, replicates));

  std::vector<EstimatorRun> runs(static_cast<std::size_t>(replicates));
  auto worker = [&](int first) {
    for (int r = first; r < replicates; r += threads)
      runs[static_cast<std::size_t>(r)] =
          run_estimator(kind, h, sims, alloc, seed, static_cast<std::uint64_t>(r));
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  return runs;
}

}  // namespace fmlmc
