#!/usr/bin/env python3
"""Smoke tests for the Python bindings.

Exits 77 (ctest skip) when the extension is not installed, nonzero on any
failed check.  Everything here re-checks values that the C++ suites pin, so a
failure means the binding layer, not the core.
"""

import json
import math
import os
import sys
import tempfile

try:
    import fmlmc
except ImportError as exc:
    print(f"skip: fmlmc not importable ({exc})")
    sys.exit(77)


def check(cond, what):
    if not cond:
        print(f"FAIL: {what}")
        sys.exit(1)
    print(f"ok: {what}")


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


# --- spectral basics -------------------------------------------------------
t = fmlmc.HartleyTransform(8)
x = [0.3, -1.2, 0.8, 0.05, -0.6, 1.1, -0.25, 0.4]
rt = t.inverse(t.forward(x))
check(all(close(a, b) for a, b in zip(rt, x)), "hartley forward/inverse roundtrip")

c = fmlmc.damping_coefficients(8)
check(c[0] == 1.0 and c[8] == 0.0 and len(c) == 16, "damping coefficient endpoints")

eigs = fmlmc.circulant_eigenvalues([2.0, -0.5, 0.1, -0.05, 0.02, -0.05, 0.1, -0.5])
check(close(eigs[0], sum([2.0, -0.5, 0.1, -0.05, 0.02, -0.05, 0.1, -0.5])),
      "circulant eigenvalue at zero frequency is the column sum")

# --- transfers ---------------------------------------------------------------
p = fmlmc.prolong_1d([1.0, 2.0])
check(p == [1.0, 1.0, 2.0, 2.0], "piecewise-constant prolongation")
r = fmlmc.restrict_1d([1.0, 1.0, 2.0, 2.0])
check(r == [2.0, 4.0], "summing restriction")

# --- cost model and allocation ----------------------------------------------
table = fmlmc.cost_table(fmlmc.CostModel.for_setup(1, fmlmc.FilterConfig.filtered()), 5)
check(close(table.normalized[0], 274.0 / 4800.0), "filtered 1D coarsest normalized cost")
table2 = fmlmc.cost_table(fmlmc.CostModel.for_setup(2, fmlmc.FilterConfig.unfiltered()), 3)
check(close(table2.normalized[0], 0.01825), "plain 2D coarsest normalized cost")

alloc = fmlmc.allocate(10.0, [1.0, 2.0], [4.0, 1.0])
check(list(alloc.samples) == [5, 1], "frozen two-level sample allocation")
single = fmlmc.allocate(100.0, [1.0], [4.0])
check(list(single.samples) == [100], "single-level allocation collapse")

# --- 1D estimator pipeline ----------------------------------------------------
h = fmlmc.build_hierarchy_1d(32, 2)
check(h.depth() == 1 and h.levels() == 2, "hierarchy shape")
sims = fmlmc.level_simulators_1d(h, 0.06, 10, fmlmc.SimulatorKind.LinearField,
                                 fmlmc.FilterConfig.unfiltered())
pilot = fmlmc.pilot_variances(h, sims, 16, 7)
check(len(pilot) == 2 and all(v > 0 for v in pilot), "pilot variances positive")
table = fmlmc.cost_table(fmlmc.CostModel.for_setup(1, fmlmc.FilterConfig.unfiltered()), 1)
alloc = fmlmc.allocate(12.0, table.normalized, pilot)
runs = fmlmc.run_ensemble(fmlmc.EstimatorKind.Mlmc, h, sims, alloc, 7, 4)
check(len(runs) == 4 and len(runs[0].estimate) == 32, "ensemble shape")
spec = fmlmc.spectral_variance_1d(runs)
check(spec.total > 0 and close(spec.total, spec.nu_cml[-1]), "spectral total matches cumulative")

# Depth-0 multilevel must equal plain Monte Carlo bit for bit.
h0 = fmlmc.build_hierarchy_1d(32, 1)
sims0 = fmlmc.level_simulators_1d(h0, 0.06, 10, fmlmc.SimulatorKind.LinearField,
                                  fmlmc.FilterConfig.unfiltered())
a0 = fmlmc.allocate(12.0, [1.0], [pilot[0]])
mc = fmlmc.run_estimator(fmlmc.EstimatorKind.MonteCarlo, h0, sims0, a0, 7)
ml = fmlmc.run_estimator(fmlmc.EstimatorKind.Mlmc, h0, sims0, a0, 7)
check(mc.estimate == ml.estimate, "depth-0 multilevel collapses to Monte Carlo")

# --- 2D simulator and diagnostics ---------------------------------------------
grf = fmlmc.GrfParams(0.12, 0.024, 0.2, 5)
h2 = fmlmc.build_hierarchy_2d(16, 8, 1)
ls = fmlmc.sample_lengthscale_fields(grf, h2.level_2d(0))
check(len(ls.d11) == 128 and min(ls.d11) >= 0.012, "lengthscale fields sampled and floored")
sim2 = fmlmc.Simulator2D(ls, 10, fmlmc.SimulatorKind.SquaredField)
theta = fmlmc.exact_theta(sim2, 128)
check(len(theta) == 128 and all(v > 0 for v in theta), "exact per-cell variance")

# --- experiment runner ----------------------------------------------------------
cfg = fmlmc.ExperimentConfig()
cfg.kind = fmlmc.ExperimentKind.OneDLinear
cfg.name = "binding-smoke"
cfg.finest = 32
cfg.depths = [1]
cfg.estimators = [fmlmc.EstimatorKind.MonteCarlo, fmlmc.EstimatorKind.FMlmc]
cfg.pilot_size = 8
cfg.ensemble_size = 3
cfg.budget_multiplier = 10.0
cfg.seed = 11
with tempfile.TemporaryDirectory() as out:
    cfg.output_dir = os.path.join(out, "run")
    result = fmlmc.run_experiment(cfg)
    check(all(os.path.exists(f) for f in result.files), "experiment artifacts on disk")
    summary = [f for f in result.files if f.endswith("summary.json")]
    check(len(summary) == 1, "summary emitted")
    with open(summary[0]) as fh:
        js = json.load(fh)
    check(len(js["reports"]) == len(result.reports) == 2, "one report per case")
    totals = [r.diagnostics.total for r in result.reports]
    check(all(v > 0 for v in totals), "positive ensemble totals")
    check(all(math.isfinite(r.mse.raw_mse) for r in result.reports), "mse decomposition finite")

# --- one-shot tables and error mapping ------------------------------------------
check(fmlmc.cost_table_csv(3).splitlines()[0].startswith("dim,transfers,level"),
      "cost table csv schema")
check(fmlmc.damping_curves_csv(8).splitlines()[1].startswith("0,1,"),
      "damping csv leading row")

try:
    fmlmc.load_config("/nonexistent/config.json")
    check(False, "load_config raised on missing file")
except ValueError:
    check(True, "config errors surface as ValueError")

print("all binding smoke tests passed")
