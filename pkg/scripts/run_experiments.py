"""Regenerate the benchmark curves as CSV + SVG.

    python3 scripts/run_experiments.py --out results [--seeds 50] [--only synthetic,rho_sweep]

Experiments:
  synthetic   PA vs the three baselines on the 1-D synthetic pair
  rho_sweep   PA at rho in {0.5, 0.7, 0.9} (noise 1e-3)
  offline     PA with (M, N) in {(1,1), (50,50), (200,200)}
  sign_flip   all four algorithms with the prediction mirrored on [0.4, 0.6]
  finite_arm  Vanilla and PA with N in {1, 10, 100} on the bundled arm table
"""
import argparse
import dataclasses
import time
from pathlib import Path

import numpy as np

from pa_gp_ucb.algorithms import make_environment
from pa_gp_ucb.bench import EnsembleResult, estimate_rho_hat, run_ensemble
from pa_gp_ucb.bench.io import load_config, write_aggregate_csv, write_svg
from pa_gp_ucb.gp_core import Domain
from pa_gp_ucb.joint_model import NoiseSpec, TaskCoupling
from pa_gp_ucb.offline_design import net_from_count

CONFIGS = Path(__file__).parent / "configs"


def merged(parts: dict) -> EnsembleResult:
    """Relabel single-series ensembles and stack them into one result for plotting."""
    series, traces, failures = {}, {}, []
    for label, res in parts.items():
        (s,) = res.series.values()
        series[label] = dataclasses.replace(s, algorithm=label)
        traces.update({(label, seed): tr for (_, seed), tr in res.traces.items()})
        failures += res.failures
    return EnsembleResult(series=series, traces=traces, failures=failures)


def synthetic(seeds, workers):
    return run_ensemble(load_config(CONFIGS / "synthetic.cfg"), seeds, workers=workers)


def rho_sweep(seeds, workers):
    base = load_config(CONFIGS / "synthetic.cfg").replace(noise=NoiseSpec(0.001, 0.001))
    return merged({f"rho={r}": run_ensemble(base.replace(coupling=TaskCoupling(r)), seeds, ("pa",), workers=workers)
                   for r in (0.5, 0.7, 0.9)})


def offline(seeds, workers):
    base = load_config(CONFIGS / "synthetic.cfg")
    return merged({f"M={m},N={n}": run_ensemble(base.replace(net=net_from_count(Domain(1), m, n)), seeds, ("pa",),
                                                workers=workers)
                   for m, n in ((1, 1), (50, 50), (200, 200))})


def sign_flip(seeds, workers):
    return run_ensemble(load_config(CONFIGS / "sign_flip.cfg"), seeds, workers=workers)


def finite_arm(seeds, workers):
    base = load_config(CONFIGS / "finite_arm.cfg")
    g = make_environment(base).ground
    rho = estimate_rho_hat(np.c_[g.f_table, g.f_ml_table])
    print(f"  rho_hat = {rho:.4f}")
    base = base.replace(coupling=TaskCoupling(rho))
    parts = {"vanilla": run_ensemble(base, seeds, ("vanilla",), workers=workers)}
    for n in (1, 10, 100):
        parts[f"pa N={n}"] = run_ensemble(base.replace(net=net_from_count(Domain(2), 1, n)), seeds, ("pa",),
                                          workers=workers)
    return merged(parts)


EXPERIMENTS = {f.__name__: f for f in (synthetic, rho_sweep, offline, sign_flip, finite_arm)}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results")
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", help="comma list of experiment names")
    args = ap.parse_args(argv)
    names = args.only.split(",") if args.only else list(EXPERIMENTS)
    unknown = set(names) - set(EXPERIMENTS)
    if unknown:
        ap.error(f"unknown experiments {sorted(unknown)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in names:
        t0 = time.perf_counter()
        print(f"{name}:")
        res = EXPERIMENTS[name](range(args.seeds), args.workers)
        write_aggregate_csv(res, out / f"{name}.csv")
        write_svg(res, out / f"{name}.svg", title=name)
        for label, s in res.series.items():
            print(f"  {label:16s} R_T = {s.final_mean:8.3f} +- {s.final_stderr:.3f}  ({s.n_runs} runs)")
        for alg, seed, msg in res.failures:
            print(f"  failed: {alg} seed {seed}: {msg}")
        print(f"  {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
