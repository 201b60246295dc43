"""Command-line entry point: ``pa-gp-ucb <subcommand> ...``."""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace

from ..acquisition import beta_t
from ..algorithms import ALGORITHMS, run
from ..errors import InputError, NumericalError, OracleError
from ..gp_core import Domain, KernelSpec
from ..joint_model import NoiseSpec
from ..offline_design import epsilon_net, sufficient_design
from ..oracles.arms import load_arm_table
from .ensemble import run_ensemble
from .io import load_config, read_traces_csv, write_aggregate_csv, write_svg, write_traces_csv
from .readback import nearest_arms
from .theory import estimate_rho_hat, info_gain, info_gain_greedy, regret_bound, theory_constants


def _seeds(text: str):
    """``"0-49"``, ``"0,3,7"`` or a count ``"50"`` (meaning 0..49)."""
    if "-" in text:
        lo, hi = (int(v) for v in text.split("-", 1))
        return list(range(lo, hi + 1))
    if "," in text:
        return [int(v) for v in text.split(",")]
    return list(range(int(text)))


def _with_endpoint(cfg, endpoint):
    if endpoint is None:
        return cfg
    return cfg.replace(env=replace(cfg.env, remote_endpoint=endpoint))


def cmd_run(args):
    cfg = _with_endpoint(load_config(args.config, args.set), args.endpoint)
    tr = run(cfg)
    write_traces_csv(tr, args.out, dim=cfg.env.domain.dim if cfg.env.kind != "finite_arm" else None)
    status = f" (stopped: {tr.failure})" if tr.failure else ""
    print(f"{tr.run_id}: R_{len(tr)} = {tr.final_regret:.6g}{status}")
    return 1 if tr.failure else 0


def cmd_bench(args):
    cfg = _with_endpoint(load_config(args.config, args.set), args.endpoint)
    algorithms = tuple(args.algorithms.split(",")) if args.algorithms else ALGORITHMS
    res = run_ensemble(cfg, _seeds(args.seeds), algorithms, workers=args.workers)
    write_aggregate_csv(res, args.out)
    if args.svg:
        write_svg(res, args.svg, title=args.title or "")
    if args.traces:
        write_traces_csv([res.traces[k] for k in sorted(res.traces)], args.traces)
    for alg, s in res.series.items():
        print(f"{alg:22s} mean R_T = {s.final_mean:10.4f}  stderr = {s.final_stderr:.4f}  n = {s.n_runs}")
    for alg, seed, msg in res.failures:
        print(f"failed: {alg} seed {seed}: {msg}", file=sys.stderr)
    return 0


def cmd_net_design(args):
    noise = NoiseSpec(args.eta_sq, args.eta_ml_sq)
    sd = sufficient_design(args.R, args.T, noise, args.rho, args.k_min, args.delta, args.a, args.b, args.d)
    M = epsilon_net(Domain(args.d, args.r), sd.epsilon_max).M
    print(f"sigma_min_ml_sq = {sd.sigma_min_sq:.6g}")
    print(f"L               = {sd.lipschitz:.6g}")
    print(f"epsilon_max     = {sd.epsilon_max:.6g}")
    print(f"N_min           = {sd.N_min}")
    print(f"M               = {M}")
    return 0


def cmd_bounds(args):
    noise = NoiseSpec(args.eta_sq, args.eta_ml_sq)
    tc = theory_constants(args.rho, noise)
    beta = beta_t(args.T, args.d, args.delta, args.a, args.b, args.r)
    if args.gamma is not None:
        gamma, how = args.gamma, "given"
    elif args.gamma_from_trace:
        runs = read_traces_csv(args.gamma_from_trace)
        if len(runs) != 1:
            raise InputError(f"expected one run in {args.gamma_from_trace}, found {len(runs)}")
        x = next(iter(runs.values()))["x"]
        gamma, how = info_gain(KernelSpec(args.length_scale, args.signal_var), args.eta_sq, x), "sequence"
    else:
        kernel = KernelSpec(args.length_scale, args.signal_var)
        grid = Domain(args.d, args.r).grid(args.grid)
        gamma, how = info_gain_greedy(kernel, args.eta_sq, grid, min(args.T, len(grid))), "greedy"
    b = regret_bound(args.T, beta, tc.C1, args.R, args.rho, gamma, tc.C2)
    print(f"C1            = {tc.C1:.6g}")
    print(f"C2            = {tc.C2:.6g}")
    print("R_star        = " + (f"{tc.R_star:.6g}" if tc.R_star is not None else f"undefined ({tc.note})"))
    print(f"ratio_factor  = {tc.ratio_factor(args.R):.6g}")
    print(f"beta_T        = {beta:.6g}")
    print(f"gamma_T       = {gamma:.6g} ({how})")
    print(f"bound PA      = {b.pa:.6g}")
    print(f"bound Vanilla = {b.vanilla:.6g}")
    return 0


def cmd_rhohat(args):
    with open(args.pairs, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    try:
        float(rows[0][0])
    except (ValueError, IndexError):
        rows = rows[1:]
    pairs = [(float(r[0]), float(r[1])) for r in rows]
    print(f"{estimate_rho_hat(pairs):.6g}")
    return 0


def cmd_arms_near(args):
    table = load_arm_table(args.table)
    x = [float(v) for v in args.x.split(",")]
    for nb in nearest_arms(table, x, args.k):
        print(f"{nb.arm_id}\t{nb.distance:.6g}\t{nb.text}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="pa-gp-ucb", description="Prediction-augmented GP-UCB benchmark tools")
    sub = p.add_subparsers(dest="command", required=True)

    def config_args(sp):
        sp.add_argument("--config", required=True, help="key=value config file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        sp.add_argument("--endpoint", help="remote prediction endpoint (arm environments only)")

    sp = sub.add_parser("run", help="one seeded run, trace CSV")
    config_args(sp)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("bench", help="seed ensemble, aggregate CSV and optional SVG")
    config_args(sp)
    sp.add_argument("--seeds", default="50", help="count, a-b range or comma list")
    sp.add_argument("--algorithms", help=f"comma list from {','.join(ALGORITHMS)}")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.add_argument("--svg")
    sp.add_argument("--traces", help="also write every trace to this CSV")
    sp.add_argument("--title")
    sp.set_defaults(func=cmd_bench)

    def theory_args(sp):
        sp.add_argument("--T", type=int, default=200)
        sp.add_argument("--rho", type=float, default=0.8)
        sp.add_argument("--eta-sq", type=float, default=0.01)
        sp.add_argument("--eta-ml-sq", type=float, default=0.01)
        sp.add_argument("--R", type=float, default=1.0)
        sp.add_argument("--d", type=int, default=1)
        sp.add_argument("--r", type=float, default=1.0)
        sp.add_argument("--delta", type=float, default=0.1)
        sp.add_argument("--a", type=float, default=1.0)
        sp.add_argument("--b", type=float, default=1.0)

    sp = sub.add_parser("net-design", help="sufficient net radius and replication")
    theory_args(sp)
    sp.add_argument("--k-min", type=float, default=1.0)
    sp.set_defaults(func=cmd_net_design)

    sp = sub.add_parser("bounds", help="theory constants and regret bounds")
    theory_args(sp)
    gamma = sp.add_mutually_exclusive_group()
    gamma.add_argument("--gamma", type=float, help="information gain; default: greedy estimate on a grid")
    gamma.add_argument("--gamma-from-trace", metavar="CSV", help="information gain of the points in a one-run trace CSV")
    sp.add_argument("--length-scale", type=float, default=0.1)
    sp.add_argument("--signal-var", type=float, default=1.0)
    sp.add_argument("--grid", type=int, default=512, help="grid points per axis for the greedy estimate")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("rhohat", help="Pearson correlation of paired samples")
    sp.add_argument("pairs", help="CSV with two numeric columns (optional header)")
    sp.set_defaults(func=cmd_rhohat)

    sp = sub.add_parser("arms", help="arm table utilities")
    arms_sub = sp.add_subparsers(dest="arms_command", required=True)
    near = arms_sub.add_parser("near", help="nearest arms to a point")
    near.add_argument("--table", default="bundled")
    near.add_argument("--x", required=True, help="comma-separated point in the rescaled space")
    near.add_argument("--k", type=int, default=6)
    near.set_defaults(func=cmd_arms_near)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, NumericalError, OracleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
