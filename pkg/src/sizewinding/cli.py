"""Command-line interface.

Subcommands: solve-v, dist, ed, teleport, fig.  Exit codes: 0 success,
2 usage or domain error, 3 numerical failure.  A key=value config file can
seed any flags (flags given on the command line win), and the default worker
count comes from SIZEWINDING_THREADS.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import serialize
from .dist import finite_n_distribution, large_n_distribution, size_support
from .ed import SykParams, run_ensemble
from .errors import NumericalError
from .largeq import LargeQParams, solve_velocity
from .teleport import (TeleportResult, scan_coupling, teleport_exact,
                       teleport_from_q)

_ED_T_DEFAULT = "0.5,3,6,9,12"


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SIZEWINDING_THREADS", "1")))
    except ValueError:
        return 1


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ValueError(f"bad number list {text!r}") from exc


def _parse_grid(text: str) -> np.ndarray:
    """lo:hi:count grid specification."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid spec must be lo:hi:count, got {text!r}")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 2 or hi <= lo:
        raise ValueError(f"bad grid spec {text!r}")
    return np.linspace(lo, hi, count)


def _load_config_args(argv: list[str]) -> list[str]:
    """Expand --config FILE into leading flags so explicit flags override."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise ValueError("--config needs a file argument")
    path = argv[idx + 1]
    rest = argv[:idx] + argv[idx + 2:]
    injected: list[str] = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line without '=': {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                injected.append(flag)
        else:
            injected.extend([flag, value])
    # keep the subcommand first
    if rest and not rest[0].startswith("-"):
        return [rest[0]] + injected + rest[1:]
    return injected + rest


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sizewinding",
        description="Size and winding-size distributions for the large-q "
                    "SYK model, ED oracle, and teleportation correlators.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_v = sub.add_parser("solve-v", help="solve the thermal velocity equation")
    p_v.add_argument("--beta-j", type=float, required=True)
    p_v.add_argument("--beta", type=float, default=2 * math.pi)
    p_v.add_argument("--prefactor-c", type=float, default=1.0)

    p_d = sub.add_parser("dist", help="emit a size/winding distribution table")
    p_d.add_argument("--mode", choices=("largeN", "finiteN"), required=True)
    p_d.add_argument("--delta", type=float, default=0.25)
    p_d.add_argument("--v", type=float, default=0.6)
    p_d.add_argument("--beta", type=float, default=2 * math.pi)
    p_d.add_argument("--lambda0", type=float, default=None,
                     help="largeN propagator strength")
    p_d.add_argument("--t", type=float, default=None, help="finiteN time")
    p_d.add_argument("--n", type=int, default=18, help="finiteN Majorana count")
    p_d.add_argument("--prefactor-c", type=float, default=1.0,
                     help="scramblon prefactor C in lambda0 = e^{kappa t}/C")
    p_d.add_argument("--grid", type=int, default=2001)
    p_d.add_argument("--out", required=True)
    p_d.add_argument("--format", choices=("csv", "json"), default="csv")

    p_e = sub.add_parser("ed", help="exact-diagonalization disorder ensemble")
    p_e.add_argument("--n", type=int, default=18)
    p_e.add_argument("--q", type=int, default=4)
    p_e.add_argument("--beta", type=float, default=2 * math.pi)
    p_e.add_argument("--script-j", type=float, default=3.206758 / (2 * math.pi))
    p_e.add_argument("--t-list", type=str, default=_ED_T_DEFAULT)
    p_e.add_argument("--realizations", type=int, default=100)
    p_e.add_argument("--seed", type=int, default=0)
    p_e.add_argument("--threads", type=int, default=None)
    p_e.add_argument("--k-probe", type=int, default=1)
    p_e.add_argument("--average-k", action="store_true")
    p_e.add_argument("--out", required=True,
                     help="base path; writes <out>.json and <out>.csv")

    p_t = sub.add_parser("teleport", help="two-sided teleportation correlator")
    src = p_t.add_mutually_exclusive_group(required=True)
    src.add_argument("--from-ed", type=str, default=None,
                     help="ensemble JSON produced by the ed subcommand")
    src.add_argument("--exact", action="store_true",
                     help="exact doubled-space evaluation at small N")
    p_t.add_argument("--n", type=int, default=8, help="exact-mode system size")
    p_t.add_argument("--q", type=int, default=4)
    p_t.add_argument("--beta", type=float, default=2 * math.pi)
    p_t.add_argument("--script-j", type=float, default=3.206758 / (2 * math.pi))
    p_t.add_argument("--t", type=float, default=None,
                     help="time (exact mode; from-ed uses the file's times)")
    p_t.add_argument("--g", type=float, default=None)
    p_t.add_argument("--g-grid", type=str, default=None,
                     help="lo:hi:count coupling scan")
    p_t.add_argument("--k", type=int, default=1)
    p_t.add_argument("--seed", type=int, default=0)
    p_t.add_argument("--out", required=True)
    p_t.add_argument("--format", choices=("csv", "json"), default="csv")

    p_f = sub.add_parser("fig", help="regenerate a figure's data file")
    p_f.add_argument("--which", type=int, choices=(3, 4, 5), required=True)
    p_f.add_argument("--out-dir", type=str, default=".")
    p_f.add_argument("--realizations", type=int, default=100,
                     help="ensemble size for the fig5 data file")
    p_f.add_argument("--threads", type=int, default=None)
    p_f.add_argument("--seed", type=int, default=0)

    return parser


def _cmd_solve_v(args) -> int:
    v = solve_velocity(args.beta_j)
    params = LargeQParams(delta=0.25, v=v, beta=args.beta,
                          prefactor_c=args.prefactor_c)
    print(f"v = {v!r}")
    print(f"kappa = {params.kappa!r}")
    print(f"t_sc = {params.scrambling_time()!r}")
    return 0


def _cmd_dist(args) -> int:
    params = LargeQParams(delta=args.delta, v=args.v, beta=args.beta,
                          prefactor_c=args.prefactor_c)
    if args.mode == "largeN":
        if args.lambda0 is None:
            raise ValueError("largeN mode requires --lambda0")
        if args.t is not None:
            raise ValueError("largeN mode takes --lambda0, not --t")
        dist = large_n_distribution(args.lambda0, params, points=args.grid)
    else:
        if args.t is None:
            raise ValueError("finiteN mode requires --t")
        if args.lambda0 is not None:
            raise ValueError("finiteN mode takes --t, not --lambda0")
        dist = finite_n_distribution(args.t, params, args.n, points=args.grid)
    writer = (serialize.distribution_csv if args.format == "csv"
              else serialize.distribution_json)
    writer(dist, args.out)
    s_min, _ = size_support(params)
    print(f"wrote {args.out} (mode {args.mode}, support starts at "
          f"s_min = {s_min:.6f})")
    return 0


def _resolved_ed_params(args) -> SykParams:
    return SykParams(n_majorana=args.n, q=args.q, script_j=args.script_j,
                     beta=args.beta, base_seed=args.seed)


def _cmd_ed(args) -> int:
    params = _resolved_ed_params(args)
    t_list = _parse_float_list(args.t_list)
    threads = args.threads if args.threads is not None else _default_threads()
    start = time.perf_counter()
    result = run_ensemble(params, t_list, args.realizations,
                          k_probe=args.k_probe, average_k=args.average_k,
                          n_jobs=threads)
    elapsed = time.perf_counter() - start
    config = {
        "n": args.n, "q": args.q, "beta": args.beta,
        "script_j": args.script_j, "t_list": t_list,
        "realizations": args.realizations, "seed": args.seed,
        "k_probe": args.k_probe, "average_k": bool(args.average_k),
    }
    base = args.out
    serialize.ensemble_json(result, f"{base}.json", config=config)
    serialize.ensemble_csv(result, f"{base}.csv", config=config)
    print(f"wrote {base}.json and {base}.csv "
          f"({args.realizations} realizations in {elapsed:.1f}s)")
    return 0


def _teleport_gs(args) -> np.ndarray:
    if args.g_grid is not None:
        return _parse_grid(args.g_grid)
    if args.g is not None:
        return np.array([args.g], dtype=float)
    raise ValueError("teleport needs --g or --g-grid")


def _cmd_teleport(args) -> int:
    gs = _teleport_gs(args)
    results: list[TeleportResult] = []
    if args.from_ed is not None:
        doc = serialize.load_ensemble_json(args.from_ed)
        v_exp = float(doc["mean_v_expectation"])
        dists = serialize.mean_distributions_from_doc(doc)
        if args.t is not None:
            dists = [d for d in dists if abs(d.t - args.t) < 1e-12]
            if not dists:
                raise ValueError(f"t = {args.t} not present in {args.from_ed}")
        for d in dists:
            scan, g_peak = scan_coupling(d, gs, v_exp)
            results.extend(scan)
            print(f"t = {d.t}: peak |F| at g = {g_peak!r} "
                  f"(<V> = {v_exp!r})")
    else:
        if args.t is None:
            raise ValueError("exact mode requires --t")
        params = SykParams(n_majorana=args.n, q=args.q,
                           script_j=args.script_j, beta=args.beta,
                           base_seed=args.seed)
        for g in gs:
            results.append(teleport_exact(params, args.t, float(g), k=args.k))
        best = max(results, key=lambda r: abs(r.f_value))
        print(f"t = {args.t}: peak |F| at g = {best.g!r} "
              f"(<V> = {best.v_expectation!r})")
    config = {"from_ed": args.from_ed, "exact": bool(args.exact),
              "n": args.n, "beta": args.beta, "t": args.t, "k": args.k,
              "seed": args.seed}
    if args.format == "csv":
        serialize.teleport_csv(results, args.out, config=config)
    else:
        serialize.teleport_json(results, args.out, config=config)
    print(f"wrote {args.out}")
    return 0


def _cmd_fig(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.which == 3:
        params = LargeQParams(delta=0.25, v=0.6, beta=2 * math.pi,
                              prefactor_c=1.0)
        path = out_dir / "fig3.csv"
        lines = ["lambda0," + serialize.DIST_CSV_COLUMNS]
        for lam0 in (0.01, 1.0, 100.0):
            dist = large_n_distribution(lam0, params)
            for i, s in enumerate(dist.s_grid):
                qv = dist.q[i]
                row = (lam0, float(s), float(dist.p[i]), float(qv.real),
                       float(qv.imag), float(abs(qv)), float(np.angle(qv)))
                lines.append(",".join(repr(x) for x in row))
        path.write_text("\n".join(lines) + "\n")
    elif args.which == 4:
        params = LargeQParams(delta=0.25, v=0.6, beta=2 * math.pi,
                              prefactor_c=1.0)
        path = out_dir / "fig4.csv"
        lines = ["t," + serialize.DIST_CSV_COLUMNS]
        for t in (3.0, 6.0, 9.0, 12.0):
            dist = finite_n_distribution(t, params, 18)
            for i, s in enumerate(dist.s_grid):
                qv = dist.q[i]
                row = (t, float(s), float(dist.p[i]), float(qv.real),
                       float(qv.imag), float(abs(qv)), float(np.angle(qv)))
                lines.append(",".join(repr(x) for x in row))
        path.write_text("\n".join(lines) + "\n")
    else:
        params = SykParams(n_majorana=18, q=4,
                           script_j=3.206758 / (2 * math.pi),
                           beta=2 * math.pi, base_seed=args.seed)
        threads = args.threads if args.threads is not None else _default_threads()
        result = run_ensemble(params, (0.5, 3.0, 6.0, 9.0, 12.0),
                              args.realizations, n_jobs=threads)
        serialize.ensemble_csv(result, out_dir / "fig5.csv")
        path = out_dir / "fig5.csv"
    print(f"wrote {path}")
    return 0


_DISPATCH = {
    "solve-v": _cmd_solve_v,
    "dist": _cmd_dist,
    "ed": _cmd_ed,
    "teleport": _cmd_teleport,
    "fig": _cmd_fig,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _load_config_args(argv)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _DISPATCH[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
