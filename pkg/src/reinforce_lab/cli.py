"""Command-line entry point.

Subcommands wire the library together for batch use:

  simulate {errw|errw-ct|vrjp|xproc|z}   one trajectory, jumps to CSV/JSONL
  sample-density                          MCMC draws of a field measure
  constants                               phase constants for a dimension
  scan-decay                              decay diagnostic on a lattice box
  resistance-check                        resistance inequality diagnostic
  verify SUITE                            cross-module statistical suite

Every file-producing run writes a manifest (config + seed + versions) next to
its outputs; outputs are deterministic given the seed.  Exit codes: 0 success,
1 statistical rejection in verify, 2 usage or infrastructure error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np


def _parse_lattice(text):
    out = {}
    for part in text.split(","):
        k, _, v = part.partition("=")
        out[k.strip()] = v.strip()
    return {"lattice": {"d": int(out["d"]), "n": int(out["n"]),
                        "weight": float(out.get("weight", 1.0))}}


def _load_graph(args):
    from .graphs import graph_from_dict, load_graph_file

    if getattr(args, "graph", None):
        return load_graph_file(args.graph)
    if getattr(args, "lattice", None):
        return graph_from_dict(_parse_lattice(args.lattice))
    raise SystemExit2("need --graph FILE or --lattice d=..,n=..")


class SystemExit2(RuntimeError):
    """Usage/infrastructure error; mapped to exit code 2."""


def _versions():
    import scipy

    from . import __version__

    return {"reinforce_lab": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": ".".join(map(str, sys.version_info[:3]))}


def _write_manifest(out_path, command, config, seed):
    manifest = {"command": command, "config": config, "seed": seed,
                "versions": _versions()}
    with open(out_path + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _open_out(args, suffix):
    if args.out:
        return open(args.out + suffix, "w")
    return sys.stdout


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("REINFORCE_LAB_THREADS")
    return int(env) if env else 1


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path stem; omit to write to stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=None)


def _cmd_simulate(args):
    from . import processes

    g = _load_graph(args)
    if hasattr(g, "graph"):          # LatticeBox
        g = g.graph
    if hasattr(g, "base"):           # PinnedGraph: processes run on the base
        g = g.base
    U = None
    if args.process == "z":
        if not args.u:
            raise SystemExit2("simulate z needs --u v0,v1,...")
        U = np.array([float(x) for x in args.u.split(",")])
        if len(U) != g.n:
            raise SystemExit2(f"--u needs {g.n} values")
    kwargs = {}
    if args.process == "errw":
        if args.steps is None:
            raise SystemExit2("simulate errw needs --steps")
        kwargs["horizon"] = args.steps
    else:
        if args.horizon is None and args.steps is None:
            raise SystemExit2("need --horizon and/or --steps")
        kwargs["horizon"] = args.horizon
        kwargs["max_steps"] = args.steps
    checkpoints = [float(x) for x in args.checkpoints.split(",")] if args.checkpoints else ()
    traj = processes.run_until(args.process, g, weights=g.weights, U=U,
                               start=args.start, checkpoints=checkpoints,
                               seed=args.seed, **kwargs)
    config = {"process": args.process, "graph": args.graph, "lattice": args.lattice,
              "steps": args.steps, "horizon": args.horizon, "start": args.start,
              "checkpoints": args.checkpoints, "u": args.u, "format": args.format,
              "threads": _threads(args)}
    if args.format == "json":
        fh = _open_out(args, ".jsonl")
        processes.export_jsonl(traj, fh)
    else:
        fh = _open_out(args, ".csv")
        fh.write("t,from,to\n")
        for t, i, j in zip(traj.times, traj.frm, traj.to):
            fh.write(f"{t:.12g},{i},{j}\n")
    if fh is not sys.stdout:
        fh.close()
    if args.out and checkpoints:
        with open(args.out + ".checkpoints.csv", "w") as cfh:
            processes.export_checkpoint_csv(traj, cfh)
    if args.out:
        _write_manifest(args.out, "simulate", config, args.seed)
    return 0


def _cmd_sample_density(args):
    from . import measures, mcmc
    from .graphs import PinnedGraph

    g = _load_graph(args)
    if hasattr(g, "graph"):
        g = g.graph
    if isinstance(g, PinnedGraph):
        pinned = g
        target = lambda t: measures.sigma_log_density(pinned, t)  # noqa: E731
        dim, zero_sum = pinned.base.n, False
    else:
        i0 = args.i0
        target = lambda u: measures.limit_log_density(g, u, i0, check_gauge=False)  # noqa: E731
        dim, zero_sum = g.n, True
    samples, diag = mcmc.adapt_and_sample(target, dim, args.n, zero_sum=zero_sum,
                                          thinning=args.thinning, seed=args.seed,
                                          burn_in=args.burn_in)
    fh = _open_out(args, ".csv")
    fh.write(",".join(f"u_{i}" for i in range(dim)) + "\n")
    for row in samples:
        fh.write(",".join(f"{v:.12g}" for v in row) + "\n")
    if fh is not sys.stdout:
        fh.close()
    if args.out:
        with open(args.out + ".diagnostics.json", "w") as dfh:
            json.dump(diag, dfh, indent=2, sort_keys=True)
            dfh.write("\n")
        config = {"graph": args.graph, "lattice": args.lattice, "n": args.n,
                  "i0": args.i0, "thinning": args.thinning, "burn_in": args.burn_in,
                  "format": args.format, "threads": _threads(args)}
        _write_manifest(args.out, "sample-density", config, args.seed)
    if diag["flagged"]:
        print("warning: MCMC diagnostics flagged (Rhat > 1.05)", file=sys.stderr)
    return 0


def _cmd_constants(args):
    from . import phase

    result = {"d": args.d}
    bc = phase.beta_c(args.d)
    result["beta_c"] = "inf" if np.isinf(bc) else bc
    try:
        result["a_c"] = phase.a_c(args.d)
    except phase.BracketError as exc:
        result["a_c"] = None
        result["a_c_note"] = str(exc)
    if args.beta is not None:
        result["i_beta"] = phase.i_beta(args.beta)
        result["bound_base"] = phase.phase_base_beta(args.beta, args.d)
    if args.a is not None:
        result["i_hat"] = phase.i_hat(args.a)
        result["j_hat"] = phase.j_hat(args.a)
        result["bound_base"] = phase.phase_base_a(args.a, args.d)
    fh = _open_out(args, ".json")
    json.dump(result, fh, indent=2, sort_keys=True)
    fh.write("\n")
    if fh is not sys.stdout:
        fh.close()
    if args.out:
        config = {"d": args.d, "beta": args.beta, "a": args.a,
                  "threads": _threads(args)}
        _write_manifest(args.out, "constants", config, args.seed)
    return 0


def _cmd_scan_decay(args):
    from . import phase

    rows = phase.decay_scan(args.d, args.n, beta=args.beta, a=args.a,
                            eta=args.eta, n_samples=args.samples, seed=args.seed)
    slope = phase.fitted_log_slope(rows)
    if args.format == "json":
        fh = _open_out(args, ".json")
        json.dump({"rows": rows, "log_slope": slope}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    else:
        fh = _open_out(args, ".csv")
        fh.write("distance,estimate,stderr,bound,flagged\n")
        for r in rows:
            fh.write(f"{r['distance']},{r['estimate']:.12g},{r['stderr']:.12g},"
                     f"{r['bound']:.12g},{int(r['flagged'])}\n")
    if fh is not sys.stdout:
        fh.close()
    if args.out:
        config = {"d": args.d, "n": args.n, "beta": args.beta, "a": args.a,
                  "eta": args.eta, "samples": args.samples, "format": args.format,
                  "threads": _threads(args)}
        _write_manifest(args.out, "scan-decay", config, args.seed)
    return 0


def _cmd_resistance_check(args):
    from . import phase

    report = phase.resistance_bound_check(args.d, args.n, args.beta,
                                          n_samples=args.samples, seed=args.seed)
    fh = _open_out(args, ".json")
    json.dump(report, fh, indent=2, sort_keys=True)
    fh.write("\n")
    if fh is not sys.stdout:
        fh.close()
    if args.out:
        config = {"d": args.d, "n": args.n, "beta": args.beta,
                  "samples": args.samples, "threads": _threads(args)}
        _write_manifest(args.out, "resistance-check", config, args.seed)
    return 0


def _cmd_verify(args):
    from . import suites

    config = json.loads(args.config) if args.config else {}
    report = suites.verify_suite(args.suite, config, seed=args.seed)
    fh = _open_out(args, ".json")
    json.dump(report, fh, indent=2, sort_keys=True)
    fh.write("\n")
    if fh is not sys.stdout:
        fh.close()
    if args.out:
        _write_manifest(args.out, "verify",
                        {"suite": args.suite, "config": config,
                         "threads": _threads(args)}, args.seed)
    if report.get("infrastructure_failure"):
        print(f"infrastructure failure: {report.get('error')}", file=sys.stderr)
        return 2
    return 0 if report["pass"] else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="reinforce-lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one trajectory")
    p.add_argument("process", choices=("errw", "errw-ct", "vrjp", "xproc", "z"))
    p.add_argument("--graph")
    p.add_argument("--lattice", help="shorthand d=D,n=N[,weight=W]")
    p.add_argument("--steps", type=int)
    p.add_argument("--horizon", type=float)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--checkpoints", help="comma-separated native times")
    p.add_argument("--u", help="comma-separated field values for z")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sample-density", help="MCMC draws of a field measure")
    p.add_argument("--graph")
    p.add_argument("--lattice")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--i0", type=int, default=0)
    p.add_argument("--thinning", type=int, default=None)
    p.add_argument("--burn-in", type=int, default=10_000)
    _add_common(p)
    p.set_defaults(func=_cmd_sample_density)

    p = sub.add_parser("constants", help="phase constants")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--beta", type=float)
    p.add_argument("--a", type=float)
    _add_common(p)
    p.set_defaults(func=_cmd_constants)

    p = sub.add_parser("scan-decay", help="decay diagnostic on a lattice box")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=2000)
    _add_common(p)
    p.set_defaults(func=_cmd_scan_decay)

    p = sub.add_parser("resistance-check", help="resistance inequality diagnostic")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--samples", type=int, default=200)
    _add_common(p)
    p.set_defaults(func=_cmd_resistance_check)

    p = sub.add_parser("verify", help="run a verification suite")
    from .suites import SUITE_NAMES
    p.add_argument("suite", choices=SUITE_NAMES)
    p.add_argument("--config", help="JSON object of suite overrides")
    _add_common(p)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
