"""Command-line front end: one subcommand per experiment.

Every run writes its main CSV to ``--out`` and a ``key=value`` sidecar to
``<out>.meta`` holding the resolved flags, the package version and the seed.
``brusselator replay <out>.meta`` re-runs a sidecar and reproduces the output
bit for bit. When ``--out`` is omitted, files land in ``$BRUSSELATOR_OUT_DIR``
(default: the working directory).

Exit codes: 0 success, 2 invalid flags, 3 numerical blow-up.
"""

import argparse
import csv
import os
import shlex
import sys

import numpy as np

from . import __version__
from .ftle import auto_horizon, default_window, ftle_field, ftle_series, prerun_frequency
from .integrator import BlowUpError, integrate, two_point
from .model import Params, hopf_threshold
from .noise import STREAM_VERSION, generate
from .slowfast import (
    RegimeThresholds,
    SfState,
    SlowFastParams,
    classify_regimes,
    critical_manifold_polyline,
    integrate_slowfast,
    nullcline_polyline,
)
from .ssa import JumpState, RateConstants, matching_metadata, simulate_jump

OUT_DIR_ENV = "BRUSSELATOR_OUT_DIR"
FLOAT_FMT = "%.17g"
EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- file output

def write_csv(path, header, columns):
    np.savetxt(path, np.column_stack(columns), fmt=FLOAT_FMT, delimiter=",",
               header=",".join(header), comments="")


def write_meta(path, items):
    with open(path, "w") as f:
        for key, value in items.items():
            f.write(f"{key}={value}\n")


def read_meta(path):
    items = {}
    with open(path) as f:
        for line in f:
            line = line.rstrip("\n")
            if line and not line.startswith("#"):
                key, _, value = line.partition("=")
                items[key] = value
    return items


def sibling(out, tag):
    """``run.csv`` -> ``run.<tag>.csv``, in the same directory as ``out``."""
    root, ext = os.path.splitext(out)
    return f"{root}.{tag}{ext or '.csv'}"


# ---------------------------------------------------------------- parsing

def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _nonnegative(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return value


def _count(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _horizon(text):
    return text if text == "auto" else str(_positive(text))


def _add_common(sp, sigma=True, time=True):
    sp.add_argument("--a", type=_positive, default=1.0, help="feed rate a (dimensionless, default 1)")
    if sigma:
        sp.add_argument("--sigma", type=_nonnegative, default=0.1,
                        help="noise intensity sigma (default 0.1; 0 gives the deterministic system)")
    if time:
        sp.add_argument("--h", type=_positive, default=1e-3, help="time step (time units, default 1e-3)")
        sp.add_argument("--t-end", type=_positive, default=150.0, help="final time (time units, default 150)")
    sp.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")
    sp.add_argument("--out", help=f"output CSV path (default ${OUT_DIR_ENV}/<command>.csv)")


def build_parser():
    parser = argparse.ArgumentParser(prog="brusselator", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="one Euler-Maruyama trajectory")
    _add_common(sp)
    sp.add_argument("--b", type=_positive, required=True, help="removal rate b (dimensionless)")
    sp.add_argument("--x0", type=_positive, default=1.0, help="initial x (concentration, default 1)")
    sp.add_argument("--y0", type=_nonnegative, default=1.0, help="initial y (concentration, default 1)")
    sp.add_argument("--stride", type=_count, default=1, help="write every stride-th step (default 1)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("two-point", help="two trajectories under one noise path")
    _add_common(sp)
    b = sp.add_mutually_exclusive_group(required=True)
    b.add_argument("--b", type=_positive, help="removal rate b (dimensionless)")
    b.add_argument("--preset", choices=("below", "above"),
                   help="b = b_crit - 1 (below) or b_crit + 1 (above), with b_crit = 1 + a^2")
    for name in ("x0", "y0", "x1", "y1"):
        kind = _positive if name.startswith("x") else _nonnegative
        sp.add_argument(f"--{name}", type=kind, required=True,
                        help=f"initial {name[0]} of trajectory {name[1]} (concentration)")
    sp.add_argument("--stride", type=_count, default=1, help="write every stride-th step (default 1)")
    sp.set_defaults(func=cmd_two_point)

    sp = sub.add_parser("ftle-field", help="FTLE landscape over a grid of initial conditions")
    _add_common(sp, time=False)
    sp.add_argument("--b", type=_positive, required=True, help="removal rate b (dimensionless)")
    sp.add_argument("--h", type=_positive, default=1e-3, help="time step (time units, default 1e-3)")
    sp.add_argument("--T", type=_horizon, default="auto",
                    help="horizon (time units) or 'auto' for 1/(2 omega) from a deterministic pre-run")
    sp.add_argument("--prerun", type=_positive, default=200.0,
                    help="pre-run duration for --T auto (time units, default 200)")
    sp.add_argument("--nx", type=_count, default=100, help="cells along x (default 100)")
    sp.add_argument("--ny", type=_count, default=100, help="cells along y (default 100)")
    for name, help_ in (("x-min", "x"), ("x-max", "x"), ("y-min", "y"), ("y-max", "y")):
        sp.add_argument(f"--{name}", type=float, help=f"grid bound in {help_} (default: 0.05a to 4a / 6a)")
    sp.add_argument("--threads", type=_count, default=1, help="worker threads (default 1)")
    sp.set_defaults(func=cmd_ftle_field)

    sp = sub.add_parser("ftle-series", help="FTLE as a function of the horizon T")
    _add_common(sp, time=False)
    sp.add_argument("--b", type=_positive, required=True, help="removal rate b (dimensionless)")
    sp.add_argument("--h", type=_positive, default=1e-3, help="time step (time units, default 1e-3)")
    sp.add_argument("--x0", type=_positive, default=1.0, help="initial x (concentration, default 1)")
    sp.add_argument("--y0", type=_nonnegative, default=1.0, help="initial y (concentration, default 1)")
    sp.add_argument("--T-max", type=_positive, default=150.0, help="largest horizon (time units, default 150)")
    sp.add_argument("--dT", type=_positive, default=0.5, help="horizon spacing (time units, default 0.5)")
    sp.set_defaults(func=cmd_ftle_series)

    sp = sub.add_parser("period", help="dominant frequency of the deterministic oscillation")
    _add_common(sp, sigma=False, time=False)
    sp.add_argument("--b", type=_positive, required=True, help="removal rate b (dimensionless)")
    sp.add_argument("--h", type=_positive, default=1e-3, help="time step (time units, default 1e-3)")
    sp.add_argument("--duration", type=_positive, default=200.0, help="run length (time units, default 200)")
    sp.set_defaults(func=cmd_period)

    sp = sub.add_parser("slowfast", help="slow-fast trajectory with regime labels")
    _add_common(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--b", type=_positive, help="removal rate b; sets epsilon = a/b")
    g.add_argument("--epsilon", type=_positive, help="time-scale ratio epsilon; sets b = a/epsilon")
    sp.add_argument("--u0", type=_nonnegative, default=1.0, help="initial u = y (default 1)")
    sp.add_argument("--v0", type=_positive, default=2.0, help="initial v = x + y (default 2)")
    sp.add_argument("--system", choices=("slow", "fast"), default="slow",
                    help="integrate in slow time or in fast time tau = t/epsilon (default slow)")
    sp.add_argument("--delta-s", type=_positive, default=0.1, help="critical-manifold band width (default 0.1)")
    sp.add_argument("--delta-n", type=_positive, default=0.1, help="nullcline band width (default 0.1)")
    sp.add_argument("--fast-cutoff", type=_positive, default=1.0,
                    help="|du/dt| above which a point counts as a fast jump (default 1)")
    sp.add_argument("--stride", type=_count, default=1, help="write every stride-th step (default 1)")
    sp.add_argument("--geometry", action="store_true",
                    help="also write the nullcline and critical-manifold polylines")
    sp.set_defaults(func=cmd_slowfast)

    sp = sub.add_parser("ssa", help="Gillespie simulation of the reaction network")
    _add_common(sp, sigma=False, time=False)
    sp.add_argument("--t-end", type=_positive, default=150.0, help="final time (time units, default 150)")
    sp.add_argument("--b", type=_positive, help="rate-equation b used to derive B = round(bV)")
    sp.add_argument("--V", type=_positive, default=1000.0, help="system volume (default 1000)")
    sp.add_argument("--A", type=_count, help="count of A (default round(aV))")
    sp.add_argument("--B", type=_count, help="count of B (default round(bV))")
    for k in range(1, 5):
        sp.add_argument(f"--gamma{k}", type=_positive, default=1.0, help=f"rate constant of R{k} (default 1)")
    sp.add_argument("--X0", type=int, help="initial X count (default round(x0 V))")
    sp.add_argument("--Y0", type=int, help="initial Y count (default round(y0 V))")
    sp.add_argument("--x0", type=_nonnegative, default=1.0, help="initial X/V if --X0 is absent (default 1)")
    sp.add_argument("--y0", type=_nonnegative, default=1.0, help="initial Y/V if --Y0 is absent (default 1)")
    sp.add_argument("--grid", type=_positive, help="also write the path resampled on this time spacing")
    sp.set_defaults(func=cmd_ssa)

    sp = sub.add_parser("replay", help="re-run the command recorded in a .meta sidecar")
    sp.add_argument("meta", help="path to a .meta file")
    sp.add_argument("--out", help="write to this path instead of the recorded one")
    sp.set_defaults(func=cmd_replay)
    return parser


# ---------------------------------------------------------------- helpers

def _resolve_out(args):
    out = args.out or os.path.join(os.environ.get(OUT_DIR_ENV, "."), f"{args.command}.csv")
    parent = os.path.dirname(out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return out


def _canonical_argv(args):
    """Flags that reproduce ``args`` exactly (floats via ``repr``)."""
    argv = [args.command]
    for dest, value in sorted(vars(args).items()):
        if dest in ("func", "command", "out") or value is None or value is False:
            continue
        flag = "--" + dest.replace("_", "-")
        if value is True:
            argv.append(flag)
        else:
            argv += [flag, repr(value) if isinstance(value, float) else str(value)]
    return argv


def _finish(parser, args, out, extra=None):
    meta = {
        "command": args.command,
        "version": __version__,
        "stream_version": STREAM_VERSION,
        "seed": args.seed,
        "out": out,
    }
    for key, value in sorted(vars(args).items()):
        if key not in ("func", "command", "seed", "out"):
            meta[f"arg.{key}"] = value
    meta.update(extra or {})
    meta["argv"] = shlex.join(_canonical_argv(args))
    write_meta(out + ".meta", meta)
    return EXIT_OK


def _params(args, b):
    return Params(args.a, b, getattr(args, "sigma", 0.0))


# ---------------------------------------------------------------- commands

def cmd_simulate(parser, args):
    p = _params(args, args.b)
    out = _resolve_out(args)
    n = int(round(args.t_end / args.h))
    traj = integrate(p, (args.x0, args.y0), generate(args.seed, args.h, n), n * args.h, args.stride)
    write_csv(out, ["t", "x", "y"], [traj.times, traj.x, traj.y])
    return _finish(parser, args, out, {"clamp_count": traj.clamp_count})


def cmd_two_point(parser, args):
    if args.preset:
        b = hopf_threshold(args.a) + (1.0 if args.preset == "above" else -1.0)
        if not b > 0:
            raise UsageError(f"preset gives b = {b}, which is not positive")
    else:
        b = args.b
    p = _params(args, b)
    out = _resolve_out(args)
    n = int(round(args.t_end / args.h))
    path = generate(args.seed, args.h, n)
    t0, t1, d = two_point(p, (args.x0, args.y0), (args.x1, args.y1), path, n * args.h, args.stride)
    write_csv(out, ["t", "x0", "y0", "x1", "y1", "d"], [d.times, t0.x, t0.y, t1.x, t1.y, d.d])
    return _finish(parser, args, out, {"b_resolved": repr(b)})


def cmd_ftle_field(parser, args):
    p = _params(args, args.b)
    (x_lo, x_hi), (y_lo, y_hi) = default_window(p)
    x_range = (x_lo if args.x_min is None else args.x_min, x_hi if args.x_max is None else args.x_max)
    y_range = (y_lo if args.y_min is None else args.y_min, y_hi if args.y_max is None else args.y_max)
    if not (0 < x_range[0] < x_range[1] and 0 <= y_range[0] < y_range[1]):
        raise UsageError(f"invalid grid window {x_range} x {y_range}")
    T = auto_horizon(p, args.prerun, args.h) if args.T == "auto" else float(args.T)
    out = _resolve_out(args)
    path = generate(args.seed, args.h, int(round(T / args.h)))
    field = ftle_field(p, x_range, y_range, args.nx, args.ny, path, T, workers=args.threads)
    X, Y = np.meshgrid(field.xs, field.ys, indexing="ij")
    write_csv(out, ["x", "y", "ftle"], [X.ravel(), Y.ravel(), field.values.ravel()])
    return _finish(parser, args, out, {
        "T_resolved": repr(T),
        "x_range": f"{x_range[0]!r},{x_range[1]!r}",
        "y_range": f"{y_range[0]!r},{y_range[1]!r}",
        "positive_fraction": repr(field.positive_fraction()),
    })


def cmd_ftle_series(parser, args):
    p = _params(args, args.b)
    n_T = int(round(args.T_max / args.dT))
    T_values = args.dT * np.arange(1, n_T + 1)
    out = _resolve_out(args)
    path = generate(args.seed, args.h, int(round(T_values[-1] / args.h)))
    series = ftle_series(p, (args.x0, args.y0), path, T_values)
    write_csv(out, ["T", "ftle"], [[t for t, _ in series], [v for _, v in series]])
    return _finish(parser, args, out)


def cmd_period(parser, args):
    p = Params(args.a, args.b)
    omega = prerun_frequency(p, args.duration, args.h)
    out = _resolve_out(args)
    line = f"omega={omega!r} period={1 / omega!r} T_half={0.5 / omega!r}"
    with open(out, "w") as f:
        f.write(line + "\n")
    print(line)
    return _finish(parser, args, out)


def cmd_slowfast(parser, args):
    if args.b is not None:
        sp = SlowFastParams.from_params(Params(args.a, args.b, args.sigma))
    else:
        sp = SlowFastParams(args.a, args.epsilon, args.sigma)
    if args.v0 < args.u0:
        raise UsageError("need v0 >= u0 (x = v - u must be nonnegative)")
    out = _resolve_out(args)
    n = int(round(args.t_end / args.h))
    path = generate(args.seed, args.h, n)
    traj = integrate_slowfast(sp, SfState(args.u0, args.v0), path, n * args.h,
                              system=args.system, stride=args.stride)
    u, v = traj.states[:, 0], traj.states[:, 1]
    th = RegimeThresholds(args.delta_s, args.delta_n, args.fast_cutoff)
    labels = classify_regimes(sp, u, v, th)
    with open(out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t", "u", "v", "regime"])
        for row in zip(traj.times, u, v, labels):
            w.writerow([FLOAT_FMT % row[0], FLOAT_FMT % row[1], FLOAT_FMT % row[2], row[3]])
    extra = {"epsilon_resolved": repr(sp.epsilon), "b_resolved": repr(sp.b)}
    if args.geometry:
        u_range = (float(np.min(u)), float(np.max(u)))
        nu, nv = nullcline_polyline(sp, u_range)
        cu, cv = critical_manifold_polyline(u_range)
        write_csv(sibling(out, "nullcline"), ["u", "v"], [nu, nv])
        write_csv(sibling(out, "critical"), ["u", "v"], [cu, cv])
        extra["geometry"] = f"{sibling(out, 'nullcline')},{sibling(out, 'critical')}"
    return _finish(parser, args, out, extra)


def cmd_ssa(parser, args):
    V = args.V
    if args.B is None and args.b is None:
        raise UsageError("give --b or --B")
    A = args.A if args.A is not None else int(round(args.a * V))
    B = args.B if args.B is not None else int(round(args.b * V))
    X0 = args.X0 if args.X0 is not None else int(round(args.x0 * V))
    Y0 = args.Y0 if args.Y0 is not None else int(round(args.y0 * V))
    if min(A, B) < 1 or min(X0, Y0) < 0:
        raise UsageError("counts A, B must be >= 1 and X0, Y0 >= 0")
    rc = RateConstants(A, B, V, args.gamma1, args.gamma2, args.gamma3, args.gamma4)
    out = _resolve_out(args)
    path = simulate_jump(rc, JumpState(X0, Y0), args.t_end, args.seed)
    with open(out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t", "reaction", "X", "Y", "D", "E"])
        for t, k, z in zip(path.times, path.reactions, path.states):
            w.writerow([FLOAT_FMT % t, int(k), *map(int, z)])
    extra = {"A": A, "B": B, "X0": X0, "Y0": Y0, "events": len(path) - 1}
    extra.update(matching_metadata(rc))
    if args.grid:
        grid, states = path.resample(args.grid)
        write_csv(sibling(out, "grid"), ["t", "x", "y"], [grid, states[:, 0] / V, states[:, 1] / V])
    return _finish(parser, args, out, extra)


def cmd_replay(parser, args):
    meta = read_meta(args.meta)
    argv = shlex.split(meta["argv"]) + ["--out", args.out or meta["out"]]
    return main(argv)


# ---------------------------------------------------------------- entry point

def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(parser, args)
    except BlowUpError as exc:
        print(f"brusselator: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, ValueError) as exc:
        print(f"brusselator {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
