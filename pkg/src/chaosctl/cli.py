"""Command-line front end.

Subcommands produce either a single `name,value` line on stdout (threshold,
explog, minnoise) or CSV data (simulate, bifurcation, limitset, montecarlo,
repro).  CSV goes to stdout unless --out is given, in which case the file is
written atomically (temp file + rename).  Status and error messages go to
stderr only.

Every CSV starts with `#`-prefixed comments; the `# args:` line holds the
canonical flag set, so re-running the printed flags reproduces the file
byte-for-byte.  The default seed is 0 (never time-based); the CHAOSCTL_SEED
environment variable overrides it and an explicit --seed flag wins over both.

Exit status: 0 success, 1 domain/analysis errors, 2 usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

from .control import Constant, ControlChannel, InvalidControl, NoiseDist, Stochastic
from .linalg2 import NormKind
from .maps import Branch, DomainError, MapKind, MapParams, Point2
from .presets import PRESETS
from .sim import (
    PointSet,
    SimConfig,
    bifurcation_sweep,
    default_init_grid,
    limit_set,
    mc_convergence,
    run_trajectory,
)
from .stability import (
    NoWindow,
    Unstabilizable,
    expected_log_nu,
    build_nu_model,
    local_threshold,
    min_noise_for_stability,
    norm_threshold,
)
from . import verify as verify_mod

_NORMS = {"linf": NormKind.LINF, "l1": NormKind.L1, "spectral": NormKind.L2SPECTRAL}
_DISTS = {"bernoulli": NoiseDist.BERNOULLI_PM1, "uniform": NoiseDist.UNIFORM_M1P1}


def _fmt(v: float) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(v))


def _env_seed() -> int:
    raw = os.environ.get("CHAOSCTL_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        print(f"chaosctl: CHAOSCTL_SEED must be an integer, got {raw!r}", file=sys.stderr)
        raise SystemExit(2) from None


def _alpha_range(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, n = text.split(":")
        return float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"--alpha-range wants lo:hi:n, got {text!r}"
        ) from None


def _add_map_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", choices=["henon", "lozi"], required=True)
    p.add_argument("--a", type=float, default=1.4)
    p.add_argument("--b", type=float, default=0.3)
    p.add_argument("--branch", choices=["plus", "minus"], default="plus")


def _add_schedule_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha1", "--alpha", dest="alpha1", type=float, default=0.0)
    p.add_argument("--ell1", type=float, default=0.0)
    p.add_argument("--dist1", choices=list(_DISTS), default="bernoulli")
    p.add_argument("--alpha2", "--beta", dest="alpha2", type=float, default=0.0)
    p.add_argument("--ell2", type=float, default=0.0)
    p.add_argument("--dist2", choices=list(_DISTS), default="bernoulli")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="chaosctl",
        description="Target-oriented control experiments on the Henon and Lozi maps",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one controlled trajectory as CSV n,x,y,d1,d2")
    _add_map_flags(p)
    _add_schedule_flags(p)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--steps", type=int, default=2000)
    _add_common_flags(p)

    p = sub.add_parser("bifurcation", help="tail states vs control intensity as CSV alpha,x")
    _add_map_flags(p)
    p.add_argument("--alpha-range", type=_alpha_range, required=True, metavar="LO:HI:N")
    p.add_argument("--ell1", type=float, default=0.0)
    p.add_argument("--dist1", choices=list(_DISTS), default="bernoulli")
    p.add_argument("--alpha2", "--beta", dest="alpha2", type=float, default=0.0)
    p.add_argument("--ell2", type=float, default=0.0)
    p.add_argument("--dist2", choices=list(_DISTS), default="bernoulli")
    p.add_argument("--inits", type=int, default=20, help="size of the initial-state grid")
    p.add_argument("--steps", type=int, default=700)
    _add_common_flags(p)

    p = sub.add_parser("limitset", help="post-transient tail points as CSV x,y")
    _add_map_flags(p)
    _add_schedule_flags(p)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--steps", type=int, default=700)
    _add_common_flags(p)

    p = sub.add_parser("threshold", help="critical control intensity alpha*")
    _add_map_flags(p)
    p.add_argument("--alpha2", "--beta", dest="alpha2", type=float, default=0.0)
    p.add_argument("--norm", choices=list(_NORMS), default=None,
                   help="norm-bound threshold instead of the local one")
    p.add_argument("--radius", type=float, default=0.0)
    _add_common_flags(p)

    p = sub.add_parser("explog", help="expected log of the contraction factor")
    _add_map_flags(p)
    _add_schedule_flags(p)
    p.add_argument("--norm", choices=["linf", "l1"], required=True)
    p.add_argument("--radius", type=float, default=0.0)
    p.add_argument("--method", choices=["closed-form", "quadrature", "monte-carlo"],
                   default="closed-form")
    _add_common_flags(p)

    p = sub.add_parser("minnoise", help="smallest stabilizing ell1")
    _add_map_flags(p)
    p.add_argument("--alpha1", "--alpha", dest="alpha1", type=float, required=True)
    p.add_argument("--dist1", choices=list(_DISTS), default="bernoulli")
    p.add_argument("--alpha2", "--beta", dest="alpha2", type=float, default=0.0)
    p.add_argument("--ell2", type=float, default=0.0)
    p.add_argument("--dist2", choices=list(_DISTS), default="bernoulli")
    p.add_argument("--norm", choices=["linf", "l1"], required=True)
    p.add_argument("--radius", type=float, default=0.0)
    _add_common_flags(p)

    p = sub.add_parser("montecarlo", help="convergence probability over repeated trials")
    _add_map_flags(p)
    _add_schedule_flags(p)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--trials", type=int, required=True)
    _add_common_flags(p)

    p = sub.add_parser("repro", help="replay a named experiment preset")
    p.add_argument("preset", choices=sorted(PRESETS))
    _add_common_flags(p)

    p = sub.add_parser("verify", help="run the acceptance table; exit 0 iff all rows pass")
    _add_common_flags(p)

    return ap


def _params(args) -> MapParams:
    return MapParams(MapKind(args.map), args.a, args.b)


def _branch(args) -> Branch:
    return Branch(args.branch)


def _schedule(args):
    if args.ell1 == 0.0 and args.ell2 == 0.0:
        return Constant(args.alpha1, args.alpha2)
    return Stochastic(
        ControlChannel(args.alpha1, args.ell1, _DISTS[args.dist1]),
        ControlChannel(args.alpha2, args.ell2, _DISTS[args.dist2]),
    )


def _seed(args) -> int:
    return args.seed if args.seed is not None else _env_seed()


def _args_line(command: str, pairs: list[tuple[str, str]]) -> str:
    return "# args: " + command + " " + " ".join(f"--{k} {v}" for k, v in pairs)


def _schedule_pairs(args) -> list[tuple[str, str]]:
    return [
        ("alpha1", _fmt(args.alpha1)),
        ("ell1", _fmt(args.ell1)),
        ("dist1", args.dist1),
        ("alpha2", _fmt(args.alpha2)),
        ("ell2", _fmt(args.ell2)),
        ("dist2", args.dist2),
    ]


def _map_pairs(args) -> list[tuple[str, str]]:
    return [
        ("map", args.map),
        ("a", _fmt(args.a)),
        ("b", _fmt(args.b)),
        ("branch", args.branch),
    ]


def _cmd_simulate(args) -> str:
    seed = _seed(args)
    cfg = SimConfig(initial=Point2(args.x0, args.y0), steps=args.steps, seed=seed)
    traj = run_trajectory(_params(args), _branch(args), _schedule(args), cfg)
    pairs = (
        _map_pairs(args)
        + _schedule_pairs(args)
        + [
            ("x0", _fmt(args.x0)),
            ("y0", _fmt(args.y0)),
            ("steps", str(args.steps)),
            ("seed", str(seed)),
        ]
    )
    lines = [
        _args_line("simulate", pairs),
        f"# outcome: {traj.outcome}",
        "n,x,y,d1,d2",
        f"0,{_fmt(traj.points[0].x)},{_fmt(traj.points[0].y)},,",
    ]
    for n, (p, (d1, d2)) in enumerate(zip(traj.points[1:], traj.controls), start=1):
        lines.append(f"{n},{_fmt(p.x)},{_fmt(p.y)},{_fmt(d1)},{_fmt(d2)}")
    return "\n".join(lines) + "\n"


def _cmd_bifurcation(args) -> str:
    seed = _seed(args)
    lo, hi, n_alpha = args.alpha_range
    cfg = SimConfig(initial=Point2(0.1, 0.1), steps=args.steps, seed=seed)
    res = bifurcation_sweep(
        _params(args),
        _branch(args),
        ControlChannel(args.alpha2, args.ell2, _DISTS[args.dist2]),
        lo,
        hi,
        n_alpha,
        default_init_grid(args.inits),
        cfg,
        ell1=args.ell1,
        dist1=_DISTS[args.dist1],
        threads=args.threads,
    )
    pairs = _map_pairs(args) + [
        ("alpha-range", f"{_fmt(lo)}:{_fmt(hi)}:{n_alpha}"),
        ("ell1", _fmt(args.ell1)),
        ("dist1", args.dist1),
        ("alpha2", _fmt(args.alpha2)),
        ("ell2", _fmt(args.ell2)),
        ("dist2", args.dist2),
        ("inits", str(args.inits)),
        ("steps", str(args.steps)),
        ("seed", str(seed)),
    ]
    lines = [
        _args_line("bifurcation", pairs),
        f"# escaped_cells: {res.escaped_cells}",
        "alpha,x",
    ]
    lines.extend(f"{_fmt(alpha)},{_fmt(x)}" for alpha, x in res.points)
    return "\n".join(lines) + "\n"


def _cmd_limitset(args) -> str:
    seed = _seed(args)
    cfg = SimConfig(initial=Point2(args.x0, args.y0), steps=args.steps, seed=seed)
    pts = limit_set(
        _params(args),
        _branch(args),
        _schedule(args),
        [Point2(args.x0, args.y0)],
        cfg,
        threads=args.threads,
    )
    pairs = (
        _map_pairs(args)
        + _schedule_pairs(args)
        + [
            ("x0", _fmt(args.x0)),
            ("y0", _fmt(args.y0)),
            ("steps", str(args.steps)),
            ("seed", str(seed)),
        ]
    )
    lines = [_args_line("limitset", pairs), "x,y"]
    lines.extend(f"{_fmt(p.x)},{_fmt(p.y)}" for p in pts)
    return "\n".join(lines) + "\n"


def _cmd_threshold(args) -> str:
    if args.norm is None:
        v = local_threshold(_params(args), _branch(args), args.alpha2)
    else:
        v = norm_threshold(
            _params(args), _branch(args), args.radius, args.alpha2, _NORMS[args.norm]
        )
    return f"alpha_star,{v:.5g}\n"


def _cmd_explog(args) -> str:
    model = build_nu_model(
        _params(args),
        _branch(args),
        args.radius,
        _NORMS[args.norm],
        ControlChannel(args.alpha1, args.ell1, _DISTS[args.dist1]),
        ControlChannel(args.alpha2, args.ell2, _DISTS[args.dist2]),
    )
    v = expected_log_nu(model, args.method, seed=_seed(args))
    return f"e_ln_nu,{_fmt(v)}\n"


def _cmd_minnoise(args) -> str:
    v = min_noise_for_stability(
        _params(args),
        _branch(args),
        args.radius,
        _NORMS[args.norm],
        args.alpha1,
        _DISTS[args.dist1],
        ControlChannel(args.alpha2, args.ell2, _DISTS[args.dist2]),
    )
    return f"ell1_star,{v:.5g}\n"


def _cmd_montecarlo(args) -> str:
    seed = _seed(args)
    cfg = SimConfig(initial=Point2(args.x0, args.y0), steps=args.steps, seed=seed)
    rep = mc_convergence(
        _params(args),
        _branch(args),
        _schedule(args),
        PointSet((Point2(args.x0, args.y0),)),
        args.trials,
        cfg,
        threads=args.threads,
    )
    pairs = (
        _map_pairs(args)
        + _schedule_pairs(args)
        + [
            ("x0", _fmt(args.x0)),
            ("y0", _fmt(args.y0)),
            ("steps", str(args.steps)),
            ("trials", str(args.trials)),
            ("seed", str(seed)),
        ]
    )
    lines = [
        _args_line("montecarlo", pairs),
        "trials,converged,fraction,ci_low,ci_high",
        f"{rep.trials},{rep.converged},{_fmt(rep.fraction)},{_fmt(rep.ci_low)},{_fmt(rep.ci_high)}",
    ]
    return "\n".join(lines) + "\n"


def _cmd_verify(args) -> tuple[str, bool]:
    rows = verify_mod.run_all(threads=args.threads)
    lines = ["criterion,status,detail"]
    for row in rows:
        detail = row.detail.replace(",", ";")
        lines.append(f"{row.name},{'pass' if row.passed else 'FAIL'},{detail}")
    return "\n".join(lines) + "\n", all(r.passed for r in rows)


_HANDLERS = {
    "simulate": _cmd_simulate,
    "bifurcation": _cmd_bifurcation,
    "limitset": _cmd_limitset,
    "threshold": _cmd_threshold,
    "explog": _cmd_explog,
    "minnoise": _cmd_minnoise,
    "montecarlo": _cmd_montecarlo,
}


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".chaosctl-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resolve_repro(args) -> list[str]:
    argv = list(PRESETS[args.preset])
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    if args.threads is not None:
        argv += ["--threads", str(args.threads)]
    return argv


def render(argv: list[str]) -> str:
    """Parse argv for a data-producing command and return its output text."""
    args = build_parser().parse_args(argv)
    if args.command == "repro":
        return render(_resolve_repro(args))
    return _HANDLERS[args.command](args)


def run_command(argv: list[str]) -> int:
    """Execute one CLI invocation; returns the process exit status."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command == "verify":
            text, ok = _cmd_verify(args)
            status = 0 if ok else 1
        elif args.command == "repro":
            text = render(_resolve_repro(args))
            status = 0
        else:
            text = _HANDLERS[args.command](args)
            status = 0
    except (DomainError, NoWindow, Unstabilizable, InvalidControl, ValueError) as e:
        print(f"chaosctl: {e}", file=sys.stderr)
        return 1
    if getattr(args, "out", None):
        _write_atomic(args.out, text)
        print(f"chaosctl: wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return status


def main() -> int:
    return run_command(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
