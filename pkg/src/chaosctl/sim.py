"""Trajectory engine and experiment harness.

Single controlled runs with tail classification, bifurcation sweeps, limit
sets, Monte Carlo convergence probabilities, and law-of-large-numbers
diagnostics.  Every experiment decomposes into independent tasks with
pre-assigned noise streams and aggregates results by task index, so output
is bit-identical for any worker count, including serial execution.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence as Seq, Union

from .control import (
    Constant,
    ControlChannel,
    ControlSchedule,
    NoiseDist,
    Sequence,
    Stochastic,
    _sm64_next,
    sample_noise,
    stream_for_trial,
    uniform_m1p1,
)
from .maps import Branch, DomainError, MapKind, MapParams, Point2, fixed_point
from .stability import NuModel

#: Tail window (points per cell) used when measuring bifurcation collapse.
COLLAPSE_WINDOW = 50
#: Per-alpha x-spread below which a tail counts as collapsed to one point.
#: Near the collapse the slowest transients decay by roughly x0.4 per 0.001
#: of control intensity (at 700-step runs), so this tolerance locates the
#: collapse within about +0.004 of the true threshold.
COLLAPSE_TOL = 2.5e-2

_WILSON_Z = 1.959963984540054  # two-sided 95%


class InsufficientData(ValueError):
    """Trajectory too short for the requested classification."""


@dataclass(frozen=True)
class SimConfig:
    """Run length, seed, and classification knobs for one experiment."""

    initial: Point2
    steps: int
    seed: int = 0
    conv_tol: float = 1e-9
    conv_window: int = 50
    escape_bound: float = 1e8
    transient: int = 500
    record_tail: int = 200
    period_max: int = 16
    period_tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ValueError(f"steps must be positive, got {self.steps}")
        if self.conv_tol <= 0.0:
            raise ValueError(f"conv_tol must be positive, got {self.conv_tol}")
        if self.escape_bound <= 1.0:
            raise ValueError(f"escape_bound must exceed 1, got {self.escape_bound}")
        if self.conv_window < 1 or self.record_tail < 1 or self.period_max < 1:
            raise ValueError("conv_window, record_tail and period_max must be >= 1")
        if self.transient < 0:
            raise ValueError(f"transient must be >= 0, got {self.transient}")
        if self.record_tail > self.steps - self.transient:
            raise ValueError(
                f"record_tail ({self.record_tail}) must fit after the transient "
                f"({self.transient}) within steps ({self.steps})"
            )


@dataclass(frozen=True)
class Converged:
    at_step: int

    def __str__(self) -> str:
        return f"converged@{self.at_step}"


@dataclass(frozen=True)
class Periodic:
    period: int

    def __str__(self) -> str:
        return f"periodic({self.period})"


@dataclass(frozen=True)
class Bounded:
    def __str__(self) -> str:
        return "bounded"


@dataclass(frozen=True)
class Escaped:
    at_step: int

    def __str__(self) -> str:
        return f"escaped@{self.at_step}"


Outcome = Union[Converged, Periodic, Bounded, Escaped]


@dataclass
class Trajectory:
    """A simulated orbit with the controls that produced it.

    With record="all", points[0] is the initial state and controls[k] is the
    pair applied to produce points[k+1].  With record="tail", points holds at
    most the last record_tail states and controls is aligned with it.
    """

    points: list[Point2]
    controls: list[tuple[float, float]]
    outcome: Outcome
    steps_run: int


@dataclass(frozen=True)
class MonteCarloReport:
    """Observed convergence frequency with a 95% Wilson interval."""

    trials: int
    converged: int
    fraction: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class PointSet:
    """Initial states used round-robin: trial k starts at points[k % len]."""

    points: tuple[Point2, ...]

    def __post_init__(self) -> None:
        if not self.points:
            raise ValueError("initial point set must be non-empty")


@dataclass(frozen=True)
class BoxSampler:
    """Initial states drawn uniformly from a box, two draws per trial."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float

    def __post_init__(self) -> None:
        if not (self.x_lo <= self.x_hi and self.y_lo <= self.y_hi):
            raise ValueError("box corners must be ordered")


InitSampler = Union[PointSet, BoxSampler]


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    """Two-sided 95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    z = _WILSON_Z
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2.0 * trials)) / denom
    half = (
        z
        * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials))
        / denom
    )
    return max(0.0, center - half), min(1.0, center + half)


def _classify_points(
    pts: Seq[tuple[float, float]],
    steps_run: int,
    target: Point2,
    cfg: SimConfig,
) -> Outcome:
    """Classify a recorded tail.  pts is the last <= record_tail states."""
    tail = pts[-cfg.record_tail :]
    tx, ty = target.x, target.y
    window = tail[-cfg.conv_window :]
    if len(window) >= cfg.conv_window and all(
        max(abs(x - tx), abs(y - ty)) < cfg.conv_tol for x, y in window
    ):
        return Converged(steps_run)
    for k in range(1, cfg.period_max + 1):
        if k >= len(tail):
            break
        if all(
            max(abs(tail[i][0] - tail[i - k][0]), abs(tail[i][1] - tail[i - k][1]))
            < cfg.period_tol
            for i in range(k, len(tail))
        ):
            if k == 1 and all(
                max(abs(x - tx), abs(y - ty)) < cfg.conv_tol for x, y in tail
            ):
                return Converged(steps_run)
            return Periodic(k)
    return Bounded()


def classify_tail(traj: Trajectory, target: Point2, cfg: SimConfig) -> Outcome:
    """Classify a finished trajectory from its recorded tail.

    Early-terminated outcomes (Converged / Escaped, detected online) are
    returned as-is; otherwise the run must have covered the configured
    transient plus tail.
    """
    if isinstance(traj.outcome, (Converged, Escaped)):
        return traj.outcome
    if traj.steps_run < cfg.transient + cfg.record_tail:
        raise InsufficientData(
            f"need at least transient + record_tail = "
            f"{cfg.transient + cfg.record_tail} steps, ran {traj.steps_run}"
        )
    pts = [(p.x, p.y) for p in traj.points]
    return _classify_points(pts, traj.steps_run, target, cfg)


def _run_raw(
    params: MapParams,
    target: Point2,
    schedule: ControlSchedule,
    cfg: SimConfig,
    rng_s: int,
    record: str,
) -> Trajectory:
    """Engine core.  Keeps state in scalars; arithmetic matches vmtoc_step."""
    henon = params.kind is MapKind.HENON
    a, b = params.a, params.b
    tx, ty = target.x, target.y
    bound = cfg.escape_bound
    conv_tol, conv_window = cfg.conv_tol, cfg.conv_window
    x, y = cfg.initial.x, cfg.initial.y

    constant = isinstance(schedule, Constant)
    sequence = isinstance(schedule, Sequence)
    if constant:
        d1 = schedule.d1
        d2 = schedule.d2
    elif sequence:
        pairs = schedule.pairs
        n_pairs = len(pairs)
    else:
        c1, c2 = schedule.ch1, schedule.ch2
        a1, l1, dist1 = c1.alpha, c1.ell, c1.dist
        a2, l2, dist2 = c2.alpha, c2.ell, c2.dist
        # Zero amplitudes realize constant controls; skipping the draws is
        # unobservable because each run owns its stream exclusively.
        if l1 == 0.0 and l2 == 0.0:
            constant = True
            d1, d2 = a1, a2

    tail_mode = record == "tail"
    if tail_mode:
        rec: deque = deque(maxlen=cfg.record_tail)
    else:
        rec = [(x, y)]
    controls: deque | list = deque(maxlen=cfg.record_tail) if tail_mode else []

    outcome: Optional[Outcome] = None
    in_tol = 0
    n = 0
    for n in range(1, cfg.steps + 1):
        if sequence:
            d1, d2 = pairs[(n - 1) % n_pairs]
        elif not constant:
            rng_s, z1 = _sm64_next(rng_s)
            rng_s, z2 = _sm64_next(rng_s)
            d1 = a1 + l1 * sample_noise(dist1, z1)
            d2 = a2 + l2 * sample_noise(dist2, z2)
        if henon:
            fx = y + 1.0 - a * x * x
        else:
            fx = y + 1.0 - a * abs(x)
        fy = b * x
        x = d1 * tx + (1.0 - d1) * fx
        y = d2 * ty + (1.0 - d2) * fy
        rec.append((x, y))
        controls.append((d1, d2))
        if not (abs(x) <= bound and abs(y) <= bound):  # catches NaN too
            outcome = Escaped(n)
            break
        if abs(x - tx) < conv_tol and abs(y - ty) < conv_tol:
            in_tol += 1
            if in_tol >= conv_window:
                outcome = Converged(n)
                break
        else:
            in_tol = 0

    if outcome is None:
        outcome = _classify_points(list(rec), n, target, cfg)
    return Trajectory(
        points=[Point2(px, py) for px, py in rec],
        controls=list(controls),
        outcome=outcome,
        steps_run=n,
    )


def run_trajectory(
    params: MapParams,
    branch: Branch,
    schedule: ControlSchedule,
    cfg: SimConfig,
    *,
    record: str = "all",
) -> Trajectory:
    """Iterate the controlled map from cfg.initial for cfg.steps steps.

    Stops early on convergence (conv_window consecutive states within
    conv_tol of the target in the max norm) or escape (max-norm beyond
    escape_bound); otherwise classifies the recorded tail.  Bit-deterministic
    for a fixed seed; uses trial stream 0 of cfg.seed.
    """
    if record not in ("all", "tail"):
        raise ValueError(f"record must be 'all' or 'tail', got {record!r}")
    target = fixed_point(params, branch)
    return _run_raw(params, target, schedule, cfg, stream_for_trial(cfg.seed, 0).s, record)


def _parallel_map(fn: Callable[[int], object], n_items: int, threads: Optional[int]) -> list:
    if threads is not None and threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    if n_items <= 1 or threads == 1:
        return [fn(i) for i in range(n_items)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n_items)))


@dataclass
class SweepResult:
    """Bifurcation sweep output.

    points holds (alpha, x) pairs ordered by (alpha index, initial index,
    step); escaped cells contribute no points.  spread[i] is the (min, max)
    x over the last COLLAPSE_WINDOW tail points of every cell at alphas[i],
    or None when every cell escaped.
    """

    alphas: tuple[float, ...]
    points: list[tuple[float, float]]
    escaped_cells: int
    spread: tuple[Optional[tuple[float, float]], ...] = field(default=())


def default_init_grid(n: int = 20) -> list[Point2]:
    """Initial-state grid with x in [0.1, 0.8] paired to y in [0.1, 0.2]."""
    if n < 1:
        raise ValueError("need at least one initial state")
    if n == 1:
        return [Point2(0.1, 0.1)]
    return [
        Point2(0.1 + 0.7 * j / (n - 1), 0.1 + 0.1 * j / (n - 1)) for j in range(n)
    ]


def bifurcation_sweep(
    params: MapParams,
    branch: Branch,
    ch2: ControlChannel,
    alpha_lo: float,
    alpha_hi: float,
    n_alpha: int,
    inits: Seq[Point2],
    cfg: SimConfig,
    ell1: float = 0.0,
    dist1: NoiseDist = NoiseDist.BERNOULLI_PM1,
    threads: Optional[int] = None,
) -> SweepResult:
    """Tail states against the channel-1 control intensity.

    For each of n_alpha evenly spaced alphas and each initial state, runs one
    trajectory (cell stream = alpha index * len(inits) + initial index) and
    emits (alpha, x) for the record_tail post-transient states.  Cells that
    converged early emit their final state repeatedly -- that is their limit
    set; escaped cells emit nothing and are counted.
    """
    if not 0.0 <= alpha_lo < alpha_hi < 1.0:
        raise ValueError(f"need 0 <= lo < hi < 1, got {alpha_lo}, {alpha_hi}")
    if n_alpha < 2:
        raise ValueError(f"need at least two alpha values, got {n_alpha}")
    if not inits:
        raise ValueError("need at least one initial state")
    target = fixed_point(params, branch)
    alphas = tuple(
        alpha_lo + (alpha_hi - alpha_lo) * i / (n_alpha - 1) for i in range(n_alpha)
    )
    n_inits = len(inits)

    def run_cell(k: int) -> tuple[list[float], bool]:
        i, j = divmod(k, n_inits)
        schedule = Stochastic(ControlChannel(alphas[i], ell1, dist1), ch2)
        cell_cfg = replace(cfg, initial=inits[j])
        traj = _run_raw(
            params, target, schedule, cell_cfg, stream_for_trial(cfg.seed, k).s, "tail"
        )
        if isinstance(traj.outcome, Escaped):
            return [], True
        if isinstance(traj.outcome, Converged):
            last = traj.points[-1].x
            return [last] * cfg.record_tail, False
        return [p.x for p in traj.points], False

    cells = _parallel_map(run_cell, n_alpha * n_inits, threads)
    points: list[tuple[float, float]] = []
    spread: list[Optional[tuple[float, float]]] = []
    escaped = 0
    for i, alpha in enumerate(alphas):
        lo = math.inf
        hi = -math.inf
        for j in range(n_inits):
            xs, did_escape = cells[i * n_inits + j]
            if did_escape:
                escaped += 1
                continue
            points.extend((alpha, x) for x in xs)
            for x in xs[-COLLAPSE_WINDOW:]:
                if x < lo:
                    lo = x
                if x > hi:
                    hi = x
        spread.append((lo, hi) if lo <= hi else None)
    return SweepResult(alphas, points, escaped, tuple(spread))


def last_collapse_alpha(result: SweepResult, tol: float = COLLAPSE_TOL) -> Optional[float]:
    """Smallest alpha from which every larger alpha has a single-point tail.

    "Single-point" means the per-alpha x-spread stays below tol.  Returns
    None when the top of the sweep has not collapsed (no stable equilibrium
    detected in range).
    """
    collapsed = [
        s is not None and (s[1] - s[0]) < tol for s in result.spread
    ]
    if not collapsed or not collapsed[-1]:
        return None
    i = len(collapsed)
    while i > 0 and collapsed[i - 1]:
        i -= 1
    return result.alphas[i]


def limit_set(
    params: MapParams,
    branch: Branch,
    schedule: ControlSchedule,
    inits: Seq[Point2],
    cfg: SimConfig,
    threads: Optional[int] = None,
) -> list[Point2]:
    """Post-transient tail points over all initial states.

    One noise realization per initial state (stream = initial index).
    Converged runs contribute their limit point; escaped runs contribute
    nothing.
    """
    if not inits:
        raise ValueError("need at least one initial state")
    target = fixed_point(params, branch)

    def run_one(j: int) -> list[Point2]:
        cell_cfg = replace(cfg, initial=inits[j])
        traj = _run_raw(
            params, target, schedule, cell_cfg, stream_for_trial(cfg.seed, j).s, "tail"
        )
        if isinstance(traj.outcome, Escaped):
            return []
        if isinstance(traj.outcome, Converged):
            return [traj.points[-1]] * cfg.record_tail
        return traj.points

    out: list[Point2] = []
    for pts in _parallel_map(run_one, len(inits), threads):
        out.extend(pts)
    return out


def mc_convergence(
    params: MapParams,
    branch: Branch,
    schedule: ControlSchedule,
    init_sampler: InitSampler,
    trials: int,
    cfg: SimConfig,
    threads: Optional[int] = None,
) -> MonteCarloReport:
    """Fraction of independent trials that converge to the equilibrium.

    Trial k uses noise stream k; with a BoxSampler the trial's initial state
    consumes the first two uniform draws of its own stream.  Per-trial errors
    count as non-converged.  Deterministic for a fixed seed and trial count.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    target = fixed_point(params, branch)

    def run_one(k: int) -> bool:
        s = stream_for_trial(cfg.seed, k).s
        if isinstance(init_sampler, PointSet):
            init = init_sampler.points[k % len(init_sampler.points)]
        else:
            s, z1 = _sm64_next(s)
            s, z2 = _sm64_next(s)
            bx = init_sampler
            init = Point2(
                bx.x_lo + (uniform_m1p1(z1) + 1.0) * 0.5 * (bx.x_hi - bx.x_lo),
                bx.y_lo + (uniform_m1p1(z2) + 1.0) * 0.5 * (bx.y_hi - bx.y_lo),
            )
        trial_cfg = replace(cfg, initial=init)
        try:
            traj = _run_raw(params, target, schedule, trial_cfg, s, "tail")
        except (ValueError, ArithmeticError):
            return False
        return isinstance(traj.outcome, Converged)

    flags = _parallel_map(run_one, trials, threads)
    converged = sum(flags)
    lo, hi = wilson_interval(converged, trials)
    return MonteCarloReport(trials, converged, converged / trials, lo, hi)


def lln_average(model: NuModel, n: int, seed: int = 0) -> list[float]:
    """Running averages (1/k) sum ln nu(i) over n i.i.d. draws.

    The final entry converges to the model's expected log by the law of
    large numbers; the draw discipline (two draws per step, channel 1 first)
    matches the trajectory engine.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not model.positive:
        raise DomainError(f"nu can reach zero: need c > |p| + |q|, got c={model.c}")
    c, p, q = model.c, model.p, model.q
    d1, d2 = model.dist1, model.dist2
    s = stream_for_trial(seed, 0).s
    out = []
    total = 0.0
    for k in range(1, n + 1):
        s, z1 = _sm64_next(s)
        s, z2 = _sm64_next(s)
        total += math.log(c + p * sample_noise(d1, z1) + q * sample_noise(d2, z2))
        out.append(total / k)
    return out
