import math

import pytest
import scipy.stats

from chaosctl import (
    Bounded,
    BoxSampler,
    Branch,
    Constant,
    ControlChannel,
    Converged,
    Escaped,
    InsufficientData,
    NoiseDist,
    NormKind,
    Periodic,
    Point2,
    PointSet,
    Sequence,
    SimConfig,
    Stochastic,
    Trajectory,
    bifurcation_sweep,
    bounded_noise_safe,
    build_nu_model,
    classify_tail,
    controlled_lipschitz,
    default_init_grid,
    expected_log_nu,
    fixed_point,
    henon,
    induced_norm,
    last_collapse_alpha,
    limit_set,
    lln_average,
    lozi,
    mc_convergence,
    norm_threshold,
    run_trajectory,
    vec_norm,
    wilson_interval,
)
from chaosctl.stability import mc_log_nu

PLUS = Branch.PLUS


def _diameter(points):
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    return max(max(xs) - min(xs), max(ys) - min(ys))


# --- single trajectories ------------------------------------------------------

def test_constant_control_converges(henon_std):
    cfg = SimConfig(initial=Point2(0.3, 0.1), steps=2000, seed=0)
    traj = run_trajectory(henon_std, PLUS, Constant(0.6, 0.0), cfg)
    assert isinstance(traj.outcome, Converged)
    final = traj.points[-1]
    assert final.x == pytest.approx(0.6314, abs=1e-4)
    assert max(abs(final.x - 0.631354), abs(final.y - 0.189406)) < 1e-6


def test_trajectory_matches_direct_iteration(henon_std):
    # oracle: re-iterate the controlled map by hand, bit for bit
    cfg = SimConfig(initial=Point2(0.3, 0.1), steps=2000, seed=0)
    traj = run_trajectory(henon_std, PLUS, Constant(0.6, 0.0), cfg)
    star = fixed_point(henon_std, PLUS)
    x, y = 0.3, 0.1
    for p in traj.points[1:]:
        fx = y + 1.0 - 1.4 * x * x
        fy = 0.3 * x
        x = 0.6 * star.x + 0.4 * fx
        y = 0.0 * star.y + 1.0 * fy
        assert (p.x, p.y) == (x, y)


def test_two_cycle_without_noise(henon_std):
    cfg = SimConfig(initial=Point2(0.3, 0.1), steps=2000, seed=0)
    sched = Stochastic(ControlChannel(0.44, 0.0), ControlChannel(0.0))
    traj = run_trajectory(henon_std, PLUS, sched, cfg, record="tail")
    assert traj.outcome == Periodic(2)


def test_lozi_noise_stabilizes_far_start(lozi_std):
    # the same mean intensity leaves a two-cycle without noise
    cfg = SimConfig(initial=Point2(-10.0, -15.0), steps=10_000, seed=0)
    clean = run_trajectory(
        lozi_std, PLUS, Stochastic(ControlChannel(0.4, 0.0), ControlChannel(0.0)),
        cfg, record="tail",
    )
    assert clean.outcome == Periodic(2)
    noisy = run_trajectory(
        lozi_std, PLUS, Stochastic(ControlChannel(0.4, 0.15), ControlChannel(0.0)),
        cfg, record="tail",
    )
    assert isinstance(noisy.outcome, Converged)


def test_uncontrolled_henon_is_bounded(henon_std):
    cfg = SimConfig(initial=Point2(0.1, 0.1), steps=2000, seed=0)
    traj = run_trajectory(henon_std, PLUS, Constant(0.0, 0.0), cfg, record="tail")
    assert traj.outcome == Bounded()


def test_escape_detected_and_terminal(henon_std):
    cfg = SimConfig(initial=Point2(10.0, 0.0), steps=2000, seed=0)
    traj = run_trajectory(henon_std, PLUS, Constant(0.0, 0.0), cfg)
    assert isinstance(traj.outcome, Escaped)
    assert traj.steps_run == traj.outcome.at_step
    assert len(traj.points) == traj.steps_run + 1  # nothing after the escape


def test_sequence_schedule_cycles(henon_std):
    cfg = SimConfig(initial=Point2(0.3, 0.1), steps=900, seed=0)
    seq = Sequence(((0.7, 0.0), (0.65, 0.1)))
    traj = run_trajectory(henon_std, PLUS, seq, cfg)
    assert traj.controls[0] == (0.7, 0.0)
    assert traj.controls[1] == (0.65, 0.1)
    assert traj.controls[2] == (0.7, 0.0)


def test_engine_matches_control_step_composition(henon_std):
    # the engine must reproduce control_at_step + vmtoc_step bit for bit
    from chaosctl import vmtoc_step
    from chaosctl.control import control_at_step, stream_for_trial

    cfg = SimConfig(initial=Point2(0.3, 0.1), steps=900, seed=11)
    sched = Stochastic(
        ControlChannel(0.44, 0.3), ControlChannel(0.2, 0.1, NoiseDist.UNIFORM_M1P1)
    )
    traj = run_trajectory(henon_std, PLUS, sched, cfg)
    star = fixed_point(henon_std, PLUS)
    rng = stream_for_trial(11, 0)
    p = Point2(0.3, 0.1)
    for n, q in enumerate(traj.points[1:]):
        rng, d1, d2 = control_at_step(sched, n, rng)
        p = vmtoc_step(henon_std, star, d1, d2, p)
        assert (p.x, p.y) == (q.x, q.y)
        assert traj.controls[n] == (d1, d2)


def test_trajectory_determinism(henon_std):
    cfg = SimConfig(initial=Point2(0.3, 0.1), steps=1500, seed=9)
    sched = Stochastic(
        ControlChannel(0.44, 0.3), ControlChannel(0.2, 0.1, NoiseDist.UNIFORM_M1P1)
    )
    a = run_trajectory(henon_std, PLUS, sched, cfg)
    b = run_trajectory(henon_std, PLUS, sched, cfg)
    assert a.points == b.points
    assert a.controls == b.controls
    assert a.outcome == b.outcome


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(initial=Point2(0, 0), steps=0)
    with pytest.raises(ValueError):
        SimConfig(initial=Point2(0, 0), steps=600)  # tail does not fit
    with pytest.raises(ValueError):
        SimConfig(initial=Point2(0, 0), steps=2000, conv_tol=0.0)
    with pytest.raises(ValueError):
        SimConfig(initial=Point2(0, 0), steps=2000, escape_bound=0.5)


# --- tail classification -------------------------------------------------------

def _mk_traj(points, steps_run):
    return Trajectory(points=points, controls=[], outcome=Bounded(), steps_run=steps_run)


def test_classify_constant_at_target(henon_std):
    star = fixed_point(henon_std, PLUS)
    cfg = SimConfig(initial=star, steps=700, seed=0)
    traj = _mk_traj([star] * 700, 700)
    assert isinstance(classify_tail(traj, star, cfg), Converged)


def test_classify_two_cycle():
    cfg = SimConfig(initial=Point2(0, 0), steps=700, seed=0)
    a, b = Point2(0.25, 0.0), Point2(0.75, 0.0)
    traj = _mk_traj([a, b] * 350, 700)
    assert classify_tail(traj, Point2(0.5, 0.0), cfg) == Periodic(2)


def test_classify_insufficient_data():
    cfg = SimConfig(initial=Point2(0, 0), steps=700, seed=0)
    traj = _mk_traj([Point2(0.1, 0.1)] * 300, 300)
    with pytest.raises(InsufficientData):
        classify_tail(traj, Point2(0.5, 0.0), cfg)


def test_classify_early_outcomes_pass_through():
    cfg = SimConfig(initial=Point2(0, 0), steps=700, seed=0)
    traj = Trajectory(points=[], controls=[], outcome=Escaped(12), steps_run=12)
    assert classify_tail(traj, Point2(0.5, 0.0), cfg) == Escaped(12)


def test_near_target_period_one_is_converged(henon_std):
    # a tail hovering within conv_tol of the target counts as converged
    star = fixed_point(henon_std, PLUS)
    cfg = SimConfig(initial=star, steps=700, seed=0, conv_tol=1e-3)
    pts = [Point2(star.x + 1e-5 * (-1) ** i * 0, star.y) for i in range(700)]
    traj = _mk_traj(pts, 700)
    assert isinstance(classify_tail(traj, star, cfg), Converged)


# --- bifurcation sweeps ---------------------------------------------------------

def test_bifurcation_collapse_narrow(henon_std):
    cfg = SimConfig(initial=Point2(0.1, 0.1), steps=700, seed=0)
    res = bifurcation_sweep(
        henon_std, PLUS, ControlChannel(0.0), 0.49, 0.55, 60,
        default_init_grid(8), cfg,
    )
    got = last_collapse_alpha(res)
    assert got == pytest.approx(0.5164, abs=5e-3)
    assert res.escaped_cells == 0
    assert all(0.49 <= a <= 0.55 for a, _ in res.points)


def test_bifurcation_noise_lowers_collapse(lozi_std):
    cfg = SimConfig(initial=Point2(0.1, 0.1), steps=700, seed=0)
    grid = default_init_grid(12)
    clean = bifurcation_sweep(lozi_std, PLUS, ControlChannel(0.9), 0.2, 0.35, 80, grid, cfg)
    noisy = bifurcation_sweep(
        lozi_std, PLUS, ControlChannel(0.9), 0.2, 0.35, 80, grid, cfg, ell1=0.2
    )
    a_clean = last_collapse_alpha(clean)
    a_noisy = last_collapse_alpha(noisy)
    assert a_clean == pytest.approx(0.301, abs=5e-3)
    assert a_noisy < a_clean


def test_bifurcation_threads_bit_identical(henon_std):
    cfg = SimConfig(initial=Point2(0.1, 0.1), steps=700, seed=0)
    grid = default_init_grid(5)
    serial = bifurcation_sweep(
        henon_std, PLUS, ControlChannel(0.0), 0.4, 0.6, 20, grid, cfg,
        ell1=0.1, threads=1,
    )
    parallel = bifurcation_sweep(
        henon_std, PLUS, ControlChannel(0.0), 0.4, 0.6, 20, grid, cfg,
        ell1=0.1, threads=4,
    )
    assert serial.points == parallel.points
    assert serial.spread == parallel.spread


def test_bifurcation_input_validation(henon_std):
    cfg = SimConfig(initial=Point2(0.1, 0.1), steps=700, seed=0)
    with pytest.raises(ValueError):
        bifurcation_sweep(henon_std, PLUS, ControlChannel(0.0), 0.6, 0.4, 10,
                          default_init_grid(3), cfg)
    with pytest.raises(ValueError):
        bifurcation_sweep(henon_std, PLUS, ControlChannel(0.0), 0.4, 0.6, 10, [], cfg)


# --- limit sets -----------------------------------------------------------------

def test_limit_set_collapses_above_threshold(henon_std):
    cfg = SimConfig(initial=Point2(0.3, 0.1), steps=700, seed=0)
    pts = limit_set(henon_std, PLUS, Constant(0.6, 0.0), [Point2(0.3, 0.1)], cfg)
    star = fixed_point(henon_std, PLUS)
    assert len(pts) == cfg.record_tail
    assert all(max(abs(p.x - star.x), abs(p.y - star.y)) < 1e-6 for p in pts)


def test_limit_set_blurred_two_cycle(henon_std):
    cfg = SimConfig(initial=Point2(0.3, 0.1), steps=700, seed=0)
    sched = Stochastic(ControlChannel(0.44, 0.05), ControlChannel(0.0))
    pts = limit_set(henon_std, PLUS, sched, [Point2(0.3, 0.1)], cfg)
    assert _diameter(pts) > 0.1


def test_limit_set_stabilized(henon_std):
    cfg = SimConfig(initial=Point2(0.3, 0.1), steps=700, seed=0)
    sched = Stochastic(ControlChannel(0.44, 0.3), ControlChannel(0.0))
    pts = limit_set(henon_std, PLUS, sched, [Point2(0.3, 0.1)], cfg)
    assert _diameter(pts) < 1e-4


# --- Monte Carlo convergence ----------------------------------------------------

def test_wilson_interval_against_scipy():
    for k, n in [(0, 200), (7, 200), (100, 200), (200, 200), (1, 13)]:
        lo, hi = wilson_interval(k, n)
        want = scipy.stats.binomtest(k, n).proportion_ci(
            confidence_level=0.95, method="wilson"
        )
        assert lo == pytest.approx(want.low, abs=1e-12)
        assert hi == pytest.approx(want.high, abs=1e-12)


def test_mc_report_invariants(henon_std):
    cfg = SimConfig(initial=Point2(0.3, 0.1), steps=2000, seed=0)
    rep = mc_convergence(
        henon_std, PLUS,
        Stochastic(ControlChannel(0.44, 0.3), ControlChannel(0.0)),
        PointSet((Point2(0.3, 0.1),)), 50, cfg,
    )
    assert rep.trials == 50
    assert 0.0 <= rep.ci_low <= rep.fraction <= rep.ci_high <= 1.0
    assert rep.fraction == rep.converged / rep.trials


def test_mc_no_noise_two_cycle_never_converges(henon_std):
    cfg = SimConfig(initial=Point2(0.3, 0.1), steps=2000, seed=0)
    rep = mc_convergence(
        henon_std, PLUS,
        Stochastic(ControlChannel(0.44, 0.0), ControlChannel(0.0)),
        PointSet((Point2(0.3, 0.1),)), 40, cfg,
    )
    assert rep.fraction == 0.0


def test_mc_global_lozi_bound(lozi_std):
    cfg = SimConfig(initial=Point2(0.0, 0.0), steps=2000, seed=0)
    rep = mc_convergence(
        lozi_std, PLUS, Constant(0.59, 0.0),
        BoxSampler(-100.0, 100.0, -100.0, 100.0), 200, cfg,
    )
    assert rep.fraction == 1.0


def test_mc_threads_deterministic(lozi_std):
    cfg = SimConfig(initial=Point2(0.0, 0.0), steps=2000, seed=3)
    args = (lozi_std, PLUS, Constant(0.59, 0.0),
            BoxSampler(-50.0, 50.0, -50.0, 50.0), 64, cfg)
    assert mc_convergence(*args, threads=1) == mc_convergence(*args, threads=8)


def test_box_sampler_validation():
    with pytest.raises(ValueError):
        BoxSampler(1.0, -1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        PointSet(())


# --- certified geometric decay ---------------------------------------------------

def test_geometric_decay_under_certified_contraction(lozi_std):
    ch1, ch2 = ControlChannel(0.7, 0.1), ControlChannel(0.5, 0.3)
    a_star = norm_threshold(lozi_std, PLUS, 0.4, 0.0, NormKind.LINF)
    assert bounded_noise_safe(ch1.alpha, ch1.ell, a_star)
    worst = induced_norm(
        controlled_lipschitz(lozi_std, PLUS, 0.4, ch1.alpha - ch1.ell, ch2.alpha - ch2.ell),
        NormKind.LINF,
    )
    star = fixed_point(lozi_std, PLUS)
    for trial in range(40):
        cfg = SimConfig(
            initial=Point2(star.x + 0.3, star.y - 0.2), steps=100, seed=trial,
            transient=0, record_tail=100,
        )
        traj = run_trajectory(lozi_std, PLUS, Stochastic(ch1, ch2), cfg)
        budget = vec_norm(0.3, -0.2, NormKind.LINF)
        for p in traj.points[1:]:
            budget *= worst
            if budget < 1e-13:
                break
            assert vec_norm(p.x - star.x, p.y - star.y, NormKind.LINF) <= budget * (1 + 1e-9)


# --- running log averages ---------------------------------------------------------

def test_lln_degenerate_model(lozi_std):
    m = build_nu_model(lozi_std, PLUS, 0.0, NormKind.L1,
                       ControlChannel(0.3), ControlChannel(0.2))
    avgs = lln_average(m, 100, seed=0)
    assert all(a == pytest.approx(math.log(m.c), rel=1e-15) for a in avgs)


def test_lln_band_henon(henon_std):
    m = build_nu_model(henon_std, PLUS, 0.0, NormKind.LINF,
                       ControlChannel(0.44, 0.4279), ControlChannel(0.0))
    n = 100_000
    avgs = lln_average(m, n, seed=7)
    assert len(avgs) == n
    _, sd = mc_log_nu(m, 20_000, seed=3)
    assert abs(avgs[-1] - expected_log_nu(m)) <= 4.0 * sd / math.sqrt(n)


def test_lln_band_lozi_two_bernoulli(lozi_std):
    m = build_nu_model(lozi_std, PLUS, 0.0, NormKind.L1,
                       ControlChannel(0.27, 0.2), ControlChannel(0.9, 0.55))
    n = 1_000_000
    final = lln_average(m, n, seed=7)[-1]
    _, sd = mc_log_nu(m, 20_000, seed=3)
    assert abs(final - (-0.0016)) <= 4.0 * sd / math.sqrt(n) + 1e-5
