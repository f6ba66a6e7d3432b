import math

import numpy as np
import pytest

import helpers
from dualsniff.errors import (AmbiguousSolution, CollinearityWarning,
                              InfeasibleObservation, NoIntersection)
from dualsniff.geometry import SPEED_OF_LIGHT, Position, Scenario, distance
from dualsniff.timing import ClockConfig, subframe_delta, ta_seconds
from dualsniff.toa import (ToAObservation, compose_D, ellipse_residual,
                           solve_toa)


def _annulus_scenario():
    """Band-1 layout whose second intersection falls outside the band."""
    return Scenario(enb=Position(0, 0),
                    sniffers=(Position(109.7, 0.0), Position(0.0, 139.5)),
                    ue_truth=Position(80.0, 82.2), ta_index=1)


def _square_scenario():
    return Scenario(enb=Position(0, 0),
                    sniffers=(Position(100, 0), Position(0, 100)),
                    ue_truth=Position(40, 30), ta_index=0)


def test_compose_D_known_value():
    sc = _square_scenario()
    cfg = ClockConfig.for_scenario(sc)
    obs = compose_D(subframe_delta(sc, 0, cfg), sc.sniffers[0], sc)
    # d_ub + d_ue1 = 50 + sqrt(60^2 + 30^2)
    assert obs.D == pytest.approx(50.0 + math.sqrt(4500.0), rel=1e-12)
    assert obs.feasible


def test_compose_D_restores_timing_advance():
    sc = _annulus_scenario()
    cfg = ClockConfig.for_scenario(sc)
    d_ub = distance(sc.enb, sc.ue_truth)
    for k in (0, 1):
        obs = compose_D(subframe_delta(sc, k, cfg), sc.sniffers[k], sc)
        want = d_ub + distance(sc.ue_truth, sc.sniffers[k])
        assert obs.D == pytest.approx(want, rel=1e-12)


def test_compose_D_flags_infeasible():
    sc = _square_scenario()
    d_focal = 100.0
    obs = compose_D(-2.0 * d_focal / SPEED_OF_LIGHT, sc.sniffers[0], sc)
    assert not obs.feasible
    with pytest.raises(ValueError):
        compose_D(float("nan"), sc.sniffers[0], sc)


def test_ellipse_residual_sign():
    enb = Position(0, 0)
    obs = ToAObservation(sniffer=Position(100, 0), D=50.0 + math.sqrt(4500.0))
    assert ellipse_residual(Position(40, 30), obs, enb) == pytest.approx(0.0, abs=1e-9)
    assert ellipse_residual(Position(400, 300), obs, enb) > 0.0
    assert ellipse_residual(Position(50, 0), obs, enb) < 0.0


def test_solve_recovers_annulus_truth():
    sc = _annulus_scenario()
    est = helpers.run_toa(sc)
    assert helpers.position_error(est.position, sc) < 1e-6
    assert est.residual < 1e-6
    lo, hi = sc.band
    assert lo <= distance(est.position, sc.enb) < hi
    assert est.position in est.candidates


def test_solve_raises_on_infeasible_observation():
    sc = _square_scenario()
    bad = ToAObservation(sniffer=sc.sniffers[0], D=50.0, feasible=False)
    good = ToAObservation(sniffer=sc.sniffers[1], D=150.0)
    with pytest.raises(InfeasibleObservation):
        solve_toa(bad, good, sc.enb, sc.band)
    # an unflagged but too-short range-sum is caught as well
    short = ToAObservation(sniffer=sc.sniffers[0], D=99.0)
    with pytest.raises(InfeasibleObservation):
        solve_toa(short, good, sc.enb, sc.band)


def test_mirror_in_same_band_is_ambiguous():
    """Both intersections inside one TA band cannot be told apart."""
    sc = _square_scenario()
    with pytest.raises(AmbiguousSolution) as exc:
        helpers.run_toa(sc)
    candidates = exc.value.candidates
    assert len(candidates) >= 2
    # every candidate genuinely satisfies both range-sum constraints
    cfg = ClockConfig.for_scenario(sc)
    obs = [compose_D(subframe_delta(sc, k, cfg), sc.sniffers[k], sc)
           for k in (0, 1)]
    for q in candidates:
        for o in obs:
            assert abs(ellipse_residual(q, o, sc.enb)) < 1e-6
    assert any(distance(q, sc.ue_truth) < 1e-6 for q in candidates)


def test_disjoint_ellipses_raise():
    enb = Position(0, 0)
    obs1 = ToAObservation(sniffer=Position(100, 0), D=300.0)
    obs2 = ToAObservation(sniffer=Position(0, 100), D=101.0)
    with pytest.raises(NoIntersection):
        solve_toa(obs1, obs2, enb, (0.0, 1000.0))


def test_collinear_tangency_closest_approach():
    # both ellipses share their rightmost vertex at (60, 0); the constraint
    # surfaces touch without crossing, and all three stations are collinear
    enb = Position(0, 0)
    obs1 = ToAObservation(sniffer=Position(30, 0), D=90.0)
    obs2 = ToAObservation(sniffer=Position(-40, 0), D=160.0)
    with pytest.warns(CollinearityWarning):
        est = solve_toa(obs1, obs2, enb, (0.0, 78.12))
    assert est.position.x == pytest.approx(60.0, abs=0.05)
    assert abs(est.position.y) < 0.5


def test_candidates_sorted_by_residual():
    sc = _annulus_scenario()
    cfg = ClockConfig.for_scenario(sc)
    obs = [compose_D(subframe_delta(sc, k, cfg), sc.sniffers[k], sc)
           for k in (0, 1)]
    est = solve_toa(obs[0], obs[1], sc.enb, sc.band)
    rs = [max(abs(ellipse_residual(q, obs[0], sc.enb)),
              abs(ellipse_residual(q, obs[1], sc.enb))) for q in est.candidates]
    assert rs == sorted(rs)


def test_random_scenarios_recover_truth():
    rng = np.random.default_rng(61)
    for _ in range(50):
        sc = helpers.draw_solvable_scenario(rng)
        est = helpers.run_toa(sc)
        assert helpers.position_error(est.position, sc) < 1e-6


def test_solution_is_frame_equivariant():
    """Rotating and translating the whole scene moves the fix with it."""
    base = _annulus_scenario()
    phi = math.radians(37.0)
    cos_p, sin_p = math.cos(phi), math.sin(phi)

    def move(p):
        return Position(500.0 + cos_p * p.x - sin_p * p.y,
                        -200.0 + sin_p * p.x + cos_p * p.y)

    moved = Scenario(enb=move(base.enb),
                     sniffers=tuple(move(s) for s in base.sniffers),
                     ue_truth=move(base.ue_truth), ta_index=base.ta_index)
    est = helpers.run_toa(moved)
    assert distance(est.position, moved.ue_truth) < 1e-6
