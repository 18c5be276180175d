import numpy as np
import pytest

from globinv.certificates import graves_certificate
from globinv.errors import LiftAborted, LoopNotInImage, OutOfRange, StrategyMismatch
from globinv.indicators import mu_profile
from globinv.lifting import LiftOptions
from globinv.maps import MapModel, registry_get
from globinv.solver import fibre_enumerate, solve, star_probe, trivialize


def _bisect(f, lo, hi, tol=1e-13):
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) * flo <= 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# solve


def test_solve_monotone_matches_bisection():
    m = registry_get("monotone1d")
    rep = solve(m, [7.0])
    assert rep.strategy == "Wazewski"
    assert rep.solution is not None
    x_star = _bisect(lambda t: t + 0.5 * np.sin(t) - 7.0, 0.0, 10.0)
    assert abs(rep.solution[0] - x_star) <= 1e-6
    assert rep.residual <= 1e-8
    assert rep.outcome.status.is_complete


def test_solve_arctan_outside_image():
    m = registry_get("arctan1d")
    rep = solve(m, [2.0])
    assert rep.solution is None
    assert rep.outcome.status.kind in ("Singular", "Escaped")


def test_solve_residual_invariant():
    """A reported solution always satisfies |f(x) - y| <= tol on re-evaluation."""
    cases = [
        ("monotone1d", [3.0]),
        ("identity_3", [0.3, -0.2, 1.0]),
        ("parabola_sub", [-3.0]),
        ("asinh1d", [2.5]),
    ]
    for name, y in cases:
        m = registry_get(name)
        rep = solve(m, y)
        assert rep.solution is not None, name
        res = float(np.linalg.norm(m.eval_fn(np.asarray(rep.solution)) - np.asarray(y)))
        assert res <= 1e-8, name


def test_solve_parabola_horizontal_membership():
    m = registry_get("parabola_sub")
    rep = solve(m, [-3.0])
    assert rep.strategy == "Horizontal"
    x = np.asarray(rep.solution)
    assert abs((x[0] - x[1] ** 2) - (-3.0)) <= 1e-8


def test_solve_gradient_flow_on_tall_map():
    tall = MapModel(
        name="embed12",
        n=1,
        m=2,
        eval_fn=lambda x: np.array([x[0], x[0]]),
        jac_fn=lambda x: np.array([[1.0], [1.0]]),
    )
    rep = solve(tall, [1.0, 1.0], x_seed=[0.2])
    assert rep.strategy == "GradientFlow"
    assert rep.flow_verdict is not None and rep.flow_verdict.kind == "converged"
    assert rep.solution is not None
    assert abs(rep.solution[0] - 1.0) <= 1e-6


def test_solve_gradient_flow_unreachable_target():
    tall = MapModel(
        name="embed12",
        n=1,
        m=2,
        eval_fn=lambda x: np.array([x[0], x[0]]),
        jac_fn=lambda x: np.array([[1.0], [1.0]]),
    )
    # (1, 0) is off the diagonal image; flow stalls at the projection
    rep = solve(tall, [1.0, 0.0], x_seed=[0.0])
    assert rep.solution is None
    assert rep.flow_verdict is not None
    assert rep.flow_verdict.kind in ("ps_candidate", "diverged")


def test_solve_strategy_mismatch():
    proj = registry_get("projection2to1")
    with pytest.raises(StrategyMismatch):
        solve(proj, [1.0], strategy="wazewski")
    tall = MapModel(
        name="embed12",
        n=1,
        m=2,
        eval_fn=lambda x: np.array([x[0], x[0]]),
    )
    with pytest.raises(StrategyMismatch):
        solve(tall, [1.0, 1.0], strategy="horizontal")
    with pytest.raises(StrategyMismatch):
        solve(registry_get("identity_1"), [1.0], strategy="mystery")


def test_solve_strategy_aliases():
    m = registry_get("identity_2")
    for label in ("auto", "wazewski"):
        assert solve(m, [0.5, 0.5], strategy=label).strategy == "Wazewski"
    proj = registry_get("projection2to1")
    assert solve(proj, [1.0], strategy="auto").strategy == "Horizontal"


def test_solve_within_radius():
    m = registry_get("arctan1d")
    prof = mu_profile(m, [0.0], 1.0, 2000)
    cert = graves_certificate(m, [0.0], 1.0, prof)
    y = [0.99 * cert.rho]
    rep = solve(m, y, certificate=cert)
    assert rep.solution is not None
    assert rep.within_radius is True
    plain = solve(m, y)
    assert plain.within_radius is None
    d = rep.to_json_dict()
    assert d["within_radius"] is True and d["strategy"] == "Wazewski"


def test_solve_seed_defaults_to_base_point():
    m = registry_get("monotone1d")  # base point 0
    rep = solve(m, [0.0])
    assert rep.x_seed == [0.0]
    assert rep.solution is not None and abs(rep.solution[0]) <= 1e-9


# ---------------------------------------------------------------------------
# star_probe


def test_star_identity_budget_exhausted():
    m = registry_get("identity_2")
    rep = star_probe(m, [0.0, 0.0], t_budget=3.0)
    assert rep.reaches == pytest.approx([3.0] * 4)
    assert set(rep.reasons) == {"BudgetExhausted"}
    rays = rep.to_json_dict()["rays"]
    assert len(rays) == 4 and rays[0]["reason"] == "BudgetExhausted"


def test_star_arctan_half_pi():
    m = registry_get("arctan1d")
    rep = star_probe(m, [0.0], t_budget=2.0, rel_tol=1e-3)
    assert len(rep.reaches) == 2
    for reach, reason in zip(rep.reaches, rep.reasons):
        assert abs(reach - np.pi / 2) <= 1e-2
        assert reason in ("Singular", "Escaped")


def test_star_exp_asymmetric():
    m = registry_get("exp1d")  # at x=0, image ray down hits 0 at distance 1
    rep = star_probe(m, [0.0], t_budget=2.0, rel_tol=1e-3)
    by_dir = dict(zip(tuple(d[0] for d in np.asarray(rep.directions)), range(2)))
    down = rep.reaches[by_dir[-1.0]]
    up_reason = rep.reasons[by_dir[1.0]]
    assert abs(down - 1.0) <= 3e-3
    assert up_reason == "BudgetExhausted"


def test_star_budget_consistency():
    """A larger budget never shrinks a reach; bisected reaches agree within
    resolution."""
    m = registry_get("arctan1d")
    small = star_probe(m, [0.0], t_budget=2.0, rel_tol=1e-4)
    large = star_probe(m, [0.0], t_budget=8.0, rel_tol=1e-4)
    for a, b in zip(small.reaches, large.reaches):
        assert b >= a - 2 * 1e-4 * 2.0
        assert abs(a - b) <= 2 * (1e-4 * 8.0 + 1e-4 * 2.0)


def test_star_validation():
    m = registry_get("identity_2")
    with pytest.raises(OutOfRange):
        star_probe(m, [0.0, 0.0], directions=[[0.0, 0.0]])
    with pytest.raises(StrategyMismatch):
        star_probe(registry_get("projection2to1"), [0.0, 0.0])


# ---------------------------------------------------------------------------
# fibre_enumerate


def test_fibre_multistart_single_root():
    m = registry_get("monotone1d")
    seeds = [[float(s)] for s in range(-5, 6)]
    rep = fibre_enumerate(m, [0.0], seeds=seeds)
    assert len(rep.points) == 1
    assert abs(rep.points[0][0]) <= 1e-9
    assert len(rep.monodromy_shifts) == 0
    assert rep.discreteness_gap is None


def test_fibre_loop_complex_exp():
    m = registry_get("complex_exp")
    y = [1.0, 0.0]
    diamond = [[0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]  # winds once around 0
    rep = fibre_enumerate(m, y, loop=diamond, max_points=3)
    assert len(rep.points) == 3
    for k, p in enumerate(rep.points):
        assert np.allclose(p, [0.0, 2.0 * np.pi * k], atol=1e-6)
    # each completed traversal shifts the lift by one deck transformation
    assert len(rep.monodromy_shifts) == 2
    for s in rep.monodromy_shifts:
        assert np.allclose(s, [0.0, 2.0 * np.pi], atol=1e-6)
    for r in rep.residuals:
        assert r <= 1e-8
    gap = rep.discreteness_gap
    assert gap is not None and abs(gap - 2.0 * np.pi) <= 1e-3
    d = rep.to_json_dict()
    assert len(d["points"]) == 3 and d["discreteness_gap"] == gap
    assert d["monodromy_shifts"][0] == pytest.approx([0.0, 2.0 * np.pi], abs=1e-6)


def test_fibre_loop_trivial_monodromy():
    m = registry_get("identity_2")
    rep = fibre_enumerate(m, [0.5, 0.5], loop=[[2.0, 0.0], [0.0, 2.0]], max_points=4)
    assert len(rep.points) == 1
    assert len(rep.monodromy_shifts) == 1
    assert np.linalg.norm(rep.monodromy_shifts[0]) <= 1e-8


def test_fibre_loop_not_in_image():
    m = registry_get("exp1d")
    with pytest.raises(LoopNotInImage):
        fibre_enumerate(m, [-1.0], loop=[[1.0], [2.0]])


def test_fibre_argument_validation():
    m = registry_get("identity_1")
    with pytest.raises(OutOfRange):
        fibre_enumerate(m, [0.0])
    with pytest.raises(OutOfRange):
        fibre_enumerate(m, [0.0], seeds=[[0.0]], loop=[[1.0]])
    with pytest.raises(StrategyMismatch):
        fibre_enumerate(registry_get("projection2to1"), [0.0], loop=[[1.0], [2.0]])


def test_fibre_max_points_truncates():
    m = registry_get("complex_exp")
    diamond = [[0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
    rep = fibre_enumerate(m, [1.0, 0.0], loop=diamond, max_points=2)
    assert len(rep.points) == 2


def test_fibre_seeds_keep_distinct_roots():
    # f(x) = x^3 - 3x maps three points to 0
    cubic = MapModel(
        name="cubic",
        n=1,
        m=1,
        eval_fn=lambda x: np.array([x[0] ** 3 - 3.0 * x[0]]),
        jac_fn=lambda x: np.array([[3.0 * x[0] ** 2 - 3.0]]),
    )
    rep = fibre_enumerate(cubic, [0.0], seeds=[[-2.0], [0.2], [2.0]])
    got = sorted(p[0] for p in rep.points)
    assert np.allclose(got, [-np.sqrt(3.0), 0.0, np.sqrt(3.0)], atol=1e-8)


# ---------------------------------------------------------------------------
# trivialize


def test_trivialize_projection():
    m = registry_get("projection2to1")
    pairs = trivialize(m, [0.0], [[0.5, 3.0]])
    (image_pt, fibre_pt), = (pairs[0],)
    assert image_pt == pytest.approx([0.5])
    assert np.allclose(fibre_pt, [0.0, 3.0], atol=1e-9)


def test_trivialize_parabola():
    m = registry_get("parabola_sub")
    pairs = trivialize(m, [0.0], [[0.25, 0.0], [1.25, 1.0]])
    for (img, fib), src in zip(pairs, ([0.25, 0.0], [1.25, 1.0])):
        assert img == pytest.approx([m.eval_fn(np.asarray(src))[0]])
        fib = np.asarray(fib)
        assert abs(fib[0] - fib[1] ** 2) <= 1e-8  # lands on the zero fibre


def test_trivialize_continuity():
    m = registry_get("parabola_sub")
    p = [0.3, 0.7]
    q = [0.3 + 1e-3, 0.7]
    (_, fp), (_, fq) = trivialize(m, [0.0], [p, q])
    assert np.linalg.norm(np.asarray(fp) - np.asarray(fq)) <= 1e-2


def test_trivialize_requires_submersion_shape():
    with pytest.raises(StrategyMismatch):
        trivialize(registry_get("identity_2"), [0.0, 0.0], [[1.0, 1.0]])


def test_trivialize_aborts_outside_image():
    # first coordinate moves through arctan, second is free; pulling the
    # image value to 2 leaves the arctan range and the lift must abort
    sub = MapModel(
        name="arctan_sub",
        n=2,
        m=1,
        eval_fn=lambda x: np.array([np.arctan(x[0])]),
        jac_fn=lambda x: np.array([[1.0 / (1.0 + x[0] ** 2), 0.0]]),
    )
    with pytest.raises(LiftAborted) as exc:
        trivialize(sub, [2.0], [[0.0, 1.0]])
    assert exc.value.outcome is not None
    assert exc.value.outcome.status.kind in ("Singular", "Escaped")
