"""Acceptance gate: the nine end-to-end guarantees the package ships with.

Each test prints one [PASS] line; run with -v for a pass/fail line per
criterion.  Criteria 3, 4 and 8 share a module-scoped battery of recorded
lifts (the four ball sweeps plus the solve and loop lifts used elsewhere in
the gate)."""

import json

import numpy as np
import pytest

from globinv.certificates import graves_certificate, katriel_check, unit_sphere_points
from globinv.cli import run_job
from globinv.indicators import inj_indicator, mu_profile, rho_of_r, sur_indicator
from globinv.lifting import (
    LiftOptions,
    LiftTrajectory,
    gradient_flow,
    lift_line_horizontal,
    lift_line_square,
    weighted_path_length,
)
from globinv.maps import evaluate, linear_entry, registry_get
from globinv.solver import fibre_enumerate, solve, star_probe

DIAMOND = [[0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]

SWEEPS = [
    ("identity_2", registry_get("identity_2"), np.zeros(2), 1.0, 1024, False, 0),
    ("linear_diag", linear_entry(np.diag([2.0, 0.5])).model, np.zeros(2), 1.0, 1024, False, 1),
    ("monotone1d", registry_get("monotone1d"), np.zeros(1), 3.0, 1024, False, 2),
    ("parabola_sub", registry_get("parabola_sub"), np.zeros(2), 2.0, 1024, True, 3),
]


@pytest.fixture(scope="module")
def battery():
    """Recorded lifts: every sweep target, the exact-radius solve, and the
    monodromy loop segments."""
    records = []
    sweep_certs = {}
    for label, model, x0, r, grid, horizontal, seed in SWEEPS:
        profile = mu_profile(model, x0, r, grid)
        cert = graves_certificate(model, x0, r, profile, verify_targets=64, seed=seed)
        sweep_certs[label] = cert
        rho = cert.rho
        y0 = evaluate(model, x0)
        lift = lift_line_horizontal if horizontal else lift_line_square
        for d in unit_sphere_points(model.m, 64, seed=seed):
            w = 0.99 * rho * d
            out = lift(model, x0, w, LiftOptions())
            records.append((label, model, x0, w, out))

    arct = registry_get("arctan1d")
    records.append(
        (
            "arctan_solve",
            arct,
            np.zeros(1),
            np.array([0.99 * np.pi / 4]),
            lift_line_square(arct, np.zeros(1), np.array([0.99 * np.pi / 4])),
        )
    )

    cexp = registry_get("complex_exp")
    x_cur = np.zeros(2)
    verts = [np.array([1.0, 0.0])] + [np.array(v) for v in DIAMOND] + [np.array([1.0, 0.0])]
    for _ in range(2):
        for b in verts[1:]:
            w = b - evaluate(cexp, x_cur)
            out = lift_line_square(cexp, x_cur, w)
            records.append(("complex_exp_loop", cexp, x_cur.copy(), w, out))
            assert out.status.is_complete
            x_cur = out.trajectory.points[-1]

    return {"records": records, "certs": sweep_certs}


def test_criterion_1_indicator_identity():
    rng = np.random.default_rng(42)
    checked = 0
    while checked < 200:
        n = int(rng.integers(1, 9))
        J = rng.standard_normal((n, n))
        s = np.linalg.svd(J, compute_uv=False)
        if s[-1] < 1e-4 * s[0]:
            continue
        inj = inj_indicator(J)
        sur = sur_indicator(J)
        oracle = 1.0 / np.linalg.norm(np.linalg.inv(J), ord=2)
        tol = 1e-9 * s[0]
        assert abs(inj - sur) <= tol
        assert abs(inj - oracle) <= tol
        checked += 1
    print("[PASS] criterion 1: inj == sur == 1/|J^-1| on 200 invertible matrices")


def test_criterion_2_exact_radius_and_solve():
    m = registry_get("arctan1d")
    profile = mu_profile(m, [0.0], 1.0, 4000)
    rho = rho_of_r(profile, 1.0)
    assert abs(rho - np.pi / 4) <= 1e-4
    y = 0.99 * np.pi / 4
    rep = solve(m, [y], strategy="wazewski")
    assert rep.solution is not None
    x = rep.solution[0]
    assert abs(x) < 1.0
    assert abs(np.arctan(x) - y) <= 1e-8
    print(f"[PASS] criterion 2: rho(1) = {rho:.6f} vs pi/4, boundary target solved at x = {x:.6f}")


def test_criterion_3_ball_inclusion_sweeps(battery):
    for label, cert in battery["certs"].items():
        v = cert.verification
        assert v["targets"] == 64, label
        assert v["completed"] == 64, label
        assert v["inside"] == 64, label
        assert v["max_distance"] <= cert.r, label
    print("[PASS] criterion 3: 4 maps x 64 boundary targets, 100% solved inside B_r")


def test_criterion_4_lift_fidelity_and_length(battery):
    checked = 0
    for label, model, x0, w, out in battery["records"]:
        if not out.status.is_complete:
            continue
        traj = out.trajectory
        w_norm = float(np.linalg.norm(w))
        y0 = evaluate(model, x0)
        drift = max(
            float(np.linalg.norm(evaluate(model, p) - (y0 + t * w)))
            for t, p in zip(traj.times, traj.points)
        )
        assert drift <= 10.0 * 1e-9 * w_norm, (label, drift)
        mu_min = float(np.min(traj.mu_values))
        assert traj.length * mu_min <= w_norm * (1.0 + 1e-6), label
        checked += 1
    assert checked >= 260
    print(f"[PASS] criterion 4: {checked} complete lifts satisfy drift and length bounds")


def test_criterion_5_singularity_detection():
    m = registry_get("exp1d")
    out = lift_line_square(m, [0.0], [-2.0])
    assert out.status.kind in ("Singular", "Escaped")
    assert 0.45 <= out.status.t <= 0.5

    rep = star_probe(registry_get("arctan1d"), [0.0], t_budget=2.0)
    assert len(rep.reaches) == 2
    for reach in rep.reaches:
        assert abs(reach - np.pi / 2) <= 1e-2
    print(
        f"[PASS] criterion 5: exp1d stops at t = {out.status.t:.6f}, "
        f"arctan star reach = {rep.reaches[0]:.6f} both ways"
    )


def test_criterion_6_monodromy():
    m = registry_get("complex_exp")
    rep = fibre_enumerate(m, [1.0, 0.0], loop=DIAMOND, max_points=3)
    assert len(rep.points) == 3
    for s in rep.monodromy_shifts:
        assert np.allclose(s, [0.0, 2.0 * np.pi], atol=1e-6)
    for k, (p, res) in enumerate(zip(rep.points, rep.residuals)):
        assert np.allclose(p, [0.0, 2.0 * np.pi * k], atol=1e-6)
        assert res <= 1e-8
    print("[PASS] criterion 6: loop displacement (0, 2pi) and fibre points (0, 2pi k)")


def test_criterion_7_ps_diagnostics():
    mono = registry_get("monotone1d")
    out, verdict = gradient_flow(mono, [2.0], [0.0])
    assert verdict.kind == "converged"
    assert abs(out.trajectory.points[-1][0]) <= 1e-6

    arct = registry_get("arctan1d")
    _, ps = gradient_flow(arct, [0.0], [2.0])
    assert ps.kind == "ps_candidate"
    assert abs(ps.level - 0.0925) <= 1e-3

    entry = katriel_check(registry_get("exp1d"), [1.0], [0.5, 2.0], seed=0)
    by_level = {lv["level"]: lv["verdict"] for lv in entry.evidence["levels"]}
    assert by_level[0.5] == "HeuristicPass"
    assert by_level[2.0] == "HeuristicFail"
    print(
        f"[PASS] criterion 7: flow converged at |x*| <= 1e-6, "
        f"PS plateau {ps.level:.6f}, katriel split at levels 0.5 / 2.0"
    )


def test_criterion_8_weighted_machinery(battery):
    weight = lambda rho: 1.0 + rho
    checked = 0
    for label, model, x0, w, out in battery["records"]:
        if not out.status.is_complete:
            continue
        traj = out.trajectory
        wl = weighted_path_length(traj, weight, x_ref=x0)
        radii = np.linalg.norm(traj.points - x0, axis=1)
        bound = float(np.min(traj.mu_values * (1.0 + radii)))
        assert wl * bound <= float(np.linalg.norm(w)) * (1.0 + 1e-6), label
        checked += 1
    assert checked >= 260

    ts = np.linspace(0.0, 1.0, 4001)
    radial = LiftTrajectory(
        times=ts, points=ts[:, None], mu_values=np.ones_like(ts), length=1.0
    )
    wl = weighted_path_length(radial, weight)
    assert abs(wl - np.log(2.0)) <= 1e-4
    print(
        f"[PASS] criterion 8: weighted bound on {checked} lifts, "
        f"radial weighted length = {wl:.6f} vs ln 2"
    )


CLI_JOBS = [
    (
        0,
        {
            "map": "identity_2",
            "command": "certify",
            "x0": [0.0, 0.0],
            "r": 1.0,
            "verify_targets": 8,
        },
    ),
    (
        0,
        {
            "map": "arctan1d",
            "command": "certify",
            "x0": [0.0],
            "r": 1.0,
            "grid_size": 4000,
            "verify_targets": 4,
            "seed": 1,
        },
    ),
    (0, {"map": "monotone1d", "command": "solve", "y": [7.0]}),
    (3, {"map": "arctan1d", "command": "solve", "y": [2.0]}),
    (0, {"map": "arctan1d", "command": "star", "seed_point": [0.0], "t_budget": 2.0}),
    (
        0,
        {
            "map": "complex_exp",
            "command": "fibre",
            "y": [1.0, 0.0],
            "loop": DIAMOND,
            "max_points": 3,
        },
    ),
    (
        0,
        {
            "map": "arctan1d",
            "command": "diagnose",
            "x0": [0.0],
            "r": 10.0,
            "grid_size": 512,
        },
    ),
    (
        0,
        {
            "map": "monotone1d",
            "command": "indicators",
            "x0": [0.0],
            "r": 3.0,
            "mode": "sampled",
            "seed": 7,
        },
    ),
]


def _strip_timestamps(text: str) -> str:
    return "\n".join(ln for ln in text.splitlines() if '"timestamp"' not in ln)


def test_criterion_9_cli_determinism(tmp_path, capsys):
    reports = 0
    for k, (expected, job) in enumerate(CLI_JOBS):
        out_dir = tmp_path / f"job_{k}"
        assert run_job(dict(job), out_override=out_dir) == expected, job
        first = {
            p.name: p.read_bytes() for p in sorted(out_dir.iterdir()) if p.is_file()
        }
        assert "report.json" in first
        json.loads(first["report.json"])  # well-formed
        assert run_job(dict(job), out_override=out_dir) == expected, job
        for p in sorted(out_dir.iterdir()):
            if p.name == "report.json":
                assert _strip_timestamps(p.read_text()) == _strip_timestamps(
                    first[p.name].decode()
                ), (job, p.name)
            else:
                assert p.read_bytes() == first[p.name], (job, p.name)
        reports += 1
    capsys.readouterr()
    print(f"[PASS] criterion 9: {reports} CLI jobs rerun byte-identically modulo timestamps")
