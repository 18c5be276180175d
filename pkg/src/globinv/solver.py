"""High-level solving built on line lifting.

solve() turns f(x)=y into a lift of the segment from f(x_seed) to y and
polishes the endpoint with damped Newton steps.  star_probe() bisects along
codomain rays for the largest liftable target.  fibre_enumerate() collects
distinct solutions by multistart or by lifting closed polygonal loops
(monodromy).  trivialize() sends nearby points of a submersion's domain to
the fibre over y along horizontal lifts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .certificates import RadiusCertificate
from .errors import LiftAborted, LoopNotInImage, OutOfRange, StrategyMismatch
from .lifting import (
    FlowVerdict,
    LiftOptions,
    LiftOutcome,
    gradient_flow,
    lift_line_horizontal,
    lift_line_square,
)
from .maps import MapModel, evaluate, jacobian

Array = np.ndarray

SOLVE_TOL = 1e-8

_STRATEGY_NAMES = {
    "auto": "auto",
    "wazewski": "Wazewski",
    "horizontal": "Horizontal",
    "gradient_flow": "GradientFlow",
    "gradientflow": "GradientFlow",
}


@dataclass(frozen=True)
class SolveReport:
    y: Array
    x_seed: Array
    strategy: str
    solution: Optional[Array]
    residual: Optional[float]
    outcome: LiftOutcome
    flow_verdict: Optional[FlowVerdict] = None
    within_radius: Optional[bool] = None

    def to_json_dict(self) -> dict:
        out = {
            "y": [float(v) for v in self.y],
            "x_seed": [float(v) for v in self.x_seed],
            "strategy": self.strategy,
            "solution": None if self.solution is None else [float(v) for v in self.solution],
            "residual": None if self.residual is None else float(self.residual),
            "status": self.outcome.status.to_json_dict(),
        }
        if self.flow_verdict is not None:
            out["flow_verdict"] = self.flow_verdict.to_json_dict()
        if self.within_radius is not None:
            out["within_radius"] = bool(self.within_radius)
        return out


@dataclass(frozen=True)
class StarReport:
    x_seed: Array
    y0: Array
    directions: Array
    reaches: tuple
    reasons: tuple
    t_budget: float

    def to_json_dict(self) -> dict:
        return {
            "x_seed": [float(v) for v in self.x_seed],
            "y0": [float(v) for v in self.y0],
            "t_budget": float(self.t_budget),
            "rays": [
                {
                    "direction": [float(c) for c in d],
                    "reach": float(t),
                    "reason": reason,
                }
                for d, t, reason in zip(self.directions, self.reaches, self.reasons)
            ],
        }


@dataclass(frozen=True)
class FibreReport:
    y: Array
    points: tuple
    residuals: tuple
    monodromy_shifts: tuple
    discreteness_gap: Optional[float]

    def to_json_dict(self) -> dict:
        return {
            "y": [float(v) for v in self.y],
            "points": [[float(v) for v in p] for p in self.points],
            "residuals": [float(r) for r in self.residuals],
            "monodromy_shifts": [[float(v) for v in s] for s in self.monodromy_shifts],
            "discreteness_gap": None
            if self.discreteness_gap is None
            else float(self.discreteness_gap),
        }


def _newton_polish(model: MapModel, x: Array, y: Array, max_iter: int = 12):
    """Damped Newton / minimum-norm Gauss-Newton refinement of an approximate
    solution.  Returns (point, residual); stops at stagnation or rank loss."""
    x = np.array(x, dtype=float)
    r = evaluate(model, x) - y
    best = float(np.linalg.norm(r))
    for _ in range(max_iter):
        if best <= 1e-15 * (1.0 + float(np.linalg.norm(y))):
            break
        J = jacobian(model, x)
        U, s, Vt = np.linalg.svd(J, full_matrices=False)
        if s.size == 0 or s[-1] <= s[0] * 1e-13 or s[0] == 0.0:
            break
        dx = -(Vt.T @ ((U.T @ r) / s))
        step = 1.0
        improved = False
        for _ in range(10):
            xn = x + step * dx
            try:
                rn = evaluate(model, xn) - y
            except Exception:
                step *= 0.5
                continue
            nn = float(np.linalg.norm(rn))
            if nn < best:
                x, r, best = xn, rn, nn
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return x, best


def _resolve_strategy(model: MapModel, strategy: str) -> str:
    key = strategy.lower().replace("-", "_")
    if key not in _STRATEGY_NAMES:
        raise StrategyMismatch(f"unknown strategy {strategy!r}")
    name = _STRATEGY_NAMES[key]
    if name == "auto":
        if model.n == model.m:
            return "Wazewski"
        if model.m < model.n:
            return "Horizontal"
        return "GradientFlow"
    if name == "Wazewski" and model.n != model.m:
        raise StrategyMismatch("Wazewski lifting needs a square map")
    if name == "Horizontal" and model.m > model.n:
        raise StrategyMismatch("horizontal lifting needs m <= n")
    return name


def solve(
    model: MapModel,
    y,
    x_seed=None,
    strategy: str = "auto",
    opts: Optional[LiftOptions] = None,
    certificate: Optional[RadiusCertificate] = None,
    tol: float = SOLVE_TOL,
) -> SolveReport:
    """Solve f(x)=y by lifting the segment from f(x_seed) to y (or by
    gradient descent on the residual), then polishing the endpoint.

    The solution field is set only when |f(x*) - y| <= tol holds under direct
    re-evaluation.  With a certificate supplied, within_radius records whether
    the solution landed strictly inside the certified domain ball.
    """
    yv = np.asarray(y, dtype=float)
    if yv.shape != (model.m,):
        raise OutOfRange(f"solve: target must have shape ({model.m},)")
    if x_seed is None:
        seed = (
            np.array(model.base_point, dtype=float)
            if model.base_point is not None
            else np.zeros(model.n)
        )
    else:
        seed = np.asarray(x_seed, dtype=float)
    name = _resolve_strategy(model, strategy)
    lift_opts = opts or LiftOptions()

    flow_verdict = None
    if name == "GradientFlow":
        outcome, flow_verdict = gradient_flow(model, seed, yv, lift_opts)
        candidate = outcome.trajectory.points[-1]
        attempt_polish = flow_verdict.kind == "converged"
    else:
        w = yv - evaluate(model, seed)
        lift = lift_line_square if name == "Wazewski" else lift_line_horizontal
        outcome = lift(model, seed, w, lift_opts)
        candidate = outcome.trajectory.points[-1]
        attempt_polish = outcome.status.is_complete

    solution = None
    residual = None
    if attempt_polish:
        point, res = _newton_polish(model, candidate, yv)
        residual = res
        if res <= tol:
            solution = point
    else:
        residual = float(np.linalg.norm(evaluate(model, candidate) - yv))

    within = None
    if certificate is not None:
        within = bool(
            solution is not None
            and float(np.linalg.norm(solution - certificate.x0)) < certificate.r
        )

    return SolveReport(
        y=yv,
        x_seed=seed,
        strategy=name,
        solution=solution,
        residual=residual,
        outcome=outcome,
        flow_verdict=flow_verdict,
        within_radius=within,
    )


def star_probe(
    model: MapModel,
    x_seed,
    directions=None,
    t_budget: float = 10.0,
    opts: Optional[LiftOptions] = None,
    rel_tol: float = 1e-3,
) -> StarReport:
    """Probe the star of reachable targets around y0 = f(x_seed).

    Per direction, tries the full budget first; on failure bisects for the
    largest t whose lift completes, to within rel_tol * t_budget.  The reach
    is a numerical witness of the star boundary, not a proof.  A lift that
    dies by step collapse is reported as Singular (that is how the integrator
    manifests a boundary singularity).
    """
    if model.n != model.m:
        raise StrategyMismatch("star_probe needs a square map")
    if t_budget <= 0.0:
        raise OutOfRange("star_probe: t_budget must be positive")
    seed = np.asarray(x_seed, dtype=float)
    y0 = evaluate(model, seed)
    if directions is None:
        dirs = []
        for i in range(model.m):
            e = np.zeros(model.m)
            e[i] = 1.0
            dirs.append(e.copy())
            dirs.append(-e)
        dirs = np.array(dirs)
    else:
        dirs = np.asarray(directions, dtype=float)
        if dirs.ndim == 1:
            dirs = dirs[None, :]
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(norms == 0.0):
            raise OutOfRange("star_probe: zero direction")
        dirs = dirs / norms[:, None]
    lift_opts = opts or LiftOptions()

    reaches = []
    reasons = []
    for d in dirs:
        out = lift_line_square(model, seed, t_budget * d, lift_opts)
        if out.status.is_complete:
            reaches.append(float(t_budget))
            reasons.append("BudgetExhausted")
            continue
        lo, hi = 0.0, float(t_budget)
        fail_kind = out.status.kind
        while hi - lo > rel_tol * t_budget:
            mid = 0.5 * (lo + hi)
            out = lift_line_square(model, seed, mid * d, lift_opts)
            if out.status.is_complete:
                lo = mid
            else:
                hi = mid
                fail_kind = out.status.kind
        reaches.append(lo)
        reasons.append("Escaped" if fail_kind == "Escaped" else "Singular")
    return StarReport(
        x_seed=seed,
        y0=y0,
        directions=dirs,
        reaches=tuple(reaches),
        reasons=tuple(reasons),
        t_budget=float(t_budget),
    )


def _dedup_threshold(points) -> float:
    max_norm = max((float(np.linalg.norm(p)) for p in points), default=0.0)
    return 1e-5 * max_norm + 1e-8


def fibre_enumerate(
    model: MapModel,
    y,
    seeds: Optional[Sequence] = None,
    loop: Optional[Sequence] = None,
    x_seed=None,
    opts: Optional[LiftOptions] = None,
    max_points: int = 8,
    tol: float = SOLVE_TOL,
) -> FibreReport:
    """Enumerate points of the fibre over y.

    Multistart mode solves from each seed and deduplicates.  Loop mode lifts
    a closed polygonal loop based at y; each traversal that lands on a new
    point records a monodromy shift and continues from there, until a
    traversal closes onto a known point or max_points is reached.
    """
    yv = np.asarray(y, dtype=float)
    if (seeds is None) == (loop is None):
        raise OutOfRange("fibre_enumerate: supply exactly one of seeds or loop")
    lift_opts = opts or LiftOptions()

    if seeds is not None:
        found = []
        residuals = []
        for s in seeds:
            rep = solve(model, yv, x_seed=s, opts=lift_opts, tol=tol)
            if rep.solution is None:
                continue
            thr = _dedup_threshold(found + [rep.solution])
            if all(float(np.linalg.norm(rep.solution - p)) > thr for p in found):
                found.append(rep.solution)
                residuals.append(rep.residual)
                if len(found) >= max_points:
                    break
        return _finish_fibre(yv, found, residuals, [])

    if model.n != model.m:
        raise StrategyMismatch("loop lifting needs a square map")
    vertices = [np.asarray(v, dtype=float) for v in loop]
    if not vertices:
        raise OutOfRange("fibre_enumerate: empty loop")
    if float(np.linalg.norm(vertices[0] - yv)) > 1e-12:
        vertices = [yv] + vertices
    if float(np.linalg.norm(vertices[-1] - vertices[0])) > 1e-12:
        vertices = vertices + [vertices[0]]

    start = (
        np.asarray(x_seed, dtype=float)
        if x_seed is not None
        else (
            np.array(model.base_point, dtype=float)
            if model.base_point is not None
            else np.zeros(model.n)
        )
    )
    start, res0 = _newton_polish(model, start, yv)
    if res0 > tol:
        raise LoopNotInImage("fibre_enumerate: no fibre point found at the loop base")

    points = [start]
    residuals = [res0]
    shifts = []
    x_cur = start
    first_segment = True
    while len(points) < max_points:
        loop_start = x_cur
        aborted = False
        for a, b in zip(vertices, vertices[1:]):
            w = b - evaluate(model, x_cur)
            out = lift_line_square(model, x_cur, w, lift_opts)
            if not out.status.is_complete:
                if first_segment:
                    raise LoopNotInImage(
                        f"fibre_enumerate: first segment lift failed ({out.status.kind})"
                    )
                aborted = True
                break
            first_segment = False
            x_cur, _ = _newton_polish(model, out.trajectory.points[-1], b)
        if aborted:
            break
        x_cur, res = _newton_polish(model, x_cur, yv)
        if res > tol:
            break
        shifts.append(x_cur - loop_start)
        thr = _dedup_threshold(points + [x_cur])
        if all(float(np.linalg.norm(x_cur - p)) > thr for p in points):
            points.append(x_cur)
            residuals.append(res)
        else:
            break
    return _finish_fibre(yv, points, residuals, shifts)


def _finish_fibre(yv, points, residuals, shifts) -> FibreReport:
    gap = None
    if len(points) >= 2:
        gap = min(
            float(np.linalg.norm(p - q))
            for i, p in enumerate(points)
            for q in points[i + 1 :]
        )
    return FibreReport(
        y=yv,
        points=tuple(points),
        residuals=tuple(residuals),
        monodromy_shifts=tuple(shifts),
        discreteness_gap=gap,
    )


def trivialize(
    model: MapModel,
    y,
    points: Sequence,
    opts: Optional[LiftOptions] = None,
    tol: float = SOLVE_TOL,
):
    """Local trivialization for a submersion (m < n): each point p is sent
    along the horizontal lift of the segment from f(p) to y, landing on the
    fibre over y.  Returns a list of (f(p), fibre_point) pairs."""
    if model.m >= model.n:
        raise StrategyMismatch("trivialize needs a submersion with m < n")
    yv = np.asarray(y, dtype=float)
    lift_opts = opts or LiftOptions()
    out_pairs = []
    for p in points:
        pv = np.asarray(p, dtype=float)
        fp = evaluate(model, pv)
        outcome = lift_line_horizontal(model, pv, yv - fp, lift_opts)
        if not outcome.status.is_complete:
            raise LiftAborted(
                f"trivialize: lift from point {pv.tolist()} ended "
                f"{outcome.status.kind}",
                outcome=outcome,
            )
        q, res = _newton_polish(model, outcome.trajectory.points[-1], yv)
        if res > tol:
            raise LiftAborted(
                "trivialize: endpoint polish left residual above tolerance",
                outcome=outcome,
            )
        out_pairs.append((fp, q))
    return out_pairs
