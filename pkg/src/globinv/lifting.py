"""Path lifting through the derivative, and the residual gradient flow.

Straight lines p(t) = f(x0) + t w in the codomain are lifted back to the
domain by integrating

    q' = J(q)^{-1} w                     (square Jacobian)
    q' = J(q)^T (J(q) J(q)^T)^{-1} w     (wide Jacobian, minimum-norm route)

from q(0) = x0 over t in [0, 1], so f(q(t)) tracks the line exactly in
continuous time.  Both velocities come out of one SVD per evaluation, which
also yields the local invertibility indicator mu used for singularity
detection.  The integrator is an embedded Dormand-Prince 4(5) pair with a
decay-rate step guard so the solver slows down near singular loci instead of
jumping across them.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, NonFinite, OutOfRange, TooFewPoints
from .maps import MapModel, evaluate, jacobian

Array = np.ndarray

# ---------------------------------------------------------------------------
# Dormand-Prince 4(5) tableau (FSAL: stage 7 sits at the 5th-order solution)

_DP_A = (
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
)
# 5th-order minus 4th-order weights, applied to all seven stages
_DP_ERR = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)

_SAFETY_DIV = 16.0  # internal controller runs tighter than the public tolerance
_H_MIN = 1e-14
_H_MAX = 1e15

# gradient-flow verdict constants
_PS_STALL_TOL = 2e-5  # absolute F stall per time-doubling window
_PS_GRAD_TOL = 1e-3
_STAB_TOL = 1e-7


@dataclass(frozen=True)
class LiftOptions:
    """Shared numerical controls for every lifting operation."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    mu_floor: float = 1e-8
    r_escape: Optional[float] = 1e6
    max_steps: int = 20000
    record_stride: int = 1
    t_checkpoints: tuple = ()

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise OutOfRange("LiftOptions: tolerances must be positive")
        if self.mu_floor < 0.0:
            raise OutOfRange("LiftOptions: mu_floor must be nonnegative")
        if self.r_escape is not None and not self.r_escape > 0.0:
            raise OutOfRange("LiftOptions: r_escape must be positive or None")
        if self.max_steps < 1 or self.record_stride < 1:
            raise OutOfRange("LiftOptions: max_steps and record_stride must be >= 1")
        cps = tuple(float(c) for c in self.t_checkpoints)
        if any(not c > 0.0 for c in cps) or any(b <= a for a, b in zip(cps, cps[1:])):
            raise OutOfRange("LiftOptions: t_checkpoints must be positive and increasing")


@dataclass(frozen=True)
class LiftStatus:
    """Terminal state of a lift: Complete, Singular(t, mu),
    Escaped(t, distance) or StepFailure(t)."""

    kind: str
    t: float
    mu: Optional[float] = None
    distance: Optional[float] = None

    @property
    def is_complete(self) -> bool:
        return self.kind == "Complete"

    @staticmethod
    def complete(t: float) -> "LiftStatus":
        return LiftStatus("Complete", float(t))

    @staticmethod
    def singular(t: float, mu: float) -> "LiftStatus":
        return LiftStatus("Singular", float(t), mu=float(mu))

    @staticmethod
    def escaped(t: float, distance: float) -> "LiftStatus":
        return LiftStatus("Escaped", float(t), distance=float(distance))

    @staticmethod
    def step_failure(t: float) -> "LiftStatus":
        return LiftStatus("StepFailure", float(t))

    def to_json_dict(self) -> dict:
        out = {"kind": self.kind, "t": float(self.t)}
        if self.mu is not None:
            out["mu"] = float(self.mu)
        if self.distance is not None:
            out["distance"] = float(self.distance)
        return out


@dataclass(frozen=True)
class LiftTrajectory:
    """Recorded sample of a lift: times, domain points, local indicator values,
    and the accumulated chord length over every accepted step."""

    times: Array
    points: Array
    mu_values: Array
    length: float
    weighted_length: Optional[float] = None

    def to_csv(self, path_or_handle) -> None:
        """Columns t, x_1..x_n, mu, cumulative_length (chords of these rows)."""
        n = self.points.shape[1]
        header = ",".join(["t"] + [f"x_{i + 1}" for i in range(n)] + ["mu", "cumulative_length"])
        rows = [header]
        cum = 0.0
        for k in range(self.times.size):
            if k > 0:
                cum += float(np.linalg.norm(self.points[k] - self.points[k - 1]))
            cells = [repr(float(self.times[k]))]
            cells += [repr(float(v)) for v in self.points[k]]
            cells += [repr(float(self.mu_values[k])), repr(cum)]
            rows.append(",".join(cells))
        text = "\n".join(rows) + "\n"
        if isinstance(path_or_handle, io.TextIOBase):
            path_or_handle.write(text)
        else:
            with open(path_or_handle, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)


@dataclass(frozen=True)
class LiftOutcome:
    trajectory: LiftTrajectory
    status: LiftStatus
    target_residual: float
    max_drift: float


@dataclass(frozen=True)
class FlowVerdict:
    """converged (root or critical point), ps_candidate (residual energy
    plateaus at `level` while the gradient vanishes and the iterates keep
    moving), or diverged."""

    kind: str
    level: Optional[float] = None
    grad_norm: float = 0.0


class _StageSingular(Exception):
    def __init__(self, mu: float):
        self.mu = mu


class _StageBad(Exception):
    pass


def _norm(v: Array) -> float:
    return float(np.linalg.norm(v))


def _min_norm_velocity(J: Array, w: Array, mu_floor: float):
    """Solve J v = w through the SVD (exact inverse for square J, the
    minimum-norm right inverse J^T (J J^T)^{-1} otherwise).  Returns (v, mu)
    where mu is the smallest singular value, and raises when mu sits below
    the floor or the data goes non-finite."""
    if not np.all(np.isfinite(J)):
        raise _StageBad()
    U, s, Vt = np.linalg.svd(J, full_matrices=False)
    mu = float(s[-1])
    if not np.isfinite(mu) or mu <= 0.0 or mu < mu_floor:
        raise _StageSingular(mu)
    v = Vt.T @ ((U.T @ w) / s)
    if not np.all(np.isfinite(v)):
        raise _StageBad()
    return v, mu


def _dp_attempt(vel, q: Array, k1: Array, h: float):
    """One Dormand-Prince attempt from q with slope k1.  Returns
    (q5, k7, extra7, err_vec); vel(x) -> (slope, extra)."""
    ks = [k1]
    for i in range(1, 6):
        qi = q + h * (np.stack(ks, axis=1) @ _DP_A[i])
        if not np.all(np.isfinite(qi)):
            raise _StageBad()
        vi, _ = vel(qi)
        ks.append(vi)
    q5 = q + h * (np.stack(ks, axis=1) @ _DP_A[6])
    if not np.all(np.isfinite(q5)):
        raise _StageBad()
    k7, extra7 = vel(q5)
    ks.append(k7)
    err = h * (np.stack(ks, axis=1) @ _DP_ERR)
    return q5, k7, extra7, err


class _Recorder:
    def __init__(self, stride: int):
        self.stride = stride
        self.times: list = []
        self.points: list = []
        self.mus: list = []
        self._since = 0

    def record(self, t: float, x: Array, mu: float, force: bool = False):
        if self.times and not force and self._since + 1 < self.stride:
            self._since += 1
            return
        if self.times and abs(self.times[-1] - t) < 1e-300:
            return
        self.times.append(float(t))
        self.points.append(np.array(x, dtype=float))
        self.mus.append(float(mu))
        self._since = 0

    def force_last(self, t: float, x: Array, mu: float):
        if not self.times or self.times[-1] != t:
            self.times.append(float(t))
            self.points.append(np.array(x, dtype=float))
            self.mus.append(float(mu))

    def build(self, length: float) -> LiftTrajectory:
        return LiftTrajectory(
            times=np.array(self.times),
            points=np.stack(self.points, axis=0),
            mu_values=np.array(self.mus),
            length=float(length),
        )


def _lift_line(model: MapModel, x0, w, opts: LiftOptions) -> LiftOutcome:
    x0v = np.asarray(x0, dtype=float)
    wv = np.asarray(w, dtype=float)
    if x0v.shape != (model.n,):
        raise DimensionMismatch(f"lift: x0 shape {x0v.shape}, expected ({model.n},)")
    if wv.shape != (model.m,):
        raise DimensionMismatch(f"lift: w shape {wv.shape}, expected ({model.m},)")

    f0 = evaluate(model, x0v)
    norm_w = _norm(wv)
    complete_tol = 10.0 * opts.rel_tol * max(norm_w, 1.0) + 100.0 * opts.abs_tol
    drift_cap = max(1e3 * complete_tol, 1e-6 * max(norm_w, 1.0))
    rtol = opts.rel_tol / _SAFETY_DIV
    atol = opts.abs_tol / _SAFETY_DIV

    def vel(x):
        J = jacobian(model, x)  # NonFinite from the model surfaces as _StageBad
        return _min_norm_velocity(J, wv, opts.mu_floor)

    rec = _Recorder(opts.record_stride)
    mu0 = float(np.linalg.svd(jacobian(model, x0v), compute_uv=False)[-1])
    rec.record(0.0, x0v, mu0, force=True)
    if mu0 < opts.mu_floor:
        return LiftOutcome(rec.build(0.0), LiftStatus.singular(0.0, mu0), 0.0, 0.0)
    if norm_w == 0.0:
        rec.force_last(1.0, x0v, mu0)
        return LiftOutcome(rec.build(0.0), LiftStatus.complete(1.0), 0.0, 0.0)

    checkpoints = sorted(c for c in opts.t_checkpoints if 0.0 < c < 1.0)
    cp_idx = 0

    v0, _ = _min_norm_velocity(jacobian(model, x0v), wv, opts.mu_floor)
    h = min(0.2, 0.01 * (1.0 + _norm(x0v)) / (1.0 + _norm(v0)))
    t = 0.0
    q = x0v.copy()
    k1 = v0
    mu_prev = mu0
    length = 0.0
    max_drift = 0.0
    status = None
    last_singular_mu = None
    nsteps = 0

    while status is None:
        if t >= 1.0 - 1e-15:
            break
        if nsteps >= opts.max_steps:
            status = LiftStatus.step_failure(t)
            break
        while cp_idx < len(checkpoints) and checkpoints[cp_idx] <= t + 1e-15:
            cp_idx += 1
        h = min(h, 1.0 - t)
        if cp_idx < len(checkpoints):
            h = min(h, checkpoints[cp_idx] - t)
        try:
            q5, k7, mu_new, err = _dp_attempt(vel, q, k1, h)
            scale = atol + rtol * np.maximum(np.abs(q), np.abs(q5))
            err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
            bad = None
        except _StageSingular as exc:
            bad, err_norm = "singular", np.inf
            last_singular_mu = exc.mu
        except (_StageBad, NonFinite):
            bad, err_norm = "nonfinite", np.inf

        if bad is None and err_norm <= 1.0:
            try:
                f_new = evaluate(model, q5)
            except NonFinite:
                bad, err_norm = "nonfinite", np.inf
        if bad is None and err_norm <= 1.0:
            nsteps += 1
            h_used = h
            t_new = t + h
            if 1.0 - t_new < 1e-15:
                t_new = 1.0
            drift = _norm(f_new - (f0 + t_new * wv))
            max_drift = max(max_drift, drift)
            length += _norm(q5 - q)
            at_checkpoint = cp_idx < len(checkpoints) and abs(t_new - checkpoints[cp_idx]) <= 1e-12
            q, t, k1 = q5, t_new, k7
            rec.record(t, q, mu_new, force=at_checkpoint or t >= 1.0)
            if drift > drift_cap:
                rec.force_last(t, q, mu_new)
                status = LiftStatus.step_failure(t)
                break
            if mu_new < opts.mu_floor:
                rec.force_last(t, q, mu_new)
                status = LiftStatus.singular(t, mu_new)
                break
            dist = _norm(q - x0v)
            if opts.r_escape is not None and dist > opts.r_escape:
                rec.force_last(t, q, mu_new)
                status = LiftStatus.escaped(t, dist)
                break
            fac = 5.0 if err_norm == 0.0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
            h_next = h_used * fac
            if mu_new < mu_prev:
                guard = 0.1 * h_used * mu_new / max(mu_prev - mu_new, 1e-300)
                h_next = min(h_next, guard)
            mu_prev = mu_new
            last_singular_mu = None
            h = min(h_next, _H_MAX)
        else:
            shrink = 0.5 if not np.isfinite(err_norm) else max(0.1, min(0.5, 0.9 * err_norm ** -0.2))
            h *= shrink
            if h < _H_MIN:
                if bad == "singular" or last_singular_mu is not None:
                    status = LiftStatus.singular(
                        t, mu_prev if last_singular_mu is None else last_singular_mu
                    )
                else:
                    status = LiftStatus.step_failure(t)
                break

    final_mu = rec.mus[-1] if rec.times and rec.times[-1] == t else None
    if final_mu is None:
        final_mu = mu_prev
        rec.force_last(t, q, mu_prev)
    residual = _norm(evaluate(model, q) - (f0 + t * wv)) if np.all(np.isfinite(q)) else np.inf
    if status is None:
        status = LiftStatus.complete(1.0) if residual <= complete_tol else LiftStatus.step_failure(1.0)
    return LiftOutcome(rec.build(length), status, float(residual), float(max_drift))


def lift_line_square(model: MapModel, x0, w, opts: Optional[LiftOptions] = None) -> LiftOutcome:
    """Lift the line f(x0) + t w, t in [0, 1], through a square Jacobian."""
    if model.n != model.m:
        raise DimensionMismatch(
            f"lift_line_square: map {model.name!r} is {model.m}x{model.n}, need square"
        )
    return _lift_line(model, x0, w, opts or LiftOptions())


def lift_line_horizontal(model: MapModel, x0, w, opts: Optional[LiftOptions] = None) -> LiftOutcome:
    """Lift the line f(x0) + t w through the minimum-norm right inverse of a
    wide (m <= n) Jacobian; the velocity stays orthogonal to the kernel."""
    if model.m > model.n:
        raise DimensionMismatch(
            f"lift_line_horizontal: map {model.name!r} is {model.m}x{model.n}, need m <= n"
        )
    return _lift_line(model, x0, w, opts or LiftOptions())


def gradient_flow(model: MapModel, x0, y, opts: Optional[LiftOptions] = None):
    """Integrate x' = -grad F_y with F_y(x) = |f(x) - y|^2 / 2.

    Returns (LiftOutcome, FlowVerdict).  Recorded F values are nonincreasing
    (steps that would raise F are rejected).  Verdicts: converged when the
    state has stabilized and either the gradient is below abs_tol or the
    residual is at root scale; ps_candidate when F stalls at a level c above
    root scale while the gradient is small and the iterates keep drifting;
    diverged when the flow leaves the escape ball.
    """
    opts = opts or LiftOptions()
    x0v = np.asarray(x0, dtype=float)
    yv = np.asarray(y, dtype=float)
    if x0v.shape != (model.n,):
        raise DimensionMismatch(f"gradient_flow: x0 shape {x0v.shape}, expected ({model.n},)")
    if yv.shape != (model.m,):
        raise DimensionMismatch(f"gradient_flow: y shape {yv.shape}, expected ({model.m},)")

    def eval_state(x):
        fx = evaluate(model, x)
        J = jacobian(model, x)
        if not np.all(np.isfinite(J)):
            raise _StageBad()
        r = fx - yv
        g = J.T @ r
        F = 0.5 * float(r @ r)
        mu = float(np.linalg.svd(J, compute_uv=False)[-1])
        return -g, (mu, F, _norm(g))

    def vel(x):
        v, extra = eval_state(x)
        if not np.all(np.isfinite(v)):
            raise _StageBad()
        return v, extra

    grad_tol = opts.abs_tol
    # residual scale below which a plateau is a root, not a PS level
    res_tol = 10.0 * opts.rel_tol * max(_norm(yv), 1.0) + 100.0 * opts.abs_tol
    rtol = opts.rel_tol / _SAFETY_DIV
    atol = opts.abs_tol / _SAFETY_DIV

    v0, (mu0, F0, gn0) = vel(x0v)
    rec = _Recorder(opts.record_stride)
    rec.record(0.0, x0v, mu0, force=True)
    if gn0 <= grad_tol:
        outcome = LiftOutcome(rec.build(0.0), LiftStatus.complete(0.0), float(np.sqrt(2 * F0)), 0.0)
        return outcome, FlowVerdict("converged", level=F0, grad_norm=gn0)

    h0 = min(0.1, 0.01 * (1.0 + _norm(x0v)) / (1.0 + gn0))
    h = h0
    t = 0.0
    q = x0v.copy()
    k1, F, gn, mu = v0, F0, gn0, mu0
    length = 0.0
    status = None
    verdict = None
    cp = None  # (t, x, F) of the last checkpoint
    prev_window_dx = None
    nsteps = 0

    while status is None:
        if nsteps >= opts.max_steps:
            status = LiftStatus.step_failure(t)
            break
        try:
            q5, k7, (mu7, F7, gn7), err = _dp_attempt(vel, q, k1, h)
            scale = atol + rtol * np.maximum(np.abs(q), np.abs(q5))
            err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
            monotone_ok = F7 <= F + 1e-12 * (1.0 + abs(F))
        except (_StageBad, _StageSingular, NonFinite):
            err_norm, monotone_ok = np.inf, False

        if err_norm <= 1.0 and monotone_ok:
            nsteps += 1
            h_used = h
            length += _norm(q5 - q)
            t += h_used
            q, k1, F, gn, mu = q5, k7, F7, gn7, mu7
            rec.record(t, q, mu)
            dist = _norm(q - x0v)
            if opts.r_escape is not None and dist > opts.r_escape:
                rec.force_last(t, q, mu)
                status = LiftStatus.escaped(t, dist)
                verdict = FlowVerdict("diverged", level=F, grad_norm=gn)
                break
            if cp is None:
                cp = (t, q.copy(), F)
            elif t >= 2.0 * cp[0]:
                dF = cp[2] - F
                dx = _norm(q - cp[1])
                stabilized = dx <= _STAB_TOL * (1.0 + _norm(q))
                near_root = np.sqrt(2.0 * F) <= res_tol
                if (gn <= grad_tol or near_root) and (stabilized or near_root):
                    rec.force_last(t, q, mu)
                    status = LiftStatus.complete(t)
                    verdict = FlowVerdict("converged", level=F, grad_norm=gn)
                    break
                if (
                    dF <= _PS_STALL_TOL
                    and gn <= _PS_GRAD_TOL
                    and not near_root
                    and prev_window_dx is not None
                    and dx > 0.5 * prev_window_dx
                ):
                    rec.force_last(t, q, mu)
                    status = LiftStatus.escaped(t, dist)
                    verdict = FlowVerdict("ps_candidate", level=F, grad_norm=gn)
                    break
                prev_window_dx = dx
                cp = (t, q.copy(), F)
            fac = 5.0 if err_norm == 0.0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
            h = min(h * fac, 10.0 * max(t, h0), _H_MAX)
        else:
            h *= 0.5 if not np.isfinite(err_norm) else max(0.1, min(0.5, 0.9 * err_norm ** -0.2))
            if h < _H_MIN * max(1.0, t):
                status = LiftStatus.step_failure(t)
                break

    rec.force_last(t, q, mu)
    if verdict is None:
        if np.sqrt(2.0 * F) <= res_tol:
            verdict = FlowVerdict("converged", level=F, grad_norm=gn)
        elif gn <= _PS_GRAD_TOL:
            verdict = FlowVerdict("ps_candidate", level=F, grad_norm=gn)
        else:
            verdict = FlowVerdict("diverged", level=F, grad_norm=gn)
    residual = float(np.sqrt(2.0 * F))
    return LiftOutcome(rec.build(length), status, residual, 0.0), verdict


def path_length(trajectory: LiftTrajectory) -> float:
    """Chordal length of the recorded points."""
    if trajectory.points.shape[0] < 2:
        raise TooFewPoints("path_length: need at least two recorded points")
    return float(np.sum(np.linalg.norm(np.diff(trajectory.points, axis=0), axis=1)))


def weighted_path_length(
    trajectory: LiftTrajectory,
    weight: Callable[[float], float],
    x_ref=None,
) -> float:
    """Chordal length with each chord divided by weight(|midpoint - x_ref|).

    weight is the radial growth allowance omega; dividing by it realizes the
    line element eta(rho) |dx| with eta = 1/omega.  x_ref defaults to the
    trajectory's start point.
    """
    pts = trajectory.points
    if pts.shape[0] < 2:
        raise TooFewPoints("weighted_path_length: need at least two recorded points")
    ref = pts[0] if x_ref is None else np.asarray(x_ref, dtype=float)
    total = 0.0
    for k in range(pts.shape[0] - 1):
        mid = 0.5 * (pts[k] + pts[k + 1])
        om = float(weight(float(np.linalg.norm(mid - ref))))
        if not np.isfinite(om) or om <= 0.0:
            raise OutOfRange("weighted_path_length: weight must be positive and finite")
        total += float(np.linalg.norm(pts[k + 1] - pts[k])) / om
    return total
