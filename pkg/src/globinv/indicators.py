"""Quantitative invertibility indicators and radial profiles.

For a linear map T given by an m x n matrix J:

  inj(J) = inf_{|v|=1} |J v|      (0 whenever m < n, else the smallest
                                   singular value of J)
  sur(J) = inf_{|u|=1} |J^T u|    (0 whenever n < m, else the smallest
                                   singular value of J^T)

For invertible square J both equal 1/||J^{-1}||.  A radial profile tracks
eta(rho) = inf of the pointwise indicator over the closed ball of radius rho,
and the accessible-radius function integrates eta with a right-endpoint rule,
which under-estimates the integral of a nonincreasing eta and therefore keeps
every downstream certificate conservative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm, qmc

from .errors import DimensionMismatch, MissingBound, NonFinite, OutOfRange
from .maps import MapModel, jacobian

Array = np.ndarray


def _matrix(J) -> Array:
    arr = np.asarray(J, dtype=float)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite("matrix has non-finite entries")
    return arr


def inj_indicator(J) -> float:
    """Smallest stretch of J over the unit sphere of the domain."""
    arr = _matrix(J)
    m, n = arr.shape
    if m < n:
        return 0.0
    return float(np.linalg.svd(arr, compute_uv=False)[-1])


def sur_indicator(J) -> float:
    """Smallest stretch of the adjoint J^T over the unit sphere of the codomain."""
    arr = _matrix(J)
    m, n = arr.shape
    if n < m:
        return 0.0
    return float(np.linalg.svd(arr.T, compute_uv=False)[-1])


@dataclass(frozen=True)
class FredholmData:
    rank: int
    dim_ker: int
    dim_coker: int
    index: int


def fredholm_data(J, tol: float = 1e-10) -> FredholmData:
    """Numerical rank and kernel/cokernel dimensions at relative tolerance tol."""
    if not tol > 0.0:
        raise OutOfRange(f"fredholm_data: tol must be positive, got {tol}")
    arr = _matrix(J)
    m, n = arr.shape
    s = np.linalg.svd(arr, compute_uv=False)
    smax = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0.0 else 0
    return FredholmData(rank=rank, dim_ker=n - rank, dim_coker=m - rank, index=n - m)


@dataclass(frozen=True)
class MuProfile:
    """eta(rho) on an increasing radii grid starting at 0.

    certified means eta came from an analytic lower bound; otherwise it is a
    sampled estimate (an upper bound for the true infimum).  eta_values are
    nonincreasing by construction.
    """

    base_point: Array
    radii: Array
    eta_values: Array
    certified: bool
    indicator_kind: str
    sample_count: int = 0
    seed: Optional[int] = None

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        eta = np.asarray(self.eta_values, dtype=float)
        if radii.ndim != 1 or radii.size < 2:
            raise OutOfRange("MuProfile: need at least two grid radii")
        if radii[0] != 0.0 or np.any(np.diff(radii) <= 0.0):
            raise OutOfRange("MuProfile: radii must increase strictly from 0")
        if eta.shape != radii.shape:
            raise DimensionMismatch("MuProfile: eta_values shape differs from radii")
        if not np.all(np.isfinite(eta)) or np.any(eta < 0.0):
            raise NonFinite("MuProfile: eta_values must be finite and nonnegative")
        if np.any(np.diff(eta) > 0.0):
            raise OutOfRange("MuProfile: eta_values must be nonincreasing")
        if self.indicator_kind not in ("inj", "sur"):
            raise OutOfRange(f"MuProfile: bad indicator_kind {self.indicator_kind!r}")
        object.__setattr__(self, "base_point", np.asarray(self.base_point, dtype=float))
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "eta_values", eta)

    @property
    def r_max(self) -> float:
        return float(self.radii[-1])

    def to_json_dict(self) -> dict:
        return {
            "base_point": [float(v) for v in self.base_point],
            "radii": [float(v) for v in self.radii],
            "eta_values": [float(v) for v in self.eta_values],
            "certified": bool(self.certified),
            "indicator_kind": self.indicator_kind,
            "seed": None if self.seed is None else int(self.seed),
        }


def unit_ball_points(n: int, count: int, seed: int) -> Array:
    """Deterministic low-discrepancy points in the closed unit ball of R^n.

    Scrambled Sobol points drive a radial-direction construction: n
    coordinates map through the normal quantile to a direction, the last
    coordinate maps through u^(1/n) to a radius.
    """
    if count < 1:
        raise OutOfRange("unit_ball_points: count must be >= 1")
    size = 1
    while size < count:
        size *= 2
    sampler = qmc.Sobol(d=n + 1, scramble=True, seed=seed)
    u = sampler.random(size)[:count]
    z = norm.ppf(np.clip(u[:, :n], 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(z, axis=1)
    # a zero direction is essentially impossible with scrambling; guard anyway
    degenerate = norms == 0.0
    if np.any(degenerate):
        z[degenerate] = np.eye(n)[0]
        norms[degenerate] = 1.0
    radii = u[:, n] ** (1.0 / n)
    return z / norms[:, None] * radii[:, None]


def _indicator_at(model: MapModel, x: Array, kind: str) -> float:
    J = jacobian(model, x)
    return sur_indicator(J) if kind == "sur" else inj_indicator(J)


def mu_profile(
    model: MapModel,
    x0,
    r_max: float,
    grid_size: int,
    mode: str = "certified",
    sample_count: int = 64,
    indicator_kind: str = "sur",
    seed: int = 0,
) -> MuProfile:
    """Radial indicator profile around x0 on grid_size equal cells of [0, r_max].

    Certified mode evaluates the model's analytic mu_bound.  Bounds are
    anchored at the model's canonical base point; a profile centered elsewhere
    shifts the radius by the offset, keeping the bound valid (enclosing ball).
    Sampled mode takes sample_count low-discrepancy points per ball and
    records the running minimum of the pointwise indicator, an optimistic
    (upper) estimate of the true infimum.
    """
    x0v = np.asarray(x0, dtype=float)
    if x0v.shape != (model.n,):
        raise DimensionMismatch(
            f"mu_profile: x0 shape {x0v.shape}, expected ({model.n},)"
        )
    if not r_max > 0.0:
        raise OutOfRange(f"mu_profile: r_max must be positive, got {r_max}")
    if grid_size < 1:
        raise OutOfRange(f"mu_profile: grid_size must be >= 1, got {grid_size}")
    if indicator_kind not in ("inj", "sur"):
        raise OutOfRange(f"mu_profile: bad indicator_kind {indicator_kind!r}")
    radii = np.linspace(0.0, float(r_max), grid_size + 1)

    if mode == "certified":
        if model.mu_bound is None:
            raise MissingBound(f"map {model.name!r} carries no analytic bound")
        base = (
            np.zeros(model.n)
            if model.base_point is None
            else np.asarray(model.base_point, dtype=float)
        )
        shift = float(np.linalg.norm(x0v - base))
        eta = np.array([float(model.mu_bound(shift + rho)) for rho in radii])
        if not np.all(np.isfinite(eta)):
            raise NonFinite("mu_profile: analytic bound returned non-finite values")
        eta = np.maximum(eta, 0.0)
        eta = np.minimum.accumulate(eta)
        return MuProfile(
            base_point=x0v,
            radii=radii,
            eta_values=eta,
            certified=True,
            indicator_kind=indicator_kind,
            sample_count=0,
            seed=None,
        )

    if mode != "sampled":
        raise OutOfRange(f"mu_profile: mode must be 'certified' or 'sampled', got {mode!r}")
    ball = unit_ball_points(model.n, sample_count, seed)
    center_value = _indicator_at(model, x0v, indicator_kind)
    eta = np.empty(radii.size)
    eta[0] = center_value
    for k in range(1, radii.size):
        pts = x0v[None, :] + radii[k] * ball
        vals = [_indicator_at(model, p, indicator_kind) for p in pts]
        eta[k] = min(center_value, min(vals))
    eta = np.minimum.accumulate(eta)
    return MuProfile(
        base_point=x0v,
        radii=radii,
        eta_values=eta,
        certified=False,
        indicator_kind=indicator_kind,
        sample_count=int(sample_count),
        seed=int(seed),
    )


def rho_of_r(profile: MuProfile, r: float) -> float:
    """Accessible codomain radius: right-endpoint quadrature of eta up to r.

    Partial cells use the eta value at the right endpoint of the enclosing
    grid cell, so the result never exceeds the true integral of a
    nonincreasing eta.
    """
    if not r > 0.0:
        raise OutOfRange(f"rho_of_r: r must be positive, got {r}")
    radii = profile.radii
    eta = profile.eta_values
    rmax = float(radii[-1])
    if r > rmax * (1.0 + 1e-12):
        raise OutOfRange(f"rho_of_r: r={r} exceeds profile r_max={rmax}")
    r = min(float(r), rmax)
    j = int(np.searchsorted(radii, r, side="right")) - 1
    total = float(np.sum(eta[1 : j + 1] * np.diff(radii[: j + 1])))
    if j < radii.size - 1 and r > radii[j]:
        total += float(eta[j + 1]) * (r - float(radii[j]))
    return total
