"""Smooth map models and the built-in benchmark registry.

A :class:`MapModel` wraps a pure vector function f: R^n -> R^m together with an
optional analytic Jacobian and an optional certified lower bound on the local
invertibility indicator over centered balls.  Everything downstream (profiles,
lifts, certificates, the CLI) consumes models through :func:`evaluate` and
:func:`jacobian` only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, NonFinite, UnknownMap

Array = np.ndarray

# Central-difference step scale: cube root of machine epsilon.
_FD_SCALE = float(np.cbrt(np.finfo(float).eps))


@dataclass(frozen=True)
class MapModel:
    """A smooth map f: R^n -> R^m.

    eval_fn must be pure and deterministic.  jac_fn, when given, returns the
    m x n Jacobian; otherwise a central finite difference is used.  mu_bound,
    when given, is a certified lower bound for the invertibility indicator of
    the Jacobian over the closed ball of radius rho centered at base_point
    (the origin when base_point is None).
    """

    name: str
    n: int
    m: int
    eval_fn: Callable[[Array], Array]
    jac_fn: Optional[Callable[[Array], Array]] = None
    mu_bound: Optional[Callable[[float], float]] = None
    base_point: Optional[Array] = None

    def __post_init__(self):
        if int(self.n) < 1 or int(self.m) < 1:
            raise DimensionMismatch(
                f"map {self.name!r}: dimensions must be positive, got n={self.n}, m={self.m}"
            )


@dataclass(frozen=True)
class AnalyticFacts:
    """Closed-form side information about a registry map, used as test oracles
    and to upgrade heuristic diagnostics to certified verdicts."""

    mu_exact: Optional[Callable[[Array], float]] = None
    mu_vanishing_witness: Optional[Callable[[int], Array]] = None
    witness_image_limit: Optional[Array] = None
    coercive: Optional[bool] = None
    integral_divergent: Optional[bool] = None
    integral_tail: Optional[str] = None
    hl_beta: Optional[float] = None
    star_interval: Optional[tuple] = None
    monodromy_shift: Optional[Array] = None
    fibre_note: Optional[str] = None


@dataclass(frozen=True)
class RegistryEntry:
    model: MapModel
    facts: Optional[AnalyticFacts] = None


def _vector(x, n: int, what: str) -> Array:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (n,):
        raise DimensionMismatch(f"{what}: expected shape ({n},), got {arr.shape}")
    return arr


def evaluate(model: MapModel, x) -> Array:
    """Evaluate f(x), validating shapes and finiteness."""
    xv = _vector(x, model.n, f"evaluate({model.name})")
    y = np.asarray(model.eval_fn(xv), dtype=float)
    if y.shape != (model.m,):
        raise DimensionMismatch(
            f"evaluate({model.name}): map returned shape {y.shape}, expected ({model.m},)"
        )
    if not np.all(np.isfinite(y)):
        raise NonFinite(f"evaluate({model.name}): non-finite value at x={xv!r}")
    return y


def jacobian(model: MapModel, x) -> Array:
    """The m x n Jacobian of f at x: analytic when available, otherwise a
    central finite difference with per-coordinate step max(|x_i|, 1) * eps^(1/3)."""
    xv = _vector(x, model.n, f"jacobian({model.name})")
    if model.jac_fn is not None:
        J = np.asarray(model.jac_fn(xv), dtype=float)
        if J.shape != (model.m, model.n):
            raise DimensionMismatch(
                f"jacobian({model.name}): returned shape {J.shape}, expected ({model.m}, {model.n})"
            )
    else:
        J = np.empty((model.m, model.n))
        for i in range(model.n):
            h = max(abs(xv[i]), 1.0) * _FD_SCALE
            xp = xv.copy()
            xm = xv.copy()
            xp[i] += h
            xm[i] -= h
            # the realized step absorbs rounding in x_i +/- h
            J[:, i] = (evaluate(model, xp) - evaluate(model, xm)) / (xp[i] - xm[i])
    if not np.all(np.isfinite(J)):
        raise NonFinite(f"jacobian({model.name}): non-finite derivative at x={xv!r}")
    return J


# ---------------------------------------------------------------------------
# registry


def _identity_entry(n: int) -> RegistryEntry:
    model = MapModel(
        name=f"identity_{n}",
        n=n,
        m=n,
        eval_fn=lambda x: x.copy(),
        jac_fn=lambda x: np.eye(n),
        mu_bound=lambda rho: 1.0,
    )
    facts = AnalyticFacts(
        mu_exact=lambda x: 1.0,
        coercive=True,
        integral_divergent=True,
        integral_tail="eta(rho) == 1 for all rho",
        hl_beta=1.0,
        fibre_note="every fibre is a single point",
    )
    return RegistryEntry(model, facts)


def linear_map(matrix, name: str = "linear") -> MapModel:
    """Model for x -> A x with the constant indicator sigma_min(A)."""
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2:
        raise DimensionMismatch(f"linear_map: matrix must be 2-D, got ndim={A.ndim}")
    if not np.all(np.isfinite(A)):
        raise NonFinite("linear_map: matrix has non-finite entries")
    m, n = A.shape
    smin = float(np.linalg.svd(A, compute_uv=False)[-1]) if min(m, n) else 0.0
    return MapModel(
        name=name,
        n=n,
        m=m,
        eval_fn=lambda x: A @ x,
        jac_fn=lambda x: A.copy(),
        mu_bound=(lambda rho: smin),
    )


def linear_entry(matrix, name: str = "linear") -> RegistryEntry:
    model = linear_map(matrix, name=name)
    A = np.asarray(matrix, dtype=float)
    smin = float(np.linalg.svd(A, compute_uv=False)[-1])
    square = A.shape[0] == A.shape[1]
    facts = AnalyticFacts(
        mu_exact=lambda x: smin,
        coercive=bool(square and smin > 0.0),
        integral_divergent=bool(smin > 0.0),
        integral_tail=f"eta(rho) == {smin} for all rho" if smin > 0.0 else None,
        hl_beta=(1.0 / smin) if (square and smin > 0.0) else None,
    )
    return RegistryEntry(model, facts)


def _arctan1d_entry() -> RegistryEntry:
    model = MapModel(
        name="arctan1d",
        n=1,
        m=1,
        eval_fn=lambda x: np.arctan(x),
        jac_fn=lambda x: np.array([[1.0 / (1.0 + x[0] ** 2)]]),
        mu_bound=lambda rho: 1.0 / (1.0 + rho ** 2),
    )
    facts = AnalyticFacts(
        mu_exact=lambda x: 1.0 / (1.0 + float(x[0]) ** 2),
        mu_vanishing_witness=lambda k: np.array([float(k)]),
        witness_image_limit=np.array([np.pi / 2]),
        coercive=False,
        integral_divergent=False,
        integral_tail="integral of 1/(1+rho^2) converges to pi/2",
        star_interval=(-np.pi / 2, np.pi / 2),
        fibre_note="fibres over (-pi/2, pi/2) are single points; empty outside",
    )
    return RegistryEntry(model, facts)


def _monotone1d_entry() -> RegistryEntry:
    model = MapModel(
        name="monotone1d",
        n=1,
        m=1,
        eval_fn=lambda x: x + 0.5 * np.sin(x),
        jac_fn=lambda x: np.array([[1.0 + 0.5 * np.cos(x[0])]]),
        mu_bound=lambda rho: 0.5 if rho >= np.pi else 1.0 + 0.5 * np.cos(rho),
    )
    facts = AnalyticFacts(
        mu_exact=lambda x: 1.0 + 0.5 * float(np.cos(x[0])),
        coercive=True,
        integral_divergent=True,
        integral_tail="eta(rho) >= 1/2, so the integral grows at least like rho/2",
        hl_beta=2.0,
        fibre_note="strictly increasing, every fibre is a single point",
    )
    return RegistryEntry(model, facts)


def _exp1d_entry() -> RegistryEntry:
    model = MapModel(
        name="exp1d",
        n=1,
        m=1,
        eval_fn=lambda x: np.exp(x),
        jac_fn=lambda x: np.array([[np.exp(x[0])]]),
        mu_bound=lambda rho: float(np.exp(-rho)),
    )
    facts = AnalyticFacts(
        mu_exact=lambda x: float(np.exp(x[0])),
        mu_vanishing_witness=lambda k: np.array([-float(k)]),
        witness_image_limit=np.array([0.0]),
        coercive=False,
        integral_divergent=False,
        integral_tail="integral of exp(-rho) converges to 1",
        star_interval=(0.0, np.inf),
        fibre_note="fibres over (0, inf) are single points; empty otherwise",
    )
    return RegistryEntry(model, facts)


def _complex_exp_entry() -> RegistryEntry:
    def _eval(x):
        ex = np.exp(x[0])
        return np.array([ex * np.cos(x[1]), ex * np.sin(x[1])])

    def _jac(x):
        ex = np.exp(x[0])
        c, s = np.cos(x[1]), np.sin(x[1])
        return np.array([[ex * c, -ex * s], [ex * s, ex * c]])

    model = MapModel(
        name="complex_exp",
        n=2,
        m=2,
        eval_fn=_eval,
        jac_fn=_jac,
        mu_bound=lambda rho: float(np.exp(-rho)),
    )
    facts = AnalyticFacts(
        mu_exact=lambda x: float(np.exp(x[0])),
        mu_vanishing_witness=lambda k: np.array([-float(k), 0.0]),
        witness_image_limit=np.array([0.0, 0.0]),
        coercive=False,
        integral_divergent=False,
        monodromy_shift=np.array([0.0, 2.0 * np.pi]),
        fibre_note="covering of the punctured plane; fibres are (x, y + 2 pi k)",
    )
    return RegistryEntry(model, facts)


def _projection2to1_entry() -> RegistryEntry:
    model = MapModel(
        name="projection2to1",
        n=2,
        m=1,
        eval_fn=lambda x: np.array([x[0]]),
        jac_fn=lambda x: np.array([[1.0, 0.0]]),
        mu_bound=lambda rho: 1.0,
    )
    facts = AnalyticFacts(
        mu_exact=lambda x: 1.0,
        coercive=False,
        integral_divergent=True,
        integral_tail="eta(rho) == 1 for all rho",
        fibre_note="fibre over c is the vertical line x = c",
    )
    return RegistryEntry(model, facts)


def _parabola_sub_entry() -> RegistryEntry:
    model = MapModel(
        name="parabola_sub",
        n=2,
        m=1,
        eval_fn=lambda x: np.array([x[0] - x[1] ** 2]),
        jac_fn=lambda x: np.array([[1.0, -2.0 * x[1]]]),
        mu_bound=lambda rho: 1.0,
    )
    facts = AnalyticFacts(
        mu_exact=lambda x: float(np.sqrt(1.0 + 4.0 * x[1] ** 2)),
        coercive=False,
        integral_divergent=True,
        integral_tail="eta(rho) == 1 for all rho",
        fibre_note="fibre over c is the parabola x = y^2 + c",
    )
    return RegistryEntry(model, facts)


def _asinh1d_entry() -> RegistryEntry:
    model = MapModel(
        name="asinh1d",
        n=1,
        m=1,
        eval_fn=lambda x: np.arcsinh(x),
        jac_fn=lambda x: np.array([[1.0 / np.sqrt(1.0 + x[0] ** 2)]]),
        mu_bound=lambda rho: 1.0 / float(np.sqrt(1.0 + rho ** 2)),
    )
    facts = AnalyticFacts(
        mu_exact=lambda x: 1.0 / float(np.sqrt(1.0 + x[0] ** 2)),
        mu_vanishing_witness=lambda k: np.array([float(k)]),
        witness_image_limit=None,  # f along the witness runs to infinity
        coercive=True,
        integral_divergent=True,
        integral_tail="integral of 1/sqrt(1+rho^2) is arcsinh(r), unbounded",
        fibre_note="global diffeomorphism of the line; indicator decays like 1/rho",
    )
    return RegistryEntry(model, facts)


_BUILDERS: dict = {
    "arctan1d": _arctan1d_entry,
    "monotone1d": _monotone1d_entry,
    "exp1d": _exp1d_entry,
    "complex_exp": _complex_exp_entry,
    "projection2to1": _projection2to1_entry,
    "parabola_sub": _parabola_sub_entry,
    "asinh1d": _asinh1d_entry,
}

_MAX_IDENTITY_DIM = 512


def registry_entry(name: str) -> RegistryEntry:
    """Look up a registry entry (model plus analytic facts) by name.

    Names: identity_<n>, arctan1d, monotone1d, exp1d, complex_exp,
    projection2to1, parabola_sub, asinh1d.  Each call builds a fresh value.
    """
    if name in _BUILDERS:
        return _BUILDERS[name]()
    if name.startswith("identity_"):
        tail = name[len("identity_"):]
        if tail.isdigit() and 1 <= int(tail) <= _MAX_IDENTITY_DIM:
            return _identity_entry(int(tail))
        raise UnknownMap(f"bad identity dimension in {name!r}")
    if name == "linear":
        raise UnknownMap(
            "map 'linear' needs a matrix; use linear_map(A) in code or a "
            "'matrix' field in the CLI job parameters"
        )
    raise UnknownMap(f"unknown map {name!r}; see list_map_names()")


def registry_get(name: str) -> MapModel:
    """Look up a map model by registry name.  Fresh value on every call."""
    return registry_entry(name).model


def list_map_names() -> list:
    """Names accepted as a map selector.  identity_<n> works for any n up
    to 512; linear takes the matrix from the job parameters."""
    names = ["identity_1", "identity_2", "identity_3"] + sorted(_BUILDERS) + ["linear"]
    return names
