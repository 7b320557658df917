"""Catalog of nonsmooth convex losses.

Each loss carries its value, a right-continuous subgradient selection,
its Lipschitz constant, its kink locations, and a curvature measure:
the distributional second derivative split into point masses at the
kinks plus a piecewise-constant density (only the Huber loss has one).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CurvatureUndefinedError
from .quadrature import integrate

ABSOLUTE = "absolute"
CHECK = "check"
HUBER = "huber"
RELU = "relu"


@dataclass(frozen=True)
class LossSpec:
    """A convex loss from the catalog.

    kind is one of "absolute", "check" (quantile level tau), "huber"
    (threshold c) or "relu".  tau/c are validated at construction.
    """

    kind: str
    tau: float | None = None
    c: float | None = None

    def __post_init__(self):
        if self.kind not in (ABSOLUTE, CHECK, HUBER, RELU):
            raise ValueError(f"unknown loss kind {self.kind!r}")
        if self.kind == CHECK:
            if self.tau is None or not 0.0 < self.tau < 1.0:
                raise ValueError("check loss needs tau in (0, 1)")
        elif self.tau is not None:
            raise ValueError("tau only applies to the check loss")
        if self.kind == HUBER:
            if self.c is None or not self.c > 0.0:
                raise ValueError("huber loss needs c > 0")
        elif self.c is not None:
            raise ValueError("c only applies to the huber loss")

    @property
    def lipschitz(self) -> float:
        if self.kind == CHECK:
            return max(self.tau, 1.0 - self.tau)
        if self.kind == HUBER:
            return self.c
        return 1.0

    @property
    def kinks(self) -> tuple[float, ...]:
        """Locations where the loss is not twice differentiable."""
        if self.kind == HUBER:
            return (-self.c, self.c)
        return (0.0,)

    @property
    def coercive(self) -> bool:
        """True when the loss has a unique finite minimizer direction-wise."""
        return self.kind != RELU

    @property
    def label(self) -> str:
        if self.kind == CHECK:
            return f"check:{self.tau:g}"
        if self.kind == HUBER:
            return f"huber:{self.c:g}"
        return "abs" if self.kind == ABSOLUTE else "relu"


def absolute_loss() -> LossSpec:
    return LossSpec(ABSOLUTE)


def check_loss(tau: float) -> LossSpec:
    return LossSpec(CHECK, tau=tau)


def huber_loss(c: float) -> LossSpec:
    return LossSpec(HUBER, c=c)


def relu_loss() -> LossSpec:
    return LossSpec(RELU)


def parse_loss(text: str) -> LossSpec:
    """Parse the CLI loss grammar: abs | check:TAU | huber:C | relu."""
    name, _, arg = text.strip().lower().partition(":")
    if name == "abs" and not arg:
        return absolute_loss()
    if name == "relu" and not arg:
        return relu_loss()
    if name == "check" and arg:
        return check_loss(float(arg))
    if name == "huber" and arg:
        return huber_loss(float(arg))
    raise ValueError(f"bad loss spec {text!r} "
                     "(expected abs|check:TAU|huber:C|relu)")


def _as_same(template, arr):
    if np.ndim(template) == 0:
        return float(arr.reshape(()))
    return arr


def loss_value(loss: LossSpec, u) -> float | np.ndarray:
    x = np.asarray(u, dtype=float)
    if loss.kind == ABSOLUTE:
        out = np.abs(x)
    elif loss.kind == CHECK:
        out = x * (loss.tau - (x < 0))
    elif loss.kind == RELU:
        out = np.maximum(x, 0.0)
    else:
        c = loss.c
        out = np.where(np.abs(x) <= c, 0.5 * x * x, c * np.abs(x) - 0.5 * c * c)
    return _as_same(u, out)


def loss_subgradient(loss: LossSpec, u) -> float | np.ndarray:
    """Right-continuous subgradient selection psi(u)."""
    x = np.asarray(u, dtype=float)
    if loss.kind == ABSOLUTE:
        out = np.where(x >= 0, 1.0, -1.0)
    elif loss.kind == CHECK:
        out = loss.tau - (x < 0)
    elif loss.kind == RELU:
        out = (x >= 0).astype(float)
    else:
        out = np.clip(x, -loss.c, loss.c)
    return _as_same(u, out)


def loss_pieces(loss: LossSpec) -> tuple[tuple[float, float, float, float, float], ...]:
    """Piecewise-quadratic description of the loss.

    Each entry is (lo, hi, alpha, slope, quad) with
    value(w) = alpha + slope*w + 0.5*quad*w^2 on [lo, hi].
    """
    inf = np.inf
    if loss.kind == ABSOLUTE:
        return ((-inf, 0.0, 0.0, -1.0, 0.0), (0.0, inf, 0.0, 1.0, 0.0))
    if loss.kind == CHECK:
        t = loss.tau
        return ((-inf, 0.0, 0.0, t - 1.0, 0.0), (0.0, inf, 0.0, t, 0.0))
    if loss.kind == RELU:
        return ((-inf, 0.0, 0.0, 0.0, 0.0), (0.0, inf, 0.0, 1.0, 0.0))
    c = loss.c
    return ((-inf, -c, -0.5 * c * c, -c, 0.0),
            (-c, c, 0.0, 0.0, 1.0),
            (c, inf, -0.5 * c * c, c, 0.0))


@dataclass(frozen=True)
class CurvatureMeasure:
    """Distributional second derivative of a convex loss.

    jumps: point masses (location, mass), one per subgradient jump.
    density: absolutely continuous part as (lo, hi, value) intervals.
    """

    jumps: tuple[tuple[float, float], ...]
    density: tuple[tuple[float, float, float], ...]


def loss_curvature(loss: LossSpec) -> CurvatureMeasure:
    if loss.kind == ABSOLUTE:
        return CurvatureMeasure(jumps=((0.0, 2.0),), density=())
    if loss.kind in (CHECK, RELU):
        return CurvatureMeasure(jumps=((0.0, 1.0),), density=())
    c = loss.c
    return CurvatureMeasure(jumps=(), density=((-c, c, 1.0),))


def expected_curvature(loss: LossSpec, density) -> float:
    """Curvature constant a = E[rho''(e)] for e distributed as `density`.

    Point masses contribute mass * pdf(location); the absolutely
    continuous part is integrated against the pdf by quadrature.
    """
    measure = loss_curvature(loss)
    a = 0.0
    for loc, mass in measure.jumps:
        val = float(density.pdf(loc))
        if not np.isfinite(val):
            raise CurvatureUndefinedError(
                f"curvature undefined: density not evaluable at {loc}")
        a += mass * val
    for lo, hi, val in measure.density:
        mid = 0.5 * (lo + hi)
        a += val * integrate(density.pdf, [lo, mid, hi], target=1e-12)
    return a
