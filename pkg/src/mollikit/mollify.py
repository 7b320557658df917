"""Infinitely differentiable approximations of nonsmooth losses.

A smoothed loss at scale m is the convolution of a catalog loss with
the scaled kernel m*phi(m.), evaluated here as

    value(u)  = int rho(u + v/m) phi(v) dv
    deriv(u)  = int psi(u + v/m) phi(v) dv
    deriv2(u) = -m * int psi(u + v/m) phi'(v) dv

(the second derivative comes from one integration by parts; the
boundary terms vanish because every kernel derivative does).  Closed
forms exist for the Gaussian kernel against the absolute, check and
ramp losses; every other pairing integrates by kink-split panel
quadrature.  `PartialMomentSmoother` provides a third, exact route --
reducing the integrals piece by piece onto kernel CDF/partial-moment
evaluations -- which the fitting loops use for speed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import InvalidScaleError
from .kernels import (MollifierKernel, kernel_cdf, kernel_derivative,
                      kernel_partial_moment, kernel_value)
from .losses import LossSpec, loss_pieces, loss_subgradient, loss_value
from .quadrature import integrate_rows

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"

_QUAD_TARGET = 1e-11
_CHUNK_ROWS = 1024

_SQRT2PI = np.sqrt(2.0 * np.pi)


def _has_closed_form(loss: LossSpec, kernel: MollifierKernel) -> bool:
    return kernel.kind == "gaussian" and loss.kind in ("absolute", "check", "relu")


@dataclass(frozen=True)
class SmoothedLoss:
    """A (loss, kernel, scale) triple with a resolved evaluation method."""

    loss: LossSpec
    kernel: MollifierKernel
    m: float
    method: str


def smoothed_loss(loss: LossSpec, kernel: MollifierKernel, m: float,
                  method: str = "auto") -> SmoothedLoss:
    if not m > 0:
        raise InvalidScaleError(f"smoothing scale must be positive, got {m}")
    if method == "auto":
        method = CLOSED_FORM if _has_closed_form(loss, kernel) else QUADRATURE
    elif method == CLOSED_FORM:
        if not _has_closed_form(loss, kernel):
            raise ValueError(
                f"no closed form for {loss.label} with {kernel.kind} kernel")
    elif method != QUADRATURE:
        raise ValueError(f"unknown method {method!r}")
    return SmoothedLoss(loss=loss, kernel=kernel, m=float(m), method=method)


def _check_scale(s: SmoothedLoss):
    if not s.m > 0:
        raise InvalidScaleError(f"smoothing scale must be positive, got {s.m}")


# ---------------------------------------------------------------------------
# quadrature path
# ---------------------------------------------------------------------------

def _base_breaks(kernel: MollifierKernel) -> tuple[float, ...]:
    if kernel.kind == "bump":
        return (-1.0, -0.99, 0.99, 1.0)
    return (-8.0, -2.0, 2.0, 8.0)


def _v_breaks(loss: LossSpec, kernel: MollifierKernel, m: float,
              u: np.ndarray) -> np.ndarray:
    """Panel boundaries in kernel space, one row per evaluation point.

    Every loss kink k maps to v = m*(k - u); kinks outside the window
    clip to the edge and become zero-width panels.
    """
    w = kernel.window
    cols = [np.full(u.shape, b) for b in _base_breaks(kernel)]
    for k in loss.kinks:
        cols.append(np.clip(m * (k - u), -w, w))
    return np.sort(np.stack(cols, axis=1), axis=1)


def _quad_rows(s: SmoothedLoss, u: np.ndarray, integrand) -> np.ndarray:
    out = np.empty(u.shape)
    for start in range(0, u.size, _CHUNK_ROWS):
        chunk = u[start:start + _CHUNK_ROWS]
        breaks = _v_breaks(s.loss, s.kernel, s.m, chunk)
        uc = chunk[:, None]

        def f(v, uc=uc):
            return integrand(uc + v / s.m, v)

        out[start:start + _CHUNK_ROWS] = integrate_rows(
            f, breaks, target=_QUAD_TARGET)
    return out


def _value_quadrature(s: SmoothedLoss, u: np.ndarray) -> np.ndarray:
    return _quad_rows(s, u, lambda arg, v: loss_value(s.loss, arg)
                      * kernel_value(s.kernel, v))


def _derivative_quadrature(s: SmoothedLoss, u: np.ndarray) -> np.ndarray:
    return _quad_rows(s, u, lambda arg, v: loss_subgradient(s.loss, arg)
                      * kernel_value(s.kernel, v))


def _second_quadrature(s: SmoothedLoss, u: np.ndarray) -> np.ndarray:
    return -s.m * _quad_rows(s, u, lambda arg, v: loss_subgradient(s.loss, arg)
                             * kernel_derivative(s.kernel, v, 1))


# ---------------------------------------------------------------------------
# Gaussian closed forms
# ---------------------------------------------------------------------------

def _norm_pdf(t):
    return np.exp(-0.5 * t * t) / _SQRT2PI


def _value_closed(s: SmoothedLoss, u: np.ndarray) -> np.ndarray:
    t = s.m * u
    smoothed_abs = u * (2.0 * ndtr(t) - 1.0) + (2.0 / s.m) * _norm_pdf(t)
    if s.loss.kind == "absolute":
        return smoothed_abs
    if s.loss.kind == "check":
        return (s.loss.tau - 0.5) * u + 0.5 * smoothed_abs
    return u * ndtr(t) + _norm_pdf(t) / s.m


def _derivative_closed(s: SmoothedLoss, u: np.ndarray) -> np.ndarray:
    t = s.m * u
    if s.loss.kind == "absolute":
        return 2.0 * ndtr(t) - 1.0
    if s.loss.kind == "check":
        return (s.loss.tau - 0.5) + 0.5 * (2.0 * ndtr(t) - 1.0)
    return ndtr(t)


def _second_closed(s: SmoothedLoss, u: np.ndarray) -> np.ndarray:
    scale = 2.0 if s.loss.kind == "absolute" else 1.0
    return scale * s.m * _norm_pdf(s.m * u)


# ---------------------------------------------------------------------------
# public evaluation
# ---------------------------------------------------------------------------

def _dispatch(s: SmoothedLoss, u, closed, quad):
    _check_scale(s)
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    out = closed(s, arr) if s.method == CLOSED_FORM else quad(s, arr)
    return float(out[0]) if np.ndim(u) == 0 else out


def smooth_value(s: SmoothedLoss, u) -> float | np.ndarray:
    """Smoothed loss value at u (scalar or array)."""
    return _dispatch(s, u, _value_closed, _value_quadrature)


def smooth_derivative(s: SmoothedLoss, u) -> float | np.ndarray:
    """First derivative of the smoothed loss at u."""
    return _dispatch(s, u, _derivative_closed, _derivative_quadrature)


def smooth_second_derivative(s: SmoothedLoss, u) -> float | np.ndarray:
    """Second derivative of the smoothed loss at u (nonnegative up to
    quadrature noise, by convexity)."""
    return _dispatch(s, u, _second_closed, _second_quadrature)


def sup_error(s: SmoothedLoss, grid) -> float:
    """max over the grid of |smoothed value - exact value|."""
    pts = np.asarray(grid, dtype=float).ravel()
    if pts.size == 0:
        raise ValueError("grid must be nonempty")
    return float(np.max(np.abs(smooth_value(s, pts) - loss_value(s.loss, pts))))


# ---------------------------------------------------------------------------
# exact piecewise reduction (fast path for fitting loops)
# ---------------------------------------------------------------------------

class PartialMomentSmoother:
    """Evaluates the smoothing integrals exactly, piece by piece.

    Catalog losses are piecewise quadratic, so each integral collapses
    onto kernel CDF and partial-moment differences at the piece
    boundaries mapped into kernel space.  This is algebraically the
    same object as the quadrature path (the tests pin the two together)
    but costs O(kinks) kernel-table lookups per point, which is what
    makes Newton iterations over full residual vectors cheap.
    """

    def __init__(self, loss: LossSpec, kernel: MollifierKernel, m: float):
        if not m > 0:
            raise InvalidScaleError(f"smoothing scale must be positive, got {m}")
        self.loss = loss
        self.kernel = kernel
        self.m = float(m)
        pieces = loss_pieces(loss)
        self._alpha = np.array([p[2] for p in pieces])
        self._slope = np.array([p[3] for p in pieces])
        self._quad = np.array([p[4] for p in pieces])
        self._kinks = np.array([p[0] for p in pieces[1:]])  # interior breaks
        self._has_quad = bool(np.any(self._quad))
        self._pm1_total = float(kernel_partial_moment(kernel, np.inf, 1))
        self._pm2_total = float(kernel_partial_moment(kernel, np.inf, 2))

    def _boundary_tables(self, arr, need_pm2, need_pdf):
        """Kernel tables at the piece boundaries in v-space.

        Each returned array has shape (pieces + 1, len(arr)); row 0 is
        the -inf boundary and the last row the +inf boundary.
        """
        t = self.m * (self._kinks[:, None] - arr[None, :])
        k = arr.size
        rows = self._kinks.size + 2
        cdf = np.empty((rows, k))
        cdf[0], cdf[-1] = 0.0, 1.0
        cdf[1:-1] = kernel_cdf(self.kernel, t)
        pm1 = np.empty((rows, k))
        pm1[0], pm1[-1] = 0.0, self._pm1_total
        pm1[1:-1] = kernel_partial_moment(self.kernel, t, 1)
        pm2 = pdf = tpdf = None
        if need_pm2:
            pm2 = np.empty((rows, k))
            pm2[0], pm2[-1] = 0.0, self._pm2_total
            pm2[1:-1] = kernel_partial_moment(self.kernel, t, 2)
        if need_pdf:
            pdf = np.zeros((rows, k))
            pdf[1:-1] = kernel_value(self.kernel, t)
            tpdf = np.zeros((rows, k))
            tpdf[1:-1] = t * pdf[1:-1]
        return cdf, pm1, pm2, pdf, tpdf

    @staticmethod
    def _wrap(u, acc):
        return float(acc[0]) if np.ndim(u) == 0 else acc

    def value(self, u) -> float | np.ndarray:
        arr = np.atleast_1d(np.asarray(u, dtype=float))
        m = self.m
        cdf, pm1, pm2, _, _ = self._boundary_tables(arr, self._has_quad, False)
        d0, d1 = np.diff(cdf, axis=0), np.diff(pm1, axis=0)
        acc = ((self._alpha[:, None] + self._slope[:, None] * arr) * d0
               + (self._slope[:, None] / m) * d1).sum(axis=0)
        if self._has_quad:
            d2 = np.diff(pm2, axis=0)
            q = self._quad[:, None]
            acc += (0.5 * q * (arr * arr * d0 + (2.0 / m) * arr * d1
                               + d2 / (m * m))).sum(axis=0)
        return self._wrap(u, acc)

    def derivative(self, u) -> float | np.ndarray:
        arr = np.atleast_1d(np.asarray(u, dtype=float))
        cdf, pm1, _, _, _ = self._boundary_tables(arr, False, False)
        acc = self._derivative_from(arr, np.diff(cdf, axis=0),
                                    np.diff(pm1, axis=0))
        return self._wrap(u, acc)

    def second_derivative(self, u) -> float | np.ndarray:
        arr = np.atleast_1d(np.asarray(u, dtype=float))
        cdf, _, _, pdf, tpdf = self._boundary_tables(arr, False, True)
        acc = self._second_from(arr, np.diff(cdf, axis=0),
                                np.diff(pdf, axis=0), np.diff(tpdf, axis=0))
        return self._wrap(u, acc)

    def curvature_pair(self, u) -> tuple[np.ndarray, np.ndarray]:
        """(derivative, second derivative) sharing one table pass."""
        arr = np.atleast_1d(np.asarray(u, dtype=float))
        cdf, pm1, _, pdf, tpdf = self._boundary_tables(arr, False, True)
        d0 = np.diff(cdf, axis=0)
        grad = self._derivative_from(arr, d0, np.diff(pm1, axis=0))
        curv = self._second_from(arr, d0, np.diff(pdf, axis=0),
                                 np.diff(tpdf, axis=0))
        return grad, curv

    def _derivative_from(self, arr, d0, d1):
        acc = ((self._slope[:, None] + self._quad[:, None] * arr) * d0).sum(axis=0)
        if self._has_quad:
            acc += ((self._quad[:, None] / self.m) * d1).sum(axis=0)
        return acc

    def _second_from(self, arr, d0, dpdf, dtpdf):
        acc = (-self.m * (self._slope[:, None] + self._quad[:, None] * arr)
               * dpdf).sum(axis=0)
        if self._has_quad:
            acc -= (self._quad[:, None] * (dtpdf - d0)).sum(axis=0)
        return acc


# ---------------------------------------------------------------------------
# expectation diagnostics
# ---------------------------------------------------------------------------

def expected_derivative_gap(loss: LossSpec, kernel: MollifierKernel, m: float,
                            density, target: float = 1e-10) -> float:
    """E|rho_m'(e) - psi(e)| for e distributed as `density`.

    Integrates |smoothed derivative - subgradient| * pdf by panel
    quadrature, splitting at every kink and at kink +/- 1/m where the
    integrand changes character.
    """
    s = smoothed_loss(loss, kernel, m)
    radius = density.quad_breaks[-1]
    pts = {-radius, radius}
    pts.update(b for b in density.quad_breaks)
    pts.update(-b for b in density.quad_breaks)
    for k in loss.kinks:
        pts.update((k, k - 1.0 / m, k + 1.0 / m))
    breaks = np.array(sorted(p for p in pts if -radius <= p <= radius))

    def f(u):
        vals = np.abs(smooth_derivative(s, u) - loss_subgradient(loss, u))
        return vals * density.pdf(u)

    breaks2 = breaks.reshape(1, -1)

    def row_f(v):
        return f(v.ravel()).reshape(v.shape)

    return float(integrate_rows(row_f, breaks2, target=target)[0])
