"""Composite Gauss-Legendre quadrature with panel halving.

Both entry points split the integration range at caller-supplied
breakpoints (kinks of the integrand must be among them), apply a
fixed-order Gauss-Legendre rule on every panel, then halve all panels
together until two successive composite estimates agree to an absolute
target.  `integrate` handles one integral; `integrate_rows` handles a
batch of integrals that share panel count but not panel positions,
which is how grid/residual sweeps stay vectorized.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QuadratureError

DEFAULT_NODES = 50
DEFAULT_TARGET = 1e-12


@lru_cache(maxsize=None)
def _gl_rule(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _composite(f, lo, hi, level, nodes):
    """One composite pass: each (lo, hi) panel split into 2**level parts.

    lo/hi have shape (B, P); f maps node arrays of shape (B, T) to values.
    Returns estimates of shape (B,).
    """
    x, w = _gl_rule(nodes)
    parts = 1 << level
    frac = np.arange(parts) / parts
    width = (hi - lo) / parts                      # (B, P)
    sub_lo = lo[..., None] + (hi - lo)[..., None] * frac   # (B, P, parts)
    half = 0.5 * width[..., None]                  # (B, P, 1) broadcast
    center = sub_lo + half
    nodes_v = center[..., None] + half[..., None] * x  # (B, P, parts, N)
    b = nodes_v.shape[0]
    vals = f(nodes_v.reshape(b, -1)).reshape(nodes_v.shape)
    return np.einsum("bpsn,n,bps->b", vals, w, np.broadcast_to(half, vals.shape[:3]))


def integrate_rows(f, breaks, target=DEFAULT_TARGET, nodes=DEFAULT_NODES,
                   max_halvings=9):
    """Batched panel quadrature.

    breaks: (B, K) array, sorted along axis 1 (repeated values make
    zero-width panels, which contribute nothing).  f maps a (B, T) node
    array to integrand values of the same shape; row i of the nodes
    always belongs to row i of breaks.  Returns a (B,) array.
    """
    breaks = np.asarray(breaks, dtype=float)
    lo, hi = breaks[:, :-1], breaks[:, 1:]
    est = _composite(f, lo, hi, 0, nodes)
    for level in range(1, max_halvings + 1):
        if lo.size * (1 << level) * nodes > 3e8:
            raise QuadratureError("quadrature node budget exceeded; "
                                  "reduce the batch size")
        new = _composite(f, lo, hi, level, nodes)
        done = np.max(np.abs(new - est))
        est = new
        if done < target:
            return est
    raise QuadratureError(
        f"batched quadrature did not reach target {target:g} "
        f"after {max_halvings} halvings (last change {done:.3e})")


def integrate(f, breakpoints, target=DEFAULT_TARGET, nodes=DEFAULT_NODES,
              max_halvings=12):
    """Integrate a vectorized scalar function over [b_0, b_K].

    breakpoints is an increasing sequence; f maps an ndarray of points
    to an ndarray of values.  Returns a float.
    """
    breaks = np.asarray(breakpoints, dtype=float).reshape(1, -1)
    if breaks.shape[1] < 2:
        raise ValueError("need at least two breakpoints")

    def row_f(v):
        return np.asarray(f(v.ravel()), dtype=float).reshape(v.shape)

    return float(integrate_rows(row_f, breaks, target, nodes, max_halvings)[0])
