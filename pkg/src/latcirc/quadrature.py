"""Deterministic quadrature primitives.

Periodic integrands use the trapezoid rule on uniform midpoint-offset nodes
(spectrally accurate on the torus); non-periodic finite intervals use
composite Gauss-Legendre panels. Reductions go through math.fsum, which is
exactly rounded and independent of evaluation order.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["midpoint_nodes", "fsum_complex", "fsum_real", "gauss_legendre_panels"]


def midpoint_nodes(n: int, halfwidth: float) -> np.ndarray:
    """n uniform nodes on (-halfwidth, halfwidth), symmetric under negation."""
    if n < 1:
        raise ValueError("need at least one node")
    step = 2.0 * halfwidth / n
    return -halfwidth + step * (np.arange(n) + 0.5)


def fsum_real(values) -> float:
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


def fsum_complex(values) -> complex:
    arr = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(arr.real.tolist()), math.fsum(arr.imag.tolist()))


def gauss_legendre_panels(f, lo: float, hi: float, n_per_panel: int = 32, panels=None) -> float:
    """Integrate a smooth real function over [lo, hi] on explicit panels.

    ``panels`` is a sorted list of breakpoints including lo and hi; default is
    the single panel [lo, hi].
    """
    if panels is None:
        panels = [lo, hi]
    nodes, weights = np.polynomial.legendre.leggauss(n_per_panel)
    pieces = []
    for left, right in zip(panels[:-1], panels[1:]):
        mid, half = 0.5 * (left + right), 0.5 * (right - left)
        pieces.extend((half * weights * f(mid + half * nodes)).tolist())
    return math.fsum(pieces)
