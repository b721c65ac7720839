"""Discrete Feynman-rules evaluator over a closed diagram catalog.

The catalog holds exactly the three diagrams needed at one loop: the tree
2->2 vertex, the tadpole mass correction and the s-channel bubble. Symmetry
factors are hard-coded per entry (1 for the tree, 1/2 for tadpole and bubble);
vacuum bubbles and external-leg loops are excluded by construction.

One-loop mass corrections are evaluated for three regulators in D = 2:

* ``ContinuumCutoff``: (lambda/(8 pi)) * integral_{-L}^{L} dp / sqrt(p^2+m^2)
* ``ShiftPlain``:      (lambda/4) * integral dp/(2 pi) a / sqrt(1 - M^2 cos^2(pa))
* ``ShiftSmeared``:    the same with vertex form factors on all four legs

The plain Shift integral equals (lambda/(2 pi)) K(M) with K the complete
elliptic integral of the first kind, which gives the slope-doubling pathology
its clean closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, IllConditionedFit, QuadratureNotConverged, UnknownDiagram
from .kinematics import LatticeParams, cosine_symbol, smear_form_factor
from .quadrature import fsum_complex, fsum_real, gauss_legendre_panels, midpoint_nodes

__all__ = [
    "DiagramSpec",
    "vertex_factor",
    "evaluate_diagram",
    "one_loop_mass",
    "elliptic_K",
    "log_slope",
    "REGULATORS",
]

REGULATORS = ("ContinuumCutoff", "ShiftPlain", "ShiftSmeared")
_DIAGRAMS = ("Tree2to2", "TadpoleMass", "BubbleSChannel")


@dataclass(frozen=True)
class DiagramSpec:
    """One catalog entry: diagram kind, smearing flag and external momenta.

    ``incoming`` lists D-momenta as (p0, p1, ..., pd) tuples; outgoing momenta
    equal the incoming ones (forward kinematics), which conserves total
    energy-momentum trivially. ``epsilon`` is the dimensionless denominator
    regulator of the propagators; ``resolution`` the trapezoid nodes per axis.
    """

    kind: str
    incoming: tuple = field(default_factory=tuple)
    smeared: bool = False
    resolution: int = 1024
    epsilon: float = 0.05

    def __post_init__(self):
        if self.kind not in _DIAGRAMS:
            raise UnknownDiagram(f"kind must be one of {_DIAGRAMS}, got {self.kind!r}")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(
            self, "incoming", tuple(tuple(float(c) for c in p) for p in self.incoming)
        )


def vertex_factor(params: LatticeParams, line_momenta, smeared: bool = False) -> complex:
    """Vertex value for four joined lines with D-momenta (p0, p1, ..., pd).

    Plain: the constant -i*lambda. Smeared: -i*lambda times one form factor
    per line, evaluated on the spatial components.
    """
    lines = list(line_momenta)
    if len(lines) != 4:
        raise ValueError("a quartic vertex joins exactly four lines")
    value = -1j * params.lam
    if smeared:
        for momentum in lines:
            value *= smear_form_factor(params, np.asarray(momentum, dtype=float)[1:])
    return value


def elliptic_K(x: float) -> float:
    """Complete elliptic integral of the first kind via the AGM iteration.

    K(x) = integral_0^{pi/2} dt / sqrt(1 - x^2 sin^2 t) = pi / (2 agm(1, x')),
    x' = sqrt(1 - x^2). Converges quadratically; iterated to 1e-14.
    """
    if not 0.0 <= x < 1.0:
        raise DomainError(f"elliptic_K requires 0 <= x < 1, got {x}")
    a, b = 1.0, math.sqrt(1.0 - x * x)
    for _ in range(64):  # quadratic convergence; stops at the roundoff plateau
        if abs(a - b) <= 1e-15 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def _require_two_dimensional(params: LatticeParams):
    if params.d != 1:
        raise ValueError("one-loop corrections are computed in D = 2 (d = 1)")
    if params.m <= 0:
        raise ValueError("one-loop corrections require m > 0")


def _shift_loop_integral(params: LatticeParams, n: int, smeared: bool) -> float:
    """Zone integral of 1/sqrt(1 - M^2 cos^2), optionally weighted by (1+cos)^2."""
    theta = midpoint_nodes(n, math.pi)
    weight = (1.0 + np.cos(theta)) ** 2 if smeared else 1.0
    vals = weight / np.sqrt(1.0 - params.M**2 * np.cos(theta) ** 2)
    return fsum_real(vals) / n


def one_loop_mass(
    regulator: str,
    params: LatticeParams,
    p_in: float = 0.0,
    resolution: int = 8192,
    cutoff: float | None = None,
    conv_rtol: float | None = 1e-9,
) -> float:
    """Real one-loop mass correction Pi for the chosen regulator (D = 2)."""
    _require_two_dimensional(params)
    lam, m, a = params.lam, params.m, params.a

    if regulator == "ContinuumCutoff":
        lim = math.pi / a if cutoff is None else cutoff

        def integral(n):
            panels = [0.0, min(m, lim)]
            while panels[-1] < lim:
                panels.append(min(2.0 * panels[-1], lim))
            return 2.0 * gauss_legendre_panels(
                lambda p: 1.0 / np.sqrt(p * p + m * m), 0.0, lim, n, panels
            )

        value = lam / (8.0 * math.pi) * integral(resolution // 256 + 16)
        fine = lam / (8.0 * math.pi) * integral(resolution // 128 + 32)
    elif regulator in ("ShiftPlain", "ShiftSmeared"):
        smeared = regulator == "ShiftSmeared"
        prefactor = lam / 4.0
        if smeared:
            prefactor *= (1.0 + math.cos(p_in * a)) ** 2 / 16.0
        value = prefactor * _shift_loop_integral(params, resolution, smeared)
        fine = prefactor * _shift_loop_integral(params, 2 * resolution, smeared)
    else:
        raise ValueError(f"regulator must be one of {REGULATORS}, got {regulator!r}")

    if conv_rtol is not None and abs(fine - value) > conv_rtol * max(abs(value), 1e-300):
        raise QuadratureNotConverged(
            f"{regulator}: refinement moved Pi by {abs(fine - value):.3e}"
        )
    return fine


def _df_grid(params: LatticeParams, p0, p1, epsilon: float) -> np.ndarray:
    """Vectorized momentum-space propagator on (p0, p1) arrays (dimensionless eps)."""
    c = params.M * np.cos(p1 * params.a)
    return (params.dt**2 / 2.0) * 1j / (c - np.cos(p0 * params.dt) + 1j * epsilon)


def _fold(vals: np.ndarray, halfwidth: float) -> np.ndarray:
    period = 2.0 * halfwidth
    folded = np.mod(vals + halfwidth, period) - halfwidth
    return np.where(folded == -halfwidth, halfwidth, folded)


def evaluate_diagram(spec: DiagramSpec, params: LatticeParams) -> complex:
    """Value of one catalog diagram under the discrete Feynman rules.

    Tree2to2 is the bare vertex -i*lambda (times form factors when smeared).
    TadpoleMass and BubbleSChannel integrate over the undetermined loop
    momentum with the zone measure d^D q / (2 pi)^D on a trapezoid grid.
    """
    lam = params.lam
    if spec.kind == "Tree2to2":
        if len(spec.incoming) != 2:
            raise ValueError("Tree2to2 takes two incoming momenta")
        return vertex_factor(params, _external_legs(spec), spec.smeared)

    _require_two_dimensional(params)
    n = spec.resolution
    q0 = midpoint_nodes(n, math.pi / params.dt)
    q1 = midpoint_nodes(n, math.pi / params.a)
    measure = 1.0 / (n * params.dt) / (n * params.a)

    # One q0 row at a time: numpy's pairwise sum per row, fsum over the row
    # totals. Deterministic and O(n) memory.
    if spec.kind == "TadpoleMass":
        if len(spec.incoming) != 1:
            raise ValueError("TadpoleMass takes one incoming momentum")
        factor = -1j * lam / 2.0
        loop_weight = 1.0
        if spec.smeared:
            loop_weight = ((1.0 + np.cos(q1 * params.a)) / 2.0) ** 2
            factor *= smear_form_factor(params, spec.incoming[0][1]) ** 2
        rows = [np.sum(_df_grid(params, v0, q1, spec.epsilon) * loop_weight) for v0 in q0]
        return factor * fsum_complex(rows) * measure

    if spec.kind == "BubbleSChannel":
        if len(spec.incoming) != 2:
            raise ValueError("BubbleSChannel takes two incoming momenta")
        total0 = spec.incoming[0][0] + spec.incoming[1][0]
        total1 = spec.incoming[0][1] + spec.incoming[1][1]
        back1 = _fold(total1 - q1, math.pi / params.a)
        loop_weight = 1.0
        factor = (-1j * lam) ** 2 / 2.0
        if spec.smeared:
            loop_weight = (
                ((1.0 + np.cos(q1 * params.a)) / 2.0) * ((1.0 + np.cos(back1 * params.a)) / 2.0)
            ) ** 2
            for p in _external_legs(spec):
                factor *= smear_form_factor(params, p[1:])
        rows = []
        for v0 in q0:
            b0 = _fold(np.array(total0 - v0), math.pi / params.dt)
            fwd = _df_grid(params, v0, q1, spec.epsilon)
            back = _df_grid(params, b0, back1, spec.epsilon)
            rows.append(np.sum(fwd * back * loop_weight))
        return factor * fsum_complex(rows) * measure

    raise UnknownDiagram(spec.kind)


def _external_legs(spec: DiagramSpec):
    # outgoing momenta equal incoming: four legs for 2->2, two for the tadpole
    return list(spec.incoming) + list(spec.incoming)


def log_slope(series) -> float:
    """Least-squares slope of Pi against ln(1/a) for a list of (a, Pi) pairs."""
    pts = [(float(a), float(pi)) for a, pi in series]
    if len(pts) < 4:
        raise ValueError("need at least 4 points")
    spacings = [a for a, _ in pts]
    if len(set(spacings)) != len(spacings):
        raise ValueError("lattice spacings must be distinct")
    xs = np.log([1.0 / a for a in spacings])
    if xs.max() - xs.min() < math.log(10.0):
        raise IllConditionedFit("ln(1/a) must span at least one decade")
    return float(np.polyfit(xs, [pi for _, pi in pts], 1)[0])
