"""Closed-form lattice kinematics shared by every other module.

All functions here are pure and total over validated inputs: parameter
validation happens once, at :class:`LatticeParams` construction, and momenta
are checked against the Brillouin zone by the operations that consume them.
Conventions: the zone is the half-open box (-pi/a, pi/a]^d (the edge +pi/a is
included, -pi/a excluded), and arccos is taken on the principal branch [0, pi]
so the one-step phase theta is positive.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDispersion

__all__ = [
    "LatticeParams",
    "MomentumGrid",
    "validate_momentum",
    "cosine_symbol",
    "dispersion_theta",
    "omega",
    "reference_energies",
    "smear_form_factor",
    "smear_weights",
    "smear_form_factor_sum",
]


@dataclass(frozen=True)
class LatticeParams:
    """Spacetime discretization and couplings.

    Parameters
    ----------
    a : float
        Spatial lattice spacing (length).
    dt : float, optional
        Timestep. Defaults to ``a`` (the delta-t = a operating point).
    d : int
        Spatial dimension; the spacetime dimension is D = d + 1.
    m : float
        Bare mass, >= 0.
    lam : float
        Quartic coupling, >= 0.
    g : float
        Gauge coupling (used by the gauge module only).

    The mass parameter M = 1 - m^2 a^2 / 2 and the anisotropy kappa = dt/a
    are always recomputed from the stored fields, never stored independently.
    """

    a: float
    dt: float | None = None
    d: int = 1
    m: float = 0.0
    lam: float = 0.0
    g: float = 1.0

    def __post_init__(self):
        if self.dt is None:
            object.__setattr__(self, "dt", self.a)
        if not (self.a > 0 and self.dt > 0):
            raise ValueError("lattice spacing and timestep must be positive")
        if self.m < 0 or self.lam < 0:
            raise ValueError("mass and quartic coupling must be nonnegative")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("spatial dimension must be a positive integer")
        object.__setattr__(self, "d", int(self.d))

    @property
    def M(self) -> float:
        return 1.0 - 0.5 * self.m * self.m * self.a * self.a

    @property
    def kappa(self) -> float:
        return self.dt / self.a

    @property
    def D(self) -> int:
        return self.d + 1


def validate_momentum(params: LatticeParams, p) -> np.ndarray:
    """Return ``p`` as a float array of shape (d,), checked against the zone."""
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.shape != (params.d,):
        raise ValueError(f"momentum must have {params.d} component(s), got shape {arr.shape}")
    edge = math.pi / params.a
    if np.any(arr <= -edge) or np.any(arr > edge):
        raise ValueError(f"momentum components must lie in (-pi/a, pi/a] = (-{edge:g}, {edge:g}]")
    return arr


def _fold_to_zone(p: np.ndarray, a: float) -> np.ndarray:
    """Map momenta into (-pi/a, pi/a] by 2*pi/a shifts."""
    period = 2.0 * math.pi / a
    folded = np.mod(p, period)
    folded = np.where(folded > math.pi / a + 1e-15 * period, folded - period, folded)
    return folded


@dataclass(frozen=True)
class MomentumGrid:
    """The L^d momenta p_k = 2*pi*k/(L*a) folded into the Brillouin zone.

    ``points`` has shape (L**d, d) and is sorted lexicographically, which makes
    every consumer of the grid deterministic.
    """

    params: LatticeParams
    L: int
    points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("grid needs at least one momentum per dimension")
        line = _fold_to_zone(
            2.0 * math.pi * np.arange(self.L) / (self.L * self.params.a), self.params.a
        )
        pts = np.array(list(itertools.product(sorted(line), repeat=self.params.d)))
        object.__setattr__(self, "points", pts.reshape(self.L**self.params.d, self.params.d))


def cosine_symbol(params: LatticeParams, p) -> float:
    """c(p) = M * prod_i cos(p_i a); even in every momentum component."""
    arr = validate_momentum(params, p)
    return params.M * float(np.prod(np.cos(arr * params.a)))


def dispersion_theta(params: LatticeParams, p) -> float:
    """One-step phase theta(p) = arccos(c(p)) / dt, in (0, pi/dt).

    Raises
    ------
    DegenerateDispersion
        If |c(p)| >= 1, which happens at m = 0 where theta touches zero.
    """
    c = cosine_symbol(params, p)
    if abs(c) >= 1.0:
        raise DegenerateDispersion(f"|c(p)| = {abs(c)} >= 1; real theta requires m > 0")
    return math.acos(c) / params.dt


def omega(params: LatticeParams, p) -> float:
    """Equal-time energy factor omega(p) = sin(theta dt)/dt = sqrt(1-c^2)/dt."""
    c = cosine_symbol(params, p)
    if abs(c) >= 1.0:
        raise DegenerateDispersion(f"|c(p)| = {abs(c)} >= 1; real theta requires m > 0")
    return math.sqrt(1.0 - c * c) / params.dt


def reference_energies(params: LatticeParams, p) -> tuple[float, float]:
    """Continuum and lattice-Hamiltonian dispersions (E, E_latt).

    E = sqrt(|p|^2 + m^2); E_latt = sqrt(m^2 + sum_i 4 sin^2(p_i a/2)/a^2).
    """
    arr = validate_momentum(params, p)
    e_cont = math.sqrt(float(arr @ arr) + params.m**2)
    lap = float(np.sum(4.0 * np.sin(arr * params.a / 2.0) ** 2)) / params.a**2
    return e_cont, math.sqrt(params.m**2 + lap)


def smear_weights(d: int) -> dict[tuple[int, ...], float]:
    """Raw smearing weights w(e) = prod_i v(e_i), v(0)=1/2, v(+-1)=1/4."""
    v = {-1: 0.25, 0: 0.5, 1: 0.25}
    return {
        e: float(np.prod([v[c] for c in e]))
        for e in itertools.product((-1, 0, 1), repeat=d)
    }


def smear_form_factor(params: LatticeParams, p) -> float:
    """Vertex form factor prod_i (1 + cos(p_i a))/2, in [0, 1] on the zone."""
    arr = validate_momentum(params, p)
    return float(np.prod((1.0 + np.cos(arr * params.a)) / 2.0))


def smear_form_factor_sum(params: LatticeParams, p) -> complex:
    """The defining sum over smear offsets, sum_e w(e) exp(i p.e a).

    Equals :func:`smear_form_factor` identically; kept as an independent route
    for testing the weight normalization.
    """
    arr = validate_momentum(params, p)
    total = 0.0 + 0.0j
    for e, w in sorted(smear_weights(params.d).items()):
        total += w * np.exp(1j * float(arr @ np.asarray(e, dtype=float)) * params.a)
    return total
