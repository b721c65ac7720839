"""Truncated field-grid Hilbert-space simulator for d=1 chains.

Each site carries an n_points-value field grid; conjugate momenta come from
the centered unitary DFT (clock/shift discretization), which makes every
momentum layer exactly unitary. Everything is phrased in the dimensionless
site variables x = phi (d=1), p = a*pi, where one step of the Strang circuit
is exp(-i kappa Vt(x)/2) * exp(-i kappa p^2/2) * exp(-i kappa Vt(x)/2) with
kappa = dt/a and

    Vt(x) = sum_n [ (x_{n+1}-x_n)^2/2 + (m a)^2 x_n^2/2 + (lambda a^2) x_n^4/24 ].

The Shift circuit's X-layer is exp(+i[(M/2) sum x_n x_{n+1} +
(lambda a^2/24) sum x_n^4]) and its momentum layer the quarter rotation
exp(-i pi (X^2 + P^2)/4), built by dense per-site diagonalization.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BruteForceCap, DimensionCap
from .kinematics import LatticeParams

__all__ = [
    "FieldGrid",
    "TruncatedLattice",
    "build_site_operators",
    "build_step",
    "apply_step",
    "amplitude_circuit",
    "amplitude_path_sum",
    "amplitude_action_form",
    "kernel_gaussian_check",
    "interaction_picture_check",
    "translation_permutation",
    "KINDS",
]

KINDS = ("Strang", "Trotter", "Shift")
DIM_CAP = 2**20  # total Hilbert-space dimension
DENSE_CAP = 4096  # largest dimension for explicitly stored operators
PATH_TERM_CAP = 10**8  # brute-force path-sum terms


@dataclass(frozen=True)
class FieldGrid:
    """Uniform symmetric on-site field grid phi_j = (j - n/2) * delta_phi."""

    n_points: int
    delta_phi: float

    def __post_init__(self):
        if self.n_points < 8 or self.n_points % 2:
            raise ValueError("n_points must be an even integer >= 8")
        if self.delta_phi <= 0:
            raise ValueError("delta_phi must be positive")

    @classmethod
    def for_mass(cls, m: float, n_points: int, extent: float | None = None) -> "FieldGrid":
        """Grid whose extent keeps the free ground state well interior.

        Default half-width 6/sqrt(2m), roughly six ground-state widths.
        """
        if extent is None:
            if m <= 0:
                raise ValueError("automatic extent needs m > 0")
            extent = 6.0 / math.sqrt(2.0 * m)
        return cls(n_points, 2.0 * extent / n_points)

    @classmethod
    def dual(cls, n_points: int) -> "FieldGrid":
        """Momentum-dual grid, delta_phi = delta_p = sqrt(2 pi / n).

        On this family the kappa = 1 momentum layer is an exact discrete
        Fresnel transform (a complete quadratic Gauss sum): the one-step
        kernel equals -i * sqrt(i/(2 pi)) exp(i (y-z)^2/2) * delta_phi with
        plain value differences and no wrap-around images. It is the
        refinement family on which the continuum-field limit of the
        path-integral identity can be tested to machine precision.
        """
        return cls(n_points, math.sqrt(2.0 * math.pi / n_points))

    @property
    def values(self) -> np.ndarray:
        n = self.n_points
        return (np.arange(n) - n // 2) * self.delta_phi

    @property
    def momenta(self) -> np.ndarray:
        """Conjugate momentum grid, spacing 2*pi/(n*delta_phi)."""
        n = self.n_points
        return (np.arange(n) - n // 2) * (2.0 * math.pi / (n * self.delta_phi))


def _dft(grid: FieldGrid) -> np.ndarray:
    """Centered unitary DFT, F[k, j] = exp(-i p_k phi_j)/sqrt(n)."""
    n = grid.n_points
    return np.exp(-1j * np.outer(grid.momenta, grid.values)) / math.sqrt(n)


def build_site_operators(grid: FieldGrid) -> tuple[np.ndarray, np.ndarray]:
    """Dense Hermitian (X, P) for one site; P = F^dagger diag(momenta) F."""
    f = _dft(grid)
    x = np.diag(grid.values).astype(complex)
    p = f.conj().T @ np.diag(grid.momenta).astype(complex) @ f
    return x, p


@dataclass(frozen=True)
class TruncatedLattice:
    """Periodic d=1 chain of L sites with an on-site field grid."""

    L: int
    grid: FieldGrid
    params: LatticeParams
    dim: int = field(init=False)

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("L must be >= 2 (L = 1 self-couples degenerately)")
        if self.params.d != 1:
            raise ValueError("the state-vector simulator is d=1 only")
        dim = self.grid.n_points**self.L
        if dim > DIM_CAP:
            raise DimensionCap(f"dimension {dim} exceeds cap {DIM_CAP}")
        object.__setattr__(self, "dim", dim)

    def config_index(self, config) -> int:
        return int(np.ravel_multi_index(tuple(config), (self.grid.n_points,) * self.L))


def _site_fields(lat: TruncatedLattice) -> list[np.ndarray]:
    """x_n broadcast over the configuration hypercube, one array per site."""
    n, L = lat.grid.n_points, lat.L
    vals = lat.grid.values
    out = []
    for site in range(L):
        shape = [1] * L
        shape[site] = n
        out.append(vals.reshape(shape))
    return out


def _quadratic_potential(lat: TruncatedLattice) -> np.ndarray:
    """sum_n [(x_{n+1}-x_n)^2/2 + (m a)^2 x_n^2/2] over configs (flattened)."""
    xs = _site_fields(lat)
    L = lat.L
    msq = (lat.params.m * lat.params.a) ** 2
    total = np.zeros((lat.grid.n_points,) * L)
    for n in range(L):
        total = total + 0.5 * (xs[(n + 1) % L] - xs[n]) ** 2 + 0.5 * msq * xs[n] ** 2
    return total.ravel()


def _neighbor_coupling(lat: TruncatedLattice) -> np.ndarray:
    """sum_n x_n x_{n+1} over configs (flattened)."""
    xs = _site_fields(lat)
    total = np.zeros((lat.grid.n_points,) * lat.L)
    for n in range(lat.L):
        total = total + xs[n] * xs[(n + 1) % lat.L]
    return total.ravel()


def _quartic_sum(lat: TruncatedLattice) -> np.ndarray:
    xs = _site_fields(lat)
    total = np.zeros((lat.grid.n_points,) * lat.L)
    for n in range(lat.L):
        total = total + xs[n] ** 4
    return total.ravel()


def _x_layer_phase(lat: TruncatedLattice, kind: str, lam: float) -> np.ndarray:
    """Phase angle of one X-layer (the half layer for Strang/Shift)."""
    kappa = lat.params.kappa
    lam_eff = lam * lat.params.a**2
    if kind == "Strang":
        return -0.5 * kappa * (_quadratic_potential(lat) + lam_eff / 24.0 * _quartic_sum(lat))
    if kind == "Trotter":
        return -kappa * (_quadratic_potential(lat) + lam_eff / 24.0 * _quartic_sum(lat))
    if kind == "Shift":
        m_par = lat.params.M
        return 0.5 * m_par * _neighbor_coupling(lat) + lam_eff / 24.0 * _quartic_sum(lat)
    raise ValueError(f"unknown circuit kind {kind!r}")


def quartic_interaction_phase(lat: TruncatedLattice, kind: str, lam: float) -> np.ndarray:
    """Phase angle theta of the diagonal interaction factor U_int = e^{i theta}.

    Returned as a real array so half steps can be taken by halving the angle
    (the principal square root would pick the wrong branch for |theta| > pi).
    """
    lam_eff = lam * lat.params.a**2
    quart = lam_eff / 24.0 * _quartic_sum(lat)
    if kind in ("Strang", "Trotter"):
        return -lat.params.kappa * quart
    if kind == "Shift":
        return 2.0 * quart
    raise ValueError(f"unknown circuit kind {kind!r}")


def _momentum_kernel(lat: TruncatedLattice, kind: str) -> np.ndarray:
    """One-site momentum-layer matrix."""
    grid = lat.grid
    f = _dft(grid)
    if kind in ("Strang", "Trotter"):
        phases = np.exp(-0.5j * lat.params.kappa * grid.momenta**2)
        return f.conj().T @ (phases[:, None] * f)
    if kind == "Shift":
        x, p = build_site_operators(grid)
        h = (x @ x + p @ p).astype(complex)
        w, v = np.linalg.eigh(h)
        return (v * np.exp(-0.25j * math.pi * w)) @ v.conj().T
    raise ValueError(f"unknown circuit kind {kind!r}")


def _apply_site_kernel(psi: np.ndarray, kernel: np.ndarray, lat: TruncatedLattice) -> np.ndarray:
    n, L = lat.grid.n_points, lat.L
    tensor = psi.reshape((n,) * L)
    for axis in range(L):
        tensor = np.moveaxis(np.tensordot(kernel, tensor, axes=([1], [axis])), 0, axis)
    return tensor.ravel()


def apply_step(lat: TruncatedLattice, kind: str, lam: float, psi: np.ndarray) -> np.ndarray:
    """Apply one circuit step to a state vector without storing the operator."""
    phase = _x_layer_phase(lat, kind, lam)
    kernel = _momentum_kernel(lat, kind)
    if kind == "Trotter":  # U = W_P W_X
        return _apply_site_kernel(np.exp(1j * phase) * psi, kernel, lat)
    layer = np.exp(1j * phase)
    return layer * _apply_site_kernel(layer * psi, kernel, lat)


def build_step(lat: TruncatedLattice, kind: str, lam: float) -> np.ndarray:
    """Dense one-step operator (DimensionCap above 4096 states)."""
    if lat.dim > DENSE_CAP:
        raise DimensionCap(f"dense operator of dimension {lat.dim} exceeds {DENSE_CAP}")
    phase = _x_layer_phase(lat, kind, lam)
    kernel = _momentum_kernel(lat, kind)
    full_kernel = np.array([[1.0 + 0.0j]])
    for _ in range(lat.L):
        full_kernel = np.kron(full_kernel, kernel)
    if kind == "Trotter":
        return full_kernel * np.exp(1j * phase)[None, :]
    layer = np.exp(1j * phase)
    return layer[:, None] * full_kernel * layer[None, :]


def amplitude_circuit(lat, kind: str, lam: float, phi_i, phi_f, tau: int) -> complex:
    """<phi_f | U^tau | phi_i> by repeated matrix-free application."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    psi = np.zeros(lat.dim, dtype=complex)
    psi[lat.config_index(phi_i)] = 1.0
    for _ in range(tau):
        psi = apply_step(lat, kind, lam, psi)
    return complex(psi[lat.config_index(phi_f)])


def amplitude_path_sum(lat, kind: str, lam: float, phi_i, phi_f, tau: int) -> complex:
    """Explicit sum over intermediate configurations of one-step elements.

    The unoptimized einsum iterates the full index space, so this really is
    the brute-force insertion-of-identity sum, not a matrix-product shortcut.
    """
    if tau < 1:
        raise ValueError("path sum needs tau >= 1")
    terms = lat.dim ** (tau - 1)
    if terms > PATH_TERM_CAP:
        raise BruteForceCap(f"{terms} path terms exceed cap {PATH_TERM_CAP}")
    step = build_step(lat, kind, lam)
    i_idx, f_idx = lat.config_index(phi_i), lat.config_index(phi_f)
    if tau == 1:
        return complex(step[f_idx, i_idx])
    letters = "abcdefghijklmnopqrstuvwxyz"[: tau - 1]
    subscripts = [letters[-1]] + [letters[k + 1] + letters[k] for k in range(tau - 2)][::-1]
    subscripts += [letters[0]]
    operands = [step[f_idx, :]] + [step] * (tau - 2) + [step[:, i_idx]]
    spec = ",".join([subscripts[0]] + subscripts[1:-1] + [subscripts[-1]]) + "->"
    return complex(np.einsum(spec, *operands, optimize=False))


def _chunked_intermediate_configs(n: int, n_vars: int, chunk: int = 1 << 18):
    if n_vars == 0:
        yield np.zeros((1, 0), dtype=int)
        return
    total = n**n_vars
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        yield np.stack(np.unravel_index(idx, (n,) * n_vars), axis=1)


def amplitude_action_form(lat, lam: float, phi_i, phi_f, tau: int) -> complex:
    """Riemann sum of the discrete action e^{iS} over intermediate configs.

    Strang kind only. The measure is sqrt(i/(2 pi kappa)) * delta_phi per
    site per timestep: the sqrt factors are the Gaussian kernel
    normalizations, the delta_phi of the L*(tau-1) intermediate variables are
    their Riemann weights, and the remaining delta_phi^L converts the
    delta-normalized field states of the continuum identity into the grid's
    orthonormal configuration kets.

    On :meth:`FieldGrid.dual` grids (kappa = 1) this equals
    (-i)^(tau*L) * amplitude_circuit exactly, the constant being the
    metaplectic phase of the discrete Fresnel kernel. On generic grids the
    two differ by wrap-around image interference that does not vanish at
    fixed extent (real-time kernels have distance-independent modulus).
    """
    if tau < 1:
        raise ValueError("action form needs tau >= 1")
    n, L = lat.grid.n_points, lat.L
    kappa = lat.params.kappa
    n_vars = L * (tau - 1)
    if n**n_vars > PATH_TERM_CAP:
        raise BruteForceCap(f"{n**n_vars} action-sum terms exceed cap {PATH_TERM_CAP}")
    vals = lat.grid.values
    msq = (lat.params.m * lat.params.a) ** 2
    lam_eff = lam * lat.params.a**2

    def potential(slices: np.ndarray) -> np.ndarray:
        # slices shape (..., L): site potential summed over the chain
        total = 0.0
        for site in range(L):
            x, x_next = slices[..., site], slices[..., (site + 1) % L]
            total = (
                total
                + 0.5 * (x_next - x) ** 2
                + 0.5 * msq * x**2
                + lam_eff / 24.0 * x**4
            )
        return total

    x_init = vals[np.asarray(phi_i, dtype=int)]
    x_final = vals[np.asarray(phi_f, dtype=int)]
    measure = (cmath.sqrt(1j / (2.0 * math.pi * kappa)) * lat.grid.delta_phi) ** (tau * L)
    total = 0.0 + 0.0j
    for block in _chunked_intermediate_configs(n, n_vars):
        slices = [np.broadcast_to(x_init, (block.shape[0], L))]
        for eta in range(tau - 1):
            slices.append(vals[block[:, eta * L : (eta + 1) * L]])
        slices.append(np.broadcast_to(x_final, (block.shape[0], L)))
        action = np.zeros(block.shape[0])
        for nu in range(tau):
            x_now, x_next = slices[nu], slices[nu + 1]
            kinetic = np.sum((x_next - x_now) ** 2, axis=-1) / (2.0 * kappa)
            action = action + kinetic - 0.5 * kappa * (potential(x_now) + potential(x_next))
        total += np.sum(np.exp(1j * action))
    return complex(measure * total)


def kernel_gaussian_check(grid: FieldGrid, match_phase: bool = False) -> float:
    """Max relative deviation of the DFT kernel from the Fresnel kernel.

    Compares <y|exp(-i P^2/2)|z> built from the grid DFT against
    sqrt(i/(2 pi)) exp(i (y-z)^2/2) * delta_phi for y, z in the inner half of
    the grid. With ``match_phase`` the comparison allows one global phase,
    fixed from the central diagonal element; on :meth:`FieldGrid.dual` grids
    that phase is exactly -i and the adjusted deviation is pure roundoff,
    while on generic grids wrap-around images keep the deviation at order
    one regardless of n_points.
    """
    f = _dft(grid)
    kernel = f.conj().T @ (np.exp(-0.5j * grid.momenta**2)[:, None] * f)
    target_unit = cmath.sqrt(1j / (2.0 * math.pi)) * grid.delta_phi
    vals = grid.values
    half = 0.25 * grid.n_points * grid.delta_phi
    inner = np.abs(vals) <= half
    target = target_unit * np.exp(0.5j * np.subtract.outer(vals, vals) ** 2)
    if match_phase:
        mid = grid.n_points // 2
        ratio = kernel[mid, mid] / target[mid, mid]
        target = target * (ratio / abs(ratio))
    diff = kernel - target
    return float(np.max(np.abs(diff[np.ix_(inner, inner)])) / abs(target_unit))


def translation_permutation(lat: TruncatedLattice) -> np.ndarray:
    """Index permutation of the one-site cyclic shift on configurations."""
    n, L = lat.grid.n_points, lat.L
    idx = np.arange(lat.dim)
    digits = np.stack(np.unravel_index(idx, (n,) * L), axis=0)
    rolled = np.roll(digits, 1, axis=0)
    return np.ravel_multi_index(tuple(rolled), (n,) * L)


def interaction_picture_check(lat, kind: str, lam: float, tau: int) -> float:
    """Operator-norm deviation of the interaction-picture product identity.

    For the symmetric factorization U = U_int^{1/2} U_0 U_int^{1/2} (Strang and
    Shift), U_0^{-tau} U^tau must equal
    U_{int,I}^{1/2}(tau) U_{int,I}(tau-1) ... U_{int,I}(1) U_{int,I}^{1/2}(0);
    for the Trotter ordering U = U_0 U_int it is the plain ordered product of
    the full U_{int,I}(nu), nu = tau-1 .. 0. Returns the max deviation over
    1..tau steps.
    """
    if lat.dim > DENSE_CAP:
        raise DimensionCap(f"dense check needs dimension <= {DENSE_CAP}, got {lat.dim}")
    step = build_step(lat, kind, lam)
    free = build_step(lat, kind, 0.0)
    int_phase = quartic_interaction_phase(lat, kind, lam)
    free_dag = free.conj().T

    def int_picture(nu: int, half: bool) -> np.ndarray:
        diag = np.exp(1j * int_phase * (0.5 if half else 1.0))
        fwd = np.linalg.matrix_power(free, nu)
        return np.linalg.matrix_power(free_dag, nu) @ (diag[:, None] * fwd)

    worst = 0.0
    for steps in range(1, tau + 1):
        lhs = np.linalg.matrix_power(free_dag, steps) @ np.linalg.matrix_power(step, steps)
        if kind == "Trotter":
            rhs = np.eye(lat.dim, dtype=complex)
            for nu in range(steps - 1, -1, -1):
                rhs = rhs @ int_picture(nu, half=False)
        else:
            rhs = int_picture(steps, half=True)
            for nu in range(steps - 1, 0, -1):
                rhs = rhs @ int_picture(nu, half=False)
            rhs = rhs @ int_picture(0, half=True)
        worst = max(worst, float(np.linalg.norm(lhs - rhs, 2)))
    return worst
