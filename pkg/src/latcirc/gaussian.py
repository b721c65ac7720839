"""Exact symplectic simulation of the free (lambda = 0) circuits.

The free circuits are quadratic, so Heisenberg evolution acts linearly on the
pair (phi, pi). We track that linear action in the *coefficient* convention:
a functional  f_phi . phi + f_pi . pi  evolves by one timestep as
(f_phi, f_pi) -> B (f_phi, f_pi), where B is the 2x2 per-momentum block (or
the 2L x 2L real-space map). In this convention the annihilation-operator
coefficients (alpha, beta) are literally an eigenvector of B.

Timestep convention: the per-mode blocks use dt in their off-diagonal entries
(they coincide with the lattice-spacing form whenever dt = a, the circuits'
native operating point), which keeps the mode normalization and the eigenvalue
identities exact for any dt/a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDispersion, LatticeTooSmall
from .kinematics import LatticeParams, cosine_symbol, dispersion_theta, omega, validate_momentum

__all__ = [
    "MomentumBlock",
    "ModeData",
    "RealSpaceMap",
    "shift_block",
    "strang_block",
    "bogoliubov_modes",
    "realspace_map",
    "momentum_blocks_of_map",
    "mover_shift_check",
    "mover_shift_residual",
    "lightcone_radius",
    "symplectic_defect",
    "block_phase",
]

CONE_THRESHOLD = 1e-13  # double-precision noise floor with safety margin


@dataclass(frozen=True)
class MomentumBlock:
    """One-mode evolution block acting on (phi(p), pi(p)) coefficients."""

    matrix: np.ndarray
    params: LatticeParams
    p: np.ndarray
    kind: str


@dataclass(frozen=True)
class ModeData:
    """Annihilation-operator data b_p = alpha*phi(p) + beta*pi(p)."""

    alpha: complex
    beta: complex
    theta: float
    omega: float


@dataclass(frozen=True)
class RealSpaceMap:
    """One-step coefficient map on a periodic d=1 chain of L sites.

    ``matrix`` is 2L x 2L real with site blocks ordered (phi_0..phi_{L-1},
    pi_0..pi_{L-1}); it is block-circulant by translation invariance.
    """

    matrix: np.ndarray
    params: LatticeParams
    L: int
    kind: str


def shift_block(params: LatticeParams, p) -> MomentumBlock:
    """Free Shift-circuit block [[c, (c^2-1)/dt], [dt, c]]."""
    arr = validate_momentum(params, p)
    c = cosine_symbol(params, arr)
    dt = params.dt
    mat = np.array([[c, (c * c - 1.0) / dt], [dt, c]])
    return MomentumBlock(mat, params, arr, "Shift")


def strang_block(params: LatticeParams, p) -> MomentumBlock:
    """Strang-split block: X-shear (half step) . P-shear . X-shear (half step).

    The X-shear curvature is the lattice-Laplacian symbol
    m^2 + sum_i 4 sin^2(p_i a / 2)/a^2.
    """
    arr = validate_momentum(params, p)
    dt = params.dt
    curv = params.m**2 + float(np.sum(4.0 * np.sin(arr * params.a / 2.0) ** 2)) / params.a**2
    x_half = np.array([[1.0, -0.5 * dt * curv], [0.0, 1.0]])
    p_full = np.array([[1.0, 0.0], [dt, 1.0]])
    return MomentumBlock(x_half @ p_full @ x_half, params, arr, "Strang")


def block_phase(block: MomentumBlock) -> float:
    """Positive eigenphase theta*dt of a block, from its eigenvalues."""
    eig = np.linalg.eigvals(block.matrix)
    phase = float(np.max(np.abs(np.angle(eig))))
    if phase <= 0.0 or phase >= math.pi:
        raise DegenerateDispersion("block has no elliptic eigenphase in (0, pi)")
    return phase


def bogoliubov_modes(params: LatticeParams, p) -> ModeData:
    """Mode coefficients alpha = sqrt(sin(theta dt)/(2 dt)), beta = i*sqrt(dt/(2 sin(theta dt))).

    These satisfy alpha*conj(beta) - conj(alpha)*beta = -i and are an
    eigenvector of :func:`shift_block` with eigenvalue exp(-i theta dt).
    """
    theta = dispersion_theta(params, p)  # raises DegenerateDispersion at |c| >= 1
    s = math.sin(theta * params.dt)
    alpha = math.sqrt(s / (2.0 * params.dt))
    beta = 1j * math.sqrt(params.dt / (2.0 * s))
    return ModeData(alpha, beta, theta, omega(params, p))


def _circulant(L: int, entries: dict[int, float]) -> np.ndarray:
    """Circulant L x L matrix with given {offset: value} couplings."""
    mat = np.zeros((L, L))
    for off, val in entries.items():
        for n in range(L):
            mat[(n + off) % L, n] += val
    return mat


def realspace_map(params: LatticeParams, L: int, kind: str) -> RealSpaceMap:
    """Position-space one-step coefficient map for a periodic d=1 chain.

    Its DFT block-diagonalization reproduces :func:`shift_block` or
    :func:`strang_block` at every grid momentum.
    """
    if params.d != 1:
        raise ValueError("real-space maps are implemented for d=1 only")
    if L < 2:
        raise ValueError("need at least two sites")
    dt = params.dt
    eye = np.eye(L)
    if kind == "Shift":
        # c-operator: M cos(pa) <-> (M/2)(T + T^dagger)
        cop = _circulant(L, {1: params.M / 2.0, -1: params.M / 2.0})
        top = np.hstack([cop, (cop @ cop - eye) / dt])
        bottom = np.hstack([dt * eye, cop])
        mat = np.vstack([top, bottom])
    elif kind == "Strang":
        curv = _circulant(
            L,
            {0: params.m**2 + 2.0 / params.a**2, 1: -1.0 / params.a**2, -1: -1.0 / params.a**2},
        )
        zero = np.zeros((L, L))
        x_half = np.block([[eye, -0.5 * dt * curv], [zero, eye]])
        p_full = np.block([[eye, zero], [dt * eye, eye]])
        mat = x_half @ p_full @ x_half
    else:
        raise ValueError(f"unknown circuit kind {kind!r}")
    return RealSpaceMap(mat, params, L, kind)


def momentum_blocks_of_map(rmap: RealSpaceMap) -> list[tuple[float, np.ndarray]]:
    """DFT-diagonalize a block-circulant map into per-momentum 2x2 blocks.

    Returns (p_k, block) pairs for p_k = 2*pi*k/(L*a), k = 0..L-1. Exact for
    circulant blocks because plane waves are their eigenvectors.
    """
    L = rmap.L
    out = []
    for k in range(L):
        v = np.exp(2j * math.pi * k * np.arange(L) / L)
        block = np.empty((2, 2), dtype=complex)
        for col, src in enumerate((np.concatenate([v, 0 * v]), np.concatenate([0 * v, v]))):
            image = rmap.matrix @ src
            block[0, col] = image[:L] @ v.conj() / (v.conj() @ v)
            block[1, col] = image[L:] @ v.conj() / (v.conj() @ v)
        p_k = 2.0 * math.pi * k / (L * rmap.params.a)
        out.append((p_k, block))
    return out


def symplectic_defect(mat: np.ndarray) -> float:
    """max |S^T J S - J| for a 2L x 2L map in (phi-block, pi-block) order."""
    L = mat.shape[0] // 2
    j = np.block([[np.zeros((L, L)), np.eye(L)], [-np.eye(L), np.zeros((L, L))]])
    return float(np.max(np.abs(mat.T @ j @ mat - j)))


def _mover_functionals(params: LatticeParams, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Left/right mover coefficient vectors, one row per site."""
    a = params.a
    left = np.zeros((L, 2 * L))
    right = np.zeros((L, 2 * L))
    for n in range(L):
        for sign, arr in ((1.0, left), (-1.0, right)):
            arr[n, L + n] = 0.5  # pi_n / 2
            arr[n, (n + 1) % L] += sign / (4.0 * a)  # +- central difference of phi
            arr[n, (n - 1) % L] -= sign / (4.0 * a)
    return left, right


def mover_shift_residual(params: LatticeParams, L: int) -> float:
    """Max |S l_{L,n} - l_{L,n+1}| and |S l_{R,n} - l_{R,n-1}| over all sites.

    No mass check: with m != 0 this residual is genuinely nonzero.
    """
    smap = realspace_map(params, L, "Shift").matrix
    left, right = _mover_functionals(params, L)
    res = 0.0
    for n in range(L):
        res = max(res, float(np.max(np.abs(smap @ left[n] - left[(n + 1) % L]))))
        res = max(res, float(np.max(np.abs(smap @ right[n] - right[(n - 1) % L]))))
    return res


def mover_shift_check(params: LatticeParams, L: int) -> float:
    """Exact mover-shift residual of the free Shift circuit at m = 0.

    Left movers advance one site per step and right movers retreat one site;
    the property holds only at M = 1 (massless) with dt = a, so anything else
    is rejected.
    """
    if params.m != 0.0:
        raise ValueError("mover shift is exact only at m = 0 (M = 1)")
    if params.kappa != 1.0:
        raise ValueError("mover shift is exact only at dt = a")
    if params.d != 1:
        raise ValueError("movers are defined on d=1 chains")
    return mover_shift_residual(params, L)


def lightcone_radius(
    params: LatticeParams, L: int, kind: str, tau: int, observable: str = "phi"
) -> int:
    """Causal-cone radius of a single-site perturbation after tau steps.

    Evolves the Heisenberg functional of one site's field (``"phi"``, default),
    momentum (``"pi"``) or both, and returns the largest circular site offset
    carrying any coefficient above the support threshold. Bounded by 2*tau for
    both circuits: each step applies two range-1 X-layers and an on-site
    P-layer.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if L <= 4 * tau + 2:
        raise LatticeTooSmall(f"need L > 4*tau + 2 = {4 * tau + 2} to rule out wrap-around")
    if observable not in ("phi", "pi", "both"):
        raise ValueError("observable must be 'phi', 'pi' or 'both'")
    smap = np.linalg.matrix_power(realspace_map(params, L, kind).matrix, tau)
    n0 = L // 2
    radius = 0
    columns = {"phi": (n0,), "pi": (L + n0,), "both": (n0, L + n0)}[observable]
    for col in columns:
        evolved = smap[:, col]
        support = np.abs(evolved.reshape(2, L)).max(axis=0) > CONE_THRESHOLD
        for n in np.nonzero(support)[0]:
            dist = min(abs(int(n) - n0), L - abs(int(n) - n0))
            radius = max(radius, dist)
    return radius
