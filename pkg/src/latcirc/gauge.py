"""Z_N lattice gauge theory in d=2: transfer operator vs. Wilson path integral.

The gauge group is the cyclic group Z_N embedded as k -> exp(2 pi i k/N), so
Re tr[U_k] = cos(2 pi k/N) and the Haar integral is the exact uniform average
(1/N) sum_k. Link states are the orthonormal kets |u>, u = 0..N-1; the
transfer operator is T = W_el W_mag with

    W_mag = diag exp(-i (2 kappa/g^2) sum_{spatial plaquettes} cos(2 pi h/N))
    W_el  = prod_links (1/N) sum_v exp(-i (2/(kappa g^2)) cos(2 pi v/N)) L(v)

where L(v)|u> = |u - v mod N> and h is the plaquette holonomy. For finite N
the path-integral equality is an exact algebraic identity and is checked here
by brute force. Note that W_el is *not* unitary in general: its per-link
eigenvalues are Fourier coefficients of exp(-i beta cos), which have unit
modulus only for N = 1; ``unitarity_report`` measures this instead of
assuming it, and the equivalence identity does not depend on it.

Amplitude convention: basis kets in the equivalence check are delta-normalized
against the Haar measure (<v|u> = N delta_{uv} per link), the convention in
which the transfer-operator matrix elements carry no 1/N factors and the path
integral has one 1/N per summed link variable. The quoted left side is
therefore N^{n_links} times the orthonormal-basis matrix element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BruteForceCap, DimensionCap, OddLattice
from .quadrature import fsum_complex

__all__ = [
    "GaugeGroupZN",
    "GaugeLattice",
    "GaugeOperator",
    "build_wmag",
    "build_wel",
    "wel_link_matrix",
    "plaquette_coloring",
    "gauge_transform",
    "gauss_projector",
    "apply_transfer",
    "amplitude_equiv_check",
    "unitarity_report",
]

DENSE_CAP = 4096
STATE_CAP = 2**22  # #links * log2(N) <= 22
BRUTE_TERM_CAP = 10**8


@dataclass(frozen=True)
class GaugeGroupZN:
    """Cyclic group of order N with the defining U(1) embedding."""

    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("group order must be >= 1")

    def retrace(self, k) -> np.ndarray:
        """Re tr[U_k] = cos(2 pi k / N)."""
        return np.cos(2.0 * math.pi * np.asarray(k) / self.N)


@dataclass(frozen=True)
class GaugeLattice:
    """Periodic Lx x Ly spatial lattice (d=2); links indexed 2*site + dir."""

    Lx: int
    Ly: int
    n_sites: int = field(init=False)
    n_links: int = field(init=False)

    def __post_init__(self):
        if self.Lx < 1 or self.Ly < 1:
            raise ValueError("lattice extents must be positive")
        object.__setattr__(self, "n_sites", self.Lx * self.Ly)
        object.__setattr__(self, "n_links", 2 * self.Lx * self.Ly)

    def site(self, x: int, y: int) -> int:
        return (x % self.Lx) * self.Ly + (y % self.Ly)

    def link(self, x: int, y: int, direction: int) -> int:
        return 2 * self.site(x, y) + direction

    def link_endpoints(self, link: int) -> tuple[int, int]:
        """(from_site, to_site) of a link."""
        site, direction = divmod(link, 2)
        x, y = divmod(site, self.Ly)
        return site, self.site(x + 1, y) if direction == 0 else self.site(x, y + 1)

    def plaquettes(self) -> list[tuple[int, int, int, int]]:
        """Per site (x, y): links traversed as +x, +y(x+1), -x(y+1), -y.

        Holonomy of config u is u[l0] + u[l1] - u[l2] - u[l3] mod N.
        """
        out = []
        for x in range(self.Lx):
            for y in range(self.Ly):
                out.append(
                    (
                        self.link(x, y, 0),
                        self.link(x + 1, y, 1),
                        self.link(x, y + 1, 0),
                        self.link(x, y, 1),
                    )
                )
        return out


def _state_dim(lat: GaugeLattice, group: GaugeGroupZN) -> int:
    dim = group.N**lat.n_links
    if dim > STATE_CAP:
        raise DimensionCap(f"configuration space {dim} exceeds cap {STATE_CAP}")
    return dim


def _config_digits(lat: GaugeLattice, group: GaugeGroupZN) -> np.ndarray:
    """(dim, n_links) int array of all link configurations, index order."""
    dim = _state_dim(lat, group)
    return np.stack(
        np.unravel_index(np.arange(dim), (group.N,) * lat.n_links), axis=1
    )


def config_index(lat: GaugeLattice, group: GaugeGroupZN, config) -> int:
    return int(np.ravel_multi_index(tuple(int(c) for c in config), (group.N,) * lat.n_links))


@dataclass
class GaugeOperator:
    """Operator on the link configuration space in one of three shapes:

    diagonal phases (W_mag), an index permutation (D(Omega)), or an explicit
    dense matrix. ``dense()`` materializes small operators for the algebraic
    checks; ``apply`` works matrix-free in all three shapes.
    """

    label: str
    dim: int
    diag: np.ndarray | None = None
    perm: np.ndarray | None = None
    matrix: np.ndarray | None = None
    link_matrix: np.ndarray | None = None  # per-link factor of a product operator
    lat: GaugeLattice | None = None
    group: GaugeGroupZN | None = None

    def apply(self, vec: np.ndarray) -> np.ndarray:
        if self.diag is not None:
            return self.diag * vec
        if self.perm is not None:
            out = np.empty_like(vec)
            out[self.perm] = vec
            return out
        if self.link_matrix is not None:
            n = self.group.N
            tensor = vec.reshape((n,) * self.lat.n_links)
            for axis in range(self.lat.n_links):
                tensor = np.moveaxis(
                    np.tensordot(self.link_matrix, tensor, axes=([1], [axis])), 0, axis
                )
            return tensor.ravel()
        return self.matrix @ vec

    def dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        if self.dim > DENSE_CAP:
            raise DimensionCap(f"dense gauge operator of dimension {self.dim}")
        if self.diag is not None:
            return np.diag(self.diag)
        if self.perm is not None:
            mat = np.zeros((self.dim, self.dim), dtype=complex)
            mat[self.perm, np.arange(self.dim)] = 1.0
            return mat
        out = np.array([[1.0 + 0.0j]])
        for _ in range(self.lat.n_links):
            out = np.kron(out, self.link_matrix)
        return out


def _holonomies(lat: GaugeLattice, group: GaugeGroupZN, digits: np.ndarray) -> np.ndarray:
    """(n_configs, n_plaquettes) holonomy table, digits shape (..., n_links)."""
    cols = []
    for l0, l1, l2, l3 in lat.plaquettes():
        cols.append(
            np.mod(digits[..., l0] + digits[..., l1] - digits[..., l2] - digits[..., l3], group.N)
        )
    return np.stack(cols, axis=-1)


def build_wmag(
    lat: GaugeLattice, group: GaugeGroupZN, g: float, kappa: float = 1.0
) -> GaugeOperator:
    """Diagonal plaquette layer exp(-i (2 kappa/g^2) sum_ps cos(2 pi h/N))."""
    if g <= 0:
        raise ValueError("gauge coupling must be positive")
    digits = _config_digits(lat, group)
    action = group.retrace(_holonomies(lat, group, digits)).sum(axis=-1)
    return GaugeOperator(
        "W_mag", digits.shape[0], diag=np.exp(-1j * (2.0 * kappa / g**2) * action)
    )


def wel_link_matrix(group: GaugeGroupZN, g: float, kappa: float = 1.0) -> np.ndarray:
    """Per-link electric factor (1/N) sum_v exp(-i (2/(kappa g^2)) cos(2 pi v/N)) L(v)."""
    n = group.N
    beta = 2.0 / (kappa * g**2)
    mat = np.zeros((n, n), dtype=complex)
    for v in range(n):
        weight = np.exp(-1j * beta * group.retrace(v)) / n
        for u in range(n):
            mat[(u - v) % n, u] += weight
    return mat


def build_wel(
    lat: GaugeLattice, group: GaugeGroupZN, g: float, kappa: float = 1.0
) -> GaugeOperator:
    dim = _state_dim(lat, group)
    return GaugeOperator(
        "W_el", dim, link_matrix=wel_link_matrix(group, g, kappa), lat=lat, group=group
    )


def apply_transfer(
    lat: GaugeLattice, group: GaugeGroupZN, g: float, kappa: float, vec: np.ndarray
) -> np.ndarray:
    """One application of T = W_el W_mag, matrix-free."""
    return build_wel(lat, group, g, kappa).apply(build_wmag(lat, group, g, kappa).apply(vec))


def plaquette_coloring(lat: GaugeLattice) -> tuple[list[int], list[int]]:
    """Chessboard split of plaquette indices into two link-disjoint layers."""
    if lat.Lx % 2 or lat.Ly % 2:
        raise OddLattice("chessboard coloring needs even Lx and Ly")
    layers: tuple[list[int], list[int]] = ([], [])
    for idx in range(lat.n_sites):
        x, y = divmod(idx, lat.Ly)
        layers[(x + y) % 2].append(idx)
    return layers


def gauge_transform(lat: GaugeLattice, group: GaugeGroupZN, omega) -> GaugeOperator:
    """Permutation operator D(Omega): u_{x,e} -> omega_x + u_{x,e} - omega_{x+e}."""
    omega = np.asarray(omega, dtype=int)
    if omega.shape != (lat.n_sites,):
        raise ValueError(f"omega must assign one group element per site ({lat.n_sites})")
    digits = _config_digits(lat, group)
    transformed = digits.copy()
    for link in range(lat.n_links):
        frm, to = lat.link_endpoints(link)
        transformed[:, link] = np.mod(digits[:, link] + omega[frm] - omega[to], group.N)
    perm = np.ravel_multi_index(tuple(transformed.T), (group.N,) * lat.n_links)
    return GaugeOperator("D(Omega)", digits.shape[0], perm=perm)


def gauss_projector(lat: GaugeLattice, group: GaugeGroupZN) -> GaugeOperator:
    """P_G = |G|^{-#sites} sum_Omega D(Omega), as a dense matrix."""
    dim = _state_dim(lat, group)
    if dim > DENSE_CAP:
        raise DimensionCap(f"dense projector of dimension {dim}")
    total = np.zeros((dim, dim), dtype=complex)
    n_omegas = group.N**lat.n_sites
    for flat in range(n_omegas):
        omega = np.unravel_index(flat, (group.N,) * lat.n_sites)
        total += gauge_transform(lat, group, np.array(omega)).dense()
    return GaugeOperator("P_G", dim, matrix=total / n_omegas)


def _apply_gauss_projector(
    lat: GaugeLattice, group: GaugeGroupZN, vec: np.ndarray
) -> np.ndarray:
    out = np.zeros_like(vec)
    n_omegas = group.N**lat.n_sites
    for flat in range(n_omegas):
        omega = np.unravel_index(flat, (group.N,) * lat.n_sites)
        out += gauge_transform(lat, group, np.array(omega)).apply(vec)
    return out / n_omegas


def unitarity_report(
    lat: GaugeLattice, group: GaugeGroupZN, g: float, kappa: float = 1.0
) -> float:
    """Operator-norm deviation ||w^dagger w - 1|| of the per-link W_el factor.

    Zero only at N = 1; for N = 2 the eigenvalue moduli are |cos beta| and
    |sin beta| with beta = 2/(kappa g^2). A genuine finding, reported as is.
    """
    w = wel_link_matrix(group, g, kappa)
    return float(np.linalg.norm(w.conj().T @ w - np.eye(group.N), 2))


def amplitude_equiv_check(
    lat: GaugeLattice,
    group: GaugeGroupZN,
    g: float,
    kappa: float,
    u_i,
    u_f,
    tau: int,
) -> tuple[complex, complex, float]:
    """Transfer-operator amplitude vs. brute-force Wilson path integral.

    Left side: N^{n_links} <u_f| T^tau P_G |u_i> (delta-normalized kets; the
    Gauss projector is inserted because basis configurations are not
    individually gauge invariant). Right side: exact group sum over all
    intermediate spatial links and all temporal links of e^{iS}, one factor
    1/N per summed variable, where e^{iS} carries one phase
    exp(-i (2 kappa/g^2) cos) per spatial plaquette at times 0..tau-1 and one
    exp(-i (2/(kappa g^2)) cos) per temporal plaquette. Returns (lhs, rhs,
    |lhs - rhs|); the equality is exact for every finite N.
    """
    if tau < 1:
        raise ValueError("tau must be >= 1")
    n = group.N
    u_i = np.asarray(u_i, dtype=int) % n
    u_f = np.asarray(u_f, dtype=int) % n
    if u_i.shape != (lat.n_links,) or u_f.shape != (lat.n_links,):
        raise ValueError(f"configurations must assign one element per link ({lat.n_links})")

    n_spatial_vars = lat.n_links * (tau - 1)
    n_temporal_vars = lat.n_sites * tau
    n_vars = n_spatial_vars + n_temporal_vars
    if n**n_vars > BRUTE_TERM_CAP:
        raise BruteForceCap(f"{n**n_vars} brute-force terms exceed cap {BRUTE_TERM_CAP}")

    # left side: dense/matrix-free transfer applications
    dim = _state_dim(lat, group)
    psi = np.zeros(dim, dtype=complex)
    psi[config_index(lat, group, u_i)] = 1.0
    psi = _apply_gauss_projector(lat, group, psi)
    for _ in range(tau):
        psi = apply_transfer(lat, group, g, kappa, psi)
    lhs = complex(psi[config_index(lat, group, u_f)]) * n**lat.n_links

    # right side: chunked enumeration of all summed link variables
    coeff_s = 2.0 * kappa / g**2
    coeff_t = 2.0 / (kappa * g**2)
    endpoints = [lat.link_endpoints(link) for link in range(lat.n_links)]
    chunk = 1 << 16
    total_terms = n**n_vars
    chunks = []
    for start in range(0, total_terms, chunk):
        idx = np.arange(start, min(start + chunk, total_terms))
        digits = (
            np.stack(np.unravel_index(idx, (n,) * n_vars), axis=1)
            if n_vars
            else np.zeros((1, 0), dtype=int)
        )
        slices = [np.broadcast_to(u_i, (len(idx) if n_vars else 1, lat.n_links))]
        for eta in range(tau - 1):
            slices.append(digits[:, eta * lat.n_links : (eta + 1) * lat.n_links])
        slices.append(np.broadcast_to(u_f, slices[0].shape))
        temporal = digits[:, n_spatial_vars:].reshape(-1, tau, lat.n_sites)

        action = np.zeros(slices[0].shape[0])
        for nu in range(tau):
            action += coeff_s * group.retrace(_holonomies(lat, group, slices[nu])).sum(axis=-1)
            t_now = temporal[:, nu, :]
            for link, (frm, to) in enumerate(endpoints):
                h = np.mod(
                    t_now[:, frm] + slices[nu][:, link] - t_now[:, to] - slices[nu + 1][:, link],
                    n,
                )
                action += coeff_t * group.retrace(h)
        chunks.append(np.sum(np.exp(-1j * action)))
    rhs = complex(fsum_complex(chunks)) / n**n_vars
    return lhs, rhs, abs(lhs - rhs)
