"""Periodic transverse-field Ising ring, battery/charger split, and its states.

    H_tot = -(1 - f) sum_i X_i X_{i+1} - f sum_i Z_i  [- h sum_i X_i]

with periodic boundary conditions.  The battery is a block of ``M``
consecutive sites starting at ``start``; the charger is the rest of the ring.
"""

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg

from . import _kernels
from .exceptions import DomainError
from .spin_algebra import expval, fix_phase, pauli, ring_block

N_MAX = 14
F_CRITICAL = 0.5
BRANCHES = ("plus", "minus", "raw", "mixed")


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of one chain configuration.

    ``ground_branch`` picks the zero-temperature state: ``plus``/``minus`` are
    the finite-size symmetry-broken states, ``raw`` the bare lowest
    eigenvector and ``mixed`` the equal mixture of the two lowest states
    below the critical point.
    """

    N: int
    f: float
    T: float = 0.0
    tilt_h: float = 0.0
    ground_branch: str = "plus"

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or not 2 <= self.N <= N_MAX:
            raise DomainError(f"N must be an integer in [2, {N_MAX}], got {self.N!r}")
        if not 0.0 <= self.f <= 1.0:
            raise DomainError(f"f must lie in [0, 1], got {self.f!r}")
        if not self.T >= 0.0:
            raise DomainError(f"T must be >= 0, got {self.T!r}")
        if not self.tilt_h >= 0.0:
            raise DomainError(f"tilt_h must be >= 0, got {self.tilt_h!r}")
        if self.ground_branch not in BRANCHES:
            raise DomainError(f"ground_branch must be one of {BRANCHES}, got {self.ground_branch!r}")

    @property
    def lam(self):
        """Coupling-to-field ratio (1 - f) / f; infinite at f = 0."""
        return np.inf if self.f == 0.0 else (1.0 - self.f) / self.f


@dataclass(frozen=True)
class Partition:
    start: int
    M: int

    def sites(self, N):
        return ring_block(self.start, self.M, N)

    def validate(self, N):
        if not 1 <= self.M <= N - 1:
            raise DomainError(f"battery size M={self.M} must lie in [1, {N - 1}] for N={N}")
        if not 0 <= self.start < N:
            raise DomainError(f"battery start {self.start} out of range for N={N}")
        return self


def _ring_bonds(N):
    if N == 2:
        # both ring bonds join the same pair of sites
        return [(0, 1), (1, 0)]
    return [(i, (i + 1) % N) for i in range(N)]


def _assemble(n, bonds, jx, z_sites, hz, x_sites=(), hx=0.0):
    bi = [b[0] for b in bonds]
    bj = [b[1] for b in bonds]
    return _kernels.fill_ising(
        n, bi, bj, [jx] * len(bonds), list(z_sites), [hz] * len(z_sites), list(x_sites), [hx] * len(x_sites)
    )


def build_h_tot(spec):
    """Full-ring Hamiltonian as a dense real matrix."""
    N, f = spec.N, spec.f
    sites = range(N)
    tilt_sites = sites if spec.tilt_h > 0 else ()
    return _assemble(N, _ring_bonds(N), -(1.0 - f), sites, -f, tilt_sites, -spec.tilt_h)


def open_chain_hamiltonian(M, f):
    """Bare Hamiltonian of an open block of ``M`` sites (the battery's H_S)."""
    bonds = [(j, j + 1) for j in range(M - 1)]
    return _assemble(M, bonds, -(1.0 - f), range(M), -f)


def build_h_parts(spec, part):
    """(H_S, H_R, H_int) as full-ring operators with H_S + H_R + H_int = H_tot."""
    N, f = spec.N, spec.f
    part.validate(N)
    battery = set(part.sites(N))
    inside_s, inside_r, cut = [], [], []
    for i, j in _ring_bonds(N):
        if i in battery and j in battery:
            inside_s.append((i, j))
        elif i not in battery and j not in battery:
            inside_r.append((i, j))
        else:
            cut.append((i, j))
    charger = [k for k in range(N) if k not in battery]
    h_s = _assemble(N, inside_s, -(1.0 - f), sorted(battery), -f)
    h_r = _assemble(N, inside_r, -(1.0 - f), charger, -f)
    h_int = _assemble(N, cut, -(1.0 - f), (), 0.0)
    return h_s, h_r, h_int


def cyclic_shift(N):
    """Permutation matrix translating every site by one position on the ring."""
    dim = 1 << N
    states = np.arange(dim)
    # bit of site i moves to site i+1: rotate the N-bit word right by one
    shifted = (states >> 1) | ((states & 1) << (N - 1))
    out = np.zeros((dim, dim))
    out[shifted, states] = 1.0
    return out


def _parity_sectors(N):
    states = np.arange(1 << N)
    odd = np.zeros(1 << N, dtype=bool)
    for k in range(N):
        odd ^= ((states >> k) & 1).astype(bool)
    return np.flatnonzero(~odd), np.flatnonzero(odd)


@lru_cache(maxsize=16)
def _eigensystem(N, f, tilt_h, lowest):
    h = build_h_tot(ChainSpec(N=N, f=f, tilt_h=tilt_h))
    subset = None if lowest is None else [0, min(lowest, (1 << N) // 2) - 1]
    if tilt_h > 0:
        values, vectors = linalg.eigh(h, subset_by_index=subset)
    else:
        # without a tilt H_tot conserves the Z-parity; diagonalise each sector
        dim = 1 << N
        parts_v, parts_w = [], []
        for idx in _parity_sectors(N):
            w, v = linalg.eigh(h[np.ix_(idx, idx)], subset_by_index=subset)
            full = np.zeros((dim, v.shape[1]))
            full[idx] = v
            parts_w.append(w)
            parts_v.append(full)
        values = np.concatenate(parts_w)
        vectors = np.hstack(parts_v)
        order = np.argsort(values, kind="stable")
        values, vectors = values[order], vectors[:, order]
    if lowest is not None:
        values, vectors = values[:lowest], vectors[:, :lowest]
    values = np.ascontiguousarray(values)
    vectors = np.ascontiguousarray(vectors)
    values.setflags(write=False)
    vectors.setflags(write=False)
    return values, vectors


def eigensystem(spec, lowest=None):
    """Cached ascending eigenvalues and eigenvectors of H_tot for ``spec``.

    With ``lowest`` set only that many low-lying states are computed.
    """
    return _eigensystem(int(spec.N), float(spec.f), float(spec.tilt_h), lowest)


def ground_state(spec):
    """Zero-temperature state vector of the ring for the chosen branch.

    Below the critical point the plus/minus branches approximate the two
    degenerate symmetry-broken ground states by (|0> +/- |1>)/sqrt(2) from
    the two lowest eigenvectors; ``plus`` is the one with <X_0> >= 0.
    """
    if spec.T > 0:
        raise DomainError("ground_state requires T = 0; use thermal_state")
    if spec.ground_branch == "mixed":
        raise DomainError("the mixed branch is a density matrix; use mixed_ground_state")
    values, vecs = eigensystem(spec, lowest=2)
    low = fix_phase(vecs[:, :2]).real
    if spec.tilt_h > 0 or spec.ground_branch == "raw" or spec.f >= F_CRITICAL:
        return low[:, 0]
    x0 = pauli("x", 0, spec.N).real
    if values[1] - values[0] < 1e-9:
        # exact degeneracy: rotate inside the ground space onto definite <X_0>
        _, rot = np.linalg.eigh(low.T @ x0 @ low)
        pair = low @ rot
        m = [expval(x0, pair[:, k]) for k in range(2)]
        plus, minus = (pair[:, 1], pair[:, 0]) if m[1] >= m[0] else (pair[:, 0], pair[:, 1])
    else:
        a = (low[:, 0] + low[:, 1]) / np.sqrt(2.0)
        b = (low[:, 0] - low[:, 1]) / np.sqrt(2.0)
        plus, minus = (a, b) if expval(x0, a) >= 0.0 else (b, a)
    return plus if spec.ground_branch == "plus" else minus


def mixed_ground_state(spec):
    """Equal mixture of the two lowest eigenstates below f_c (pure ground state above)."""
    if spec.T > 0:
        raise DomainError("mixed_ground_state requires T = 0")
    _, vecs = eigensystem(spec, lowest=2)
    if spec.f >= F_CRITICAL:
        v = vecs[:, 0]
        return np.outer(v, v)
    return 0.5 * (np.outer(vecs[:, 0], vecs[:, 0]) + np.outer(vecs[:, 1], vecs[:, 1]))


def thermal_state(spec):
    """Gibbs state exp(-H_tot/T)/Z, with the spectrum shifted by its minimum."""
    if spec.T <= 0:
        raise DomainError("thermal_state requires T > 0; use ground_state")
    if spec.T < 1e-6:
        warnings.warn(
            f"T={spec.T:g} is below 1e-6; Boltzmann weights are nearly degenerate", RuntimeWarning, stacklevel=2
        )
    values, vecs = eigensystem(spec)
    weights = np.exp(-(values - values[0]) / spec.T)
    weights /= weights.sum()
    rho = (vecs * weights) @ vecs.T
    return 0.5 * (rho + rho.T)


def initial_state(spec):
    """Cycle starting state: Gibbs state for T > 0, else the chosen ground branch.

    Returns a density matrix in every case.
    """
    if spec.T > 0:
        return thermal_state(spec)
    if spec.ground_branch == "mixed":
        return mixed_ground_state(spec)
    psi = ground_state(spec)
    return np.outer(psi, psi)


def is_passive_start(spec):
    """Whether the starting state is passive for the untilted H_tot.

    Gibbs states, the bare ground state and the two-state mixture are; the
    finite-size symmetry-broken superpositions and tilted ground states are
    not, and sit slightly above the ground energy.
    """
    if spec.T > 0:
        return True
    if spec.tilt_h > 0:
        return False
    return spec.ground_branch in ("raw", "mixed") or spec.f >= F_CRITICAL


def energy_gap(spec):
    """Difference between the two lowest eigenvalues of H_tot."""
    if spec.T > 0:
        raise DomainError("energy_gap is defined for T = 0 specs")
    values, _ = eigensystem(spec, lowest=2)
    return float(max(values[1] - values[0], 0.0))
