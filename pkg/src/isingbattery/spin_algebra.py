"""Dense operator algebra on n spin-1/2 sites.

Conventions
-----------
Site 0 is the leftmost (most significant) tensor factor and the local basis is
(|+z>, |-z>), so ``pauli("z", 1, 2) == diag(1, -1, 1, -1)``.  Operators, density
matrices and state vectors are plain numpy arrays; the helpers here validate
them on entry instead of wrapping them in classes.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .exceptions import DomainError

HERMITIAN_TOL = 1e-12
RECONSTRUCTION_TOL = 1e-10
NEGATIVE_EIG_TOL = 1e-10

SIGMA = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}
IDENTITY = np.eye(2, dtype=complex)


def n_sites(dim):
    """Number of spins for a Hilbert-space dimension, raising unless dim = 2**n."""
    n = int(dim).bit_length() - 1
    if n < 1 or (1 << n) != dim:
        raise DomainError(f"dimension {dim} is not a power of two >= 2")
    return n


def pauli(axis, site, n):
    """Pauli matrix ``axis`` acting on ``site`` of an ``n``-spin register."""
    if axis not in SIGMA:
        raise DomainError(f"unknown Pauli axis {axis!r}")
    if not 0 <= site < n:
        raise DomainError(f"site {site} out of range for n={n}")
    factors = [SIGMA[axis] if k == site else IDENTITY for k in range(n)]
    return reduce(np.kron, factors)


def pauli_string(ops, n):
    """Tensor product of single-site Paulis, e.g. ``{0: "x", 1: "z"}``."""
    for site in ops:
        if not 0 <= site < n:
            raise DomainError(f"site {site} out of range for n={n}")
    factors = [SIGMA[ops[k]] if k in ops else IDENTITY for k in range(n)]
    return reduce(np.kron, factors)


def is_hermitian(op, tol=HERMITIAN_TOL):
    op = np.asarray(op)
    return op.ndim == 2 and op.shape[0] == op.shape[1] and np.max(np.abs(op - op.conj().T)) <= tol


def check_hermitian(op, name="operator", tol=HERMITIAN_TOL):
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DomainError(f"{name} must be a square matrix, got shape {op.shape}")
    n_sites(op.shape[0])
    err = np.max(np.abs(op - op.conj().T)) if op.size else 0.0
    if err > tol:
        raise DomainError(f"{name} is not Hermitian (max deviation {err:.3e})")
    return op


def check_density(rho, name="density matrix"):
    """Validate Hermiticity, unit trace and positivity of ``rho``."""
    rho = check_hermitian(rho, name)
    tr = np.trace(rho)
    if abs(tr - 1.0) > 1e-12:
        raise DomainError(f"{name} has trace {tr.real:.15f}, expected 1")
    lowest = np.linalg.eigvalsh(rho)[0]
    if lowest < -NEGATIVE_EIG_TOL:
        raise DomainError(f"{name} has eigenvalue {lowest:.3e} < -{NEGATIVE_EIG_TOL}")
    return rho


def clip_populations(values):
    """Clip tiny negative density-matrix eigenvalues to zero and renormalise."""
    values = np.asarray(values, dtype=float)
    if values.size and values.min() < -NEGATIVE_EIG_TOL:
        raise DomainError(f"population {values.min():.3e} is too negative to clip")
    values = np.where(values < 0.0, 0.0, values)
    return values / values.sum()


def as_density(state):
    """Density matrix from either a state vector or a density matrix."""
    state = np.asarray(state)
    if state.ndim == 1:
        norm = np.vdot(state, state).real
        if abs(norm - 1.0) > 1e-12:
            raise DomainError(f"state vector has norm^2 {norm:.15f}")
        return np.outer(state, state.conj())
    return state


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues ``values`` with orthonormal eigenvector columns ``vectors``."""

    values: np.ndarray
    vectors: np.ndarray
    order: str = "ascending"

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.conj().T

    def __len__(self):
        return self.values.shape[0]


def fix_phase(vectors):
    """Make each column's largest-magnitude amplitude real and positive.

    Ties in magnitude (within 1e-9) resolve to the lowest basis index, so the
    result does not depend on rounding noise from the eigensolver.
    """
    vectors = np.array(vectors, dtype=complex)
    mags = np.abs(vectors)
    for k in range(vectors.shape[1]):
        col = mags[:, k]
        pivot = int(np.flatnonzero(col >= col.max() - 1e-9)[0])
        amp = vectors[pivot, k]
        vectors[:, k] *= np.conj(amp) / abs(amp)
    return vectors


def _degenerate_key(vec):
    # lexicographic on real parts, larger weight on earlier basis states first
    return tuple(-np.round(vec.real, 9))


def eig_hermitian(op, order="ascending", degeneracy_tol=1e-10):
    """Eigendecomposition of a Hermitian matrix with a deterministic gauge.

    Eigenvector phases follow :func:`fix_phase`.  Inside a degenerate cluster
    (eigenvalues closer than ``degeneracy_tol``) the columns are sorted
    lexicographically by their real parts so repeated calls pair eigenvectors
    the same way.
    """
    if order not in ("ascending", "descending"):
        raise DomainError(f"order must be 'ascending' or 'descending', got {order!r}")
    op = check_hermitian(op)
    values, vectors = np.linalg.eigh(op)
    vectors = fix_phase(vectors)
    if order == "descending":
        values, vectors = values[::-1], vectors[:, ::-1]
    idx = list(range(len(values)))
    start = 0
    while start < len(values):
        stop = start + 1
        while stop < len(values) and abs(values[stop] - values[start]) <= degeneracy_tol:
            stop += 1
        if stop - start > 1:
            block = sorted(range(start, stop), key=lambda k: _degenerate_key(vectors[:, k]))
            idx[start:stop] = block
        start = stop
    return SpectralDecomposition(values=values[idx].copy(), vectors=vectors[:, idx].copy(), order=order)


def ring_block(start, size, n):
    """Site indices of ``size`` consecutive sites on a ring of ``n``, from ``start``."""
    return tuple((start + k) % n for k in range(size))


def _check_block(keep, n):
    keep = tuple(int(k) for k in keep)
    if len(keep) == 0 or len(keep) >= n:
        raise DomainError(f"kept block must contain between 1 and {n - 1} sites, got {len(keep)}")
    if len(set(keep)) != len(keep) or any(not 0 <= k < n for k in keep):
        raise DomainError(f"invalid site set {keep} for n={n}")
    if keep != ring_block(keep[0], len(keep), n):
        raise DomainError(f"sites {keep} are not a contiguous block on the ring")
    return keep


def block_first(op, keep, n):
    """Reorder the tensor factors of a full-space operator so ``keep`` comes first.

    Returns the operator as a 4-index array ``[s, r, s', r']`` with the kept
    sites (in the given order) on the ``s`` legs and the rest, in ring order
    after the block, on the ``r`` legs.
    """
    rest = [(keep[-1] + 1 + k) % n for k in range(n - len(keep))]
    perm = list(keep) + rest
    t = np.asarray(op).reshape((2,) * (2 * n))
    t = t.transpose(perm + [p + n for p in perm])
    ds, dr = 1 << len(keep), 1 << (n - len(keep))
    return t.reshape(ds, dr, ds, dr)


def block_first_vector(vec, keep, n):
    rest = [(keep[-1] + 1 + k) % n for k in range(n - len(keep))]
    perm = list(keep) + rest
    t = np.asarray(vec).reshape((2,) * n).transpose(perm)
    return t.reshape(1 << len(keep), 1 << (n - len(keep)))


def partial_trace(rho, keep, n):
    """Reduced density matrix of the contiguous ring block ``keep``.

    ``rho`` may also be a normalised state vector.  The kept sites appear in
    the reduced operator in the order given by ``keep``.
    """
    keep = _check_block(keep, n)
    rho = np.asarray(rho)
    if rho.shape[0] != 1 << n:
        raise DomainError(f"state dimension {rho.shape[0]} does not match n={n}")
    if rho.ndim == 1:
        psi = block_first_vector(rho, keep, n)
        return psi @ psi.conj().T
    t = block_first(rho, keep, n)
    return np.einsum("arbr->ab", t)


def embed(block_op, keep, n):
    """Operator acting as ``block_op`` on ``keep`` and as identity elsewhere."""
    keep = _check_block(keep, n)
    m = len(keep)
    block_op = np.asarray(block_op)
    if block_op.shape != (1 << m, 1 << m):
        raise DomainError(f"block operator shape {block_op.shape} does not match {m} sites")
    full = np.kron(block_op, np.eye(1 << (n - m)))
    rest = [(keep[-1] + 1 + k) % n for k in range(n - m)]
    perm = list(keep) + rest
    inv = list(np.argsort(perm))
    t = full.reshape((2,) * (2 * n)).transpose(inv + [p + n for p in inv])
    return t.reshape(1 << n, 1 << n)


def expval(op, rho):
    """Real expectation value Tr[op rho]; ``rho`` may be a state vector."""
    op = np.asarray(op)
    rho = np.asarray(rho)
    if op.shape[0] != rho.shape[0]:
        raise DomainError(f"dimension mismatch: operator {op.shape}, state {rho.shape}")
    if rho.ndim == 1:
        val = np.vdot(rho, op @ rho)
    else:
        val = np.einsum("ij,ji->", op, rho)
    scale = max(1.0, abs(val))
    if abs(val.imag) > 1e-10 * scale:
        raise DomainError(f"expectation value has imaginary part {val.imag:.3e}")
    return float(val.real)
