"""Hot numeric loops, each with a numba and a pure-numpy implementation.

The numba versions are used when numba imports cleanly and the environment
variable ``ISINGBATTERY_DISABLE_NUMBA`` is unset (or set to ``0``).  Both
variants are always importable under explicit names so the benchmark and the
tests can compare them.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False


def _numba_disabled():
    return os.environ.get("ISINGBATTERY_DISABLE_NUMBA", "0") not in ("", "0", "false", "False")


USE_NUMBA = HAVE_NUMBA and not _numba_disabled()


# ---------------------------------------------------------------------------
# Spin-chain Hamiltonian assembly in the computational (sigma^z) basis.
# Site 0 is the most significant bit; bit value 0 is sigma^z = +1.
# ---------------------------------------------------------------------------

def ising_entries_numpy(n, bond_i, bond_j, bond_c, z_sites, z_c, x_sites, x_c):
    """(row, col, value) triplets of sum_b c_b X_i X_j + sum_k z_k Z_k + sum_k x_k X_k.

    Rows may repeat a column (e.g. a doubled bond); callers must accumulate.
    """
    dim = 1 << n
    states = np.arange(dim, dtype=np.int64)
    diag = np.zeros(dim)
    for k, c in zip(z_sites, z_c):
        bit = (states >> (n - 1 - k)) & 1
        diag += c * (1 - 2 * bit)
    rows, cols, vals = [states], [states], [diag]
    masks = [(1 << (n - 1 - i)) ^ (1 << (n - 1 - j)) for i, j in zip(bond_i, bond_j)]
    masks += [1 << (n - 1 - k) for k in x_sites]
    for mask, c in zip(masks, list(bond_c) + list(x_c)):
        rows.append(states)
        cols.append(states ^ mask)
        vals.append(np.full(dim, c))
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def phase_energy_numpy(theta, coupling):
    """Re sum_{a,g} exp(i(theta_a - theta_g)) C_ag for each row of ``theta``."""
    z = np.exp(1j * np.atleast_2d(theta))
    return np.einsum("pa,ag,pg->p", z, coupling, z.conj()).real


def coordinate_descent_numpy(theta, coupling, sweeps, tol):
    """Exact per-coordinate minimisation of the phase energy; theta[0] stays fixed.

    Along coordinate k the energy is const + 2|S_k| cos(theta_k + arg S_k) with
    S_k = sum_{g != k} C_kg exp(-i theta_g), so the minimiser is pi - arg S_k.
    """
    theta = np.array(theta, dtype=float)
    d = theta.shape[0]
    prev = phase_energy_numpy(theta, coupling)[0]
    for _ in range(sweeps):
        for k in range(1, d):
            s = 0j
            for g in range(d):
                if g != k:
                    s += coupling[k, g] * np.exp(-1j * theta[g])
            if abs(s) > 0.0:
                theta[k] = np.mod(np.pi - np.angle(s), 2.0 * np.pi)
        cur = phase_energy_numpy(theta, coupling)[0]
        if prev - cur <= tol:
            break
        prev = cur
    return theta


if HAVE_NUMBA:

    @njit(cache=True)
    def ising_entries_numba(n, bond_i, bond_j, bond_c, z_sites, z_c, x_sites, x_c):
        dim = 1 << n
        nb, nx = bond_i.shape[0], x_sites.shape[0]
        per = 1 + nb + nx
        rows = np.empty(dim * per, dtype=np.int64)
        cols = np.empty(dim * per, dtype=np.int64)
        vals = np.empty(dim * per)
        masks = np.empty(nb + nx, dtype=np.int64)
        coef = np.empty(nb + nx)
        for b in range(nb):
            masks[b] = (1 << (n - 1 - bond_i[b])) ^ (1 << (n - 1 - bond_j[b]))
            coef[b] = bond_c[b]
        for q in range(nx):
            masks[nb + q] = 1 << (n - 1 - x_sites[q])
            coef[nb + q] = x_c[q]
        k = 0
        for s in range(dim):
            acc = 0.0
            for q in range(z_sites.shape[0]):
                bit = (s >> (n - 1 - z_sites[q])) & 1
                acc += z_c[q] * (1 - 2 * bit)
            rows[k] = s
            cols[k] = s
            vals[k] = acc
            k += 1
            for b in range(nb + nx):
                rows[k] = s
                cols[k] = s ^ masks[b]
                vals[k] = coef[b]
                k += 1
        return rows, cols, vals

    @njit(cache=True)
    def phase_energy_numba(theta, coupling):
        p, d = theta.shape
        out = np.empty(p)
        z = np.empty(d, dtype=np.complex128)
        diag = 0.0
        for a in range(d):
            diag += coupling[a, a].real
        for r in range(p):
            for a in range(d):
                z[a] = np.cos(theta[r, a]) + 1j * np.sin(theta[r, a])
            acc = diag
            for a in range(d):
                for g in range(a + 1, d):
                    acc += 2.0 * (coupling[a, g] * z[a] * z[g].conjugate()).real
            out[r] = acc
        return out

    @njit(cache=True)
    def _coordinate_descent_numba(theta, coupling, sweeps, tol):
        theta = theta.copy()
        d = theta.shape[0]
        two_pi = 2.0 * np.pi
        prev = phase_energy_numba(theta.reshape(1, d), coupling)[0]
        for _ in range(sweeps):
            for k in range(1, d):
                s = 0j
                for g in range(d):
                    if g != k:
                        s += coupling[k, g] * np.exp(-1j * theta[g])
                if abs(s) > 0.0:
                    val = (np.pi - np.angle(s)) % two_pi
                    theta[k] = val
            cur = phase_energy_numba(theta.reshape(1, d), coupling)[0]
            if prev - cur <= tol:
                break
            prev = cur
        return theta

    def coordinate_descent_numba(theta, coupling, sweeps, tol):
        return _coordinate_descent_numba(
            np.ascontiguousarray(theta, dtype=np.float64),
            np.ascontiguousarray(coupling, dtype=np.complex128),
            int(sweeps),
            float(tol),
        )

else:  # pragma: no cover
    ising_entries_numba = ising_entries_numpy
    phase_energy_numba = phase_energy_numpy
    coordinate_descent_numba = coordinate_descent_numpy


def ising_entries(n, bond_i, bond_j, bond_c, z_sites, z_c, x_sites, x_c):
    args = (
        int(n),
        np.asarray(bond_i, dtype=np.int64),
        np.asarray(bond_j, dtype=np.int64),
        np.asarray(bond_c, dtype=np.float64),
        np.asarray(z_sites, dtype=np.int64),
        np.asarray(z_c, dtype=np.float64),
        np.asarray(x_sites, dtype=np.int64),
        np.asarray(x_c, dtype=np.float64),
    )
    return (ising_entries_numba if USE_NUMBA else ising_entries_numpy)(*args)


def fill_ising(n, bond_i, bond_j, bond_c, z_sites, z_c, x_sites, x_c):
    """Dense real Hamiltonian; only the touched entries of a fresh zero array are written."""
    rows, cols, vals = ising_entries(n, bond_i, bond_j, bond_c, z_sites, z_c, x_sites, x_c)
    dim = 1 << int(n)
    out = np.zeros((dim, dim))
    np.add.at(out, (rows, cols), vals)
    return out


def phase_energy(theta, coupling):
    theta = np.ascontiguousarray(np.atleast_2d(theta), dtype=np.float64)
    coupling = np.ascontiguousarray(coupling, dtype=np.complex128)
    if USE_NUMBA:
        return phase_energy_numba(theta, coupling)
    return phase_energy_numpy(theta, coupling)


def coordinate_descent(theta, coupling, sweeps=200, tol=1e-15):
    if USE_NUMBA:
        return coordinate_descent_numba(theta, coupling, sweeps, tol)
    return coordinate_descent_numpy(theta, coupling, sweeps, tol)
