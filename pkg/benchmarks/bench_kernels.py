"""Time the numba kernels against their numpy twins.

Run with ``python3 benchmarks/bench_kernels.py``.  The first numba call of
each kernel is excluded (compilation / cache load).
"""

import argparse
import time

import numpy as np
from scipy import sparse

from isingbattery import _kernels
from isingbattery.chain_model import _ring_bonds


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def ising_args(n):
    bonds = _ring_bonds(n)
    return (
        n,
        np.array([b[0] for b in bonds], dtype=np.int64),
        np.array([b[1] for b in bonds], dtype=np.int64),
        np.full(len(bonds), -0.7),
        np.arange(n, dtype=np.int64),
        np.full(n, -0.3),
        np.zeros(0, dtype=np.int64),
        np.zeros(0),
    )


def random_coupling(dim, rng):
    c = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (c + c.conj().T)


def same(a, b):
    if isinstance(a, tuple):
        # triplets come out in different orders; compare the sparse matrices they define
        dim = 1 << int(np.log2(a[0].max() + 1) + 0.5)
        dense = [sparse.coo_matrix((t[2], (t[0], t[1])), shape=(dim, dim)).toarray() for t in (a, b)]
        return np.allclose(dense[0], dense[1], atol=1e-12)
    return np.allclose(a, b, atol=1e-12)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=11, help="ring size for Hamiltonian assembly")
    ap.add_argument("--batch", type=int, default=4096, help="phase vectors per energy batch")
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    cases = []

    h_args = ising_args(args.n)
    cases.append((
        f"ising_entries n={args.n}",
        lambda: _kernels.ising_entries_numpy(*h_args),
        lambda: _kernels.ising_entries_numba(*h_args),
    ))

    for m in (2, 3):
        d = 1 << m
        C = random_coupling(d, rng)
        theta = rng.uniform(0, 2 * np.pi, size=(args.batch, d))
        cases.append((
            f"phase_energy M={m} batch={args.batch}",
            lambda t=theta, c=C: _kernels.phase_energy_numpy(t, c),
            lambda t=theta, c=C: _kernels.phase_energy_numba(t, c),
        ))
        start = rng.uniform(0, 2 * np.pi, size=d)
        cases.append((
            f"coordinate_descent M={m}",
            lambda s=start, c=C: _kernels.coordinate_descent_numpy(s, c, 200, 1e-15),
            lambda s=start, c=C: _kernels.coordinate_descent_numba(s, c, 200, 1e-15),
        ))

    print(f"{'kernel':40s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>9s}")
    for name, slow, fast in cases:
        a, b = slow(), fast()
        if not same(a, b):
            raise SystemExit(f"{name}: numba and numpy disagree")
        t_np = best_of(slow, args.repeat)
        t_nb = best_of(fast, args.repeat)
        print(f"{name:40s} {1e3 * t_np:12.3f} {1e3 * t_nb:12.3f} {t_np / t_nb:9.1f}")


if __name__ == "__main__":
    main()
