"""Reconnection energy as a function of the extraction phases, and its minimum.

For an extraction unitary sum_a exp(i theta_a) |e_a><r_a| the reconnection
energy is a Hermitian form in the phase factors,

    E_c(theta) = sum_{a,g} exp(i(theta_a - theta_g)) C_ag
               = sum_a C_aa + 2 sum_{a<g} A_ag cos(theta_a - theta_g + phi_ag),

with C_ag = A_ag exp(i phi_ag) independent of theta.  Only phase differences
matter, so theta_0 is pinned to zero throughout.
"""

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import _kernels
from .exceptions import DomainError

TWO_PI = 2.0 * np.pi
DE_POPSIZE = 15
DE_MUTATION = 0.8
DE_RECOMBINATION = 0.9
DEFAULT_BUDGET = 20000
DEFAULT_RESTARTS = 64


@dataclass(frozen=True)
class PhaseCoupling:
    """Magnitudes ``A`` and phases ``phi`` of the theta-independent matrix C.

    Diagonal entries are real; their sign is carried by phi_aa in {0, pi}.
    """

    A: np.ndarray
    phi: np.ndarray

    @classmethod
    def from_matrix(cls, C):
        C = np.asarray(C, dtype=complex)
        C = 0.5 * (C + C.conj().T)
        A = np.abs(C)
        phi = np.angle(C)
        d = np.diag(C).real
        phi[np.diag_indices_from(phi)] = np.where(d < 0.0, np.pi, 0.0)
        return cls(A=A, phi=phi)

    @property
    def dim(self):
        return self.A.shape[0]

    @property
    def matrix(self):
        return self.A * np.exp(1j * self.phi)

    @property
    def diagonal_sum(self):
        """theta-independent part: sum of the signed diagonal terms."""
        return float(np.sum(self.A.diagonal() * np.cos(self.phi.diagonal())))

    @property
    def lower_bound(self):
        """Value reached only if every cosine could be -1 simultaneously."""
        return self.diagonal_sum - 2.0 * float(np.sum(np.triu(self.A, 1)))

    def energy(self, theta):
        """E_c for one phase vector (1-D) or a batch (rows)."""
        theta = np.asarray(theta, dtype=float)
        out = _kernels.phase_energy(theta, self.matrix)
        return float(out[0]) if theta.ndim == 1 else out

    def energy_cosines(self, theta):
        """Same value via the explicit A/phi cosine sum."""
        theta = np.asarray(theta, dtype=float)
        total = self.diagonal_sum
        for a in range(self.dim):
            for g in range(a + 1, self.dim):
                total += 2.0 * self.A[a, g] * np.cos(theta[a] - theta[g] + self.phi[a, g])
        return float(total)


@dataclass(frozen=True)
class PhaseOptimum:
    """Best phases found plus the diagnostics of each search route."""

    theta: np.ndarray
    value: float
    de_value: float
    descent_value: float
    zero_value: float
    lower_bound: float
    evaluations: int


def wrap(theta):
    """Angles in [0, 2 pi) with theta_0 = 0; values within 1e-6 below 2 pi become 0."""
    theta = np.mod(np.asarray(theta, dtype=float) - theta[0], TWO_PI)
    theta[theta > TWO_PI - 1e-6] = 0.0
    return theta


def _full(free):
    free = np.atleast_2d(free)
    return np.hstack([np.zeros((free.shape[0], 1)), free])


def minimize_reconnect_detailed(coupling, seed=0, budget=DEFAULT_BUDGET, restarts=DEFAULT_RESTARTS):
    """Differential evolution over the free phases, cross-checked by descent.

    DE runs rand/1/bin with population 15 per free angle, F = 0.8, CR = 0.9,
    until ``budget`` evaluations are spent; its best member is then refined by
    exact coordinate descent.  Independently, ``restarts`` random starting
    points are descended.  The lowest of all candidates (and theta = 0) wins.
    """
    d = coupling.dim
    free = d - 1
    C = coupling.matrix
    zero = np.zeros(d)
    zero_value = coupling.energy(zero)
    if free == 0:
        return PhaseOptimum(zero, zero_value, zero_value, zero_value, zero_value, coupling.lower_bound, 1)
    pop = DE_POPSIZE * free
    if budget < pop:
        raise DomainError(f"budget {budget} is below the DE population size {pop}")
    generations = budget // pop - 1
    rng = np.random.default_rng(seed)

    def objective(x):
        # scipy passes (free, S) when vectorized
        return _kernels.phase_energy(_full(np.asarray(x).T), C)

    if generations > 0:
        res = optimize.differential_evolution(
            objective,
            bounds=[(0.0, TWO_PI)] * free,
            strategy="rand1bin",
            popsize=DE_POPSIZE,
            mutation=DE_MUTATION,
            recombination=DE_RECOMBINATION,
            maxiter=generations,
            tol=0.0,
            atol=0.0,
            seed=np.random.default_rng(rng.integers(2**63)),
            polish=False,
            init="latinhypercube",
            updating="deferred",
            vectorized=True,
        )
        de_theta, de_value, evals = _full(res.x)[0], float(res.fun), int(res.nfev)
    else:
        starts = rng.uniform(0.0, TWO_PI, size=(pop, free))
        vals = objective(starts.T)
        k = int(np.argmin(vals))
        de_theta, de_value, evals = _full(starts[k])[0], float(vals[k]), pop

    best_theta = _kernels.coordinate_descent(de_theta, C)
    best_value = coupling.energy(best_theta)

    descent_value = np.inf
    for start in rng.uniform(0.0, TWO_PI, size=(restarts, free)):
        th = _kernels.coordinate_descent(_full(start)[0], C)
        val = coupling.energy(th)
        descent_value = min(descent_value, val)
        if val < best_value - 1e-15:
            best_theta, best_value = th, val
    if zero_value < best_value:
        best_theta, best_value = zero, zero_value
    best_theta = wrap(best_theta)
    return PhaseOptimum(
        theta=best_theta,
        value=float(best_value),
        de_value=de_value,
        descent_value=float(descent_value),
        zero_value=float(zero_value),
        lower_bound=coupling.lower_bound,
        evaluations=evals,
    )


def minimize_reconnect(coupling, seed=0, budget=DEFAULT_BUDGET):
    """Return (theta, E_c_min) with theta[0] = 0."""
    opt = minimize_reconnect_detailed(coupling, seed=seed, budget=budget)
    return opt.theta, opt.value


def grid_minimum(coupling, resolution=64, refine=True):
    """Exhaustive grid over the free phases, optionally polished locally.

    The grid locates the basin; Nelder-Mead from the best few grid points
    removes the O(spacing^2) discretisation error.  Independent of the DE and
    coordinate-descent routes.
    """
    d = coupling.dim
    free = d - 1
    if free == 0:
        z = np.zeros(d)
        return z, coupling.energy(z)
    axis = np.arange(resolution) * (TWO_PI / resolution)
    mesh = np.stack(np.meshgrid(*([axis] * free), indexing="ij"), axis=-1).reshape(-1, free)
    C = coupling.matrix
    values = np.concatenate([_kernels.phase_energy_numpy(_full(chunk), C) for chunk in np.array_split(mesh, 64)])
    order = np.argsort(values)
    best = _full(mesh[order[0]])[0]
    best_value = float(values[order[0]])
    if not refine:
        return best, best_value
    for k in order[:8]:
        res = optimize.minimize(
            lambda x: coupling.energy_cosines(np.concatenate([[0.0], x])),
            mesh[k],
            method="Nelder-Mead",
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000, "maxfev": 20000},
        )
        if res.fun < best_value:
            best, best_value = np.concatenate([[0.0], res.x]), float(res.fun)
    return wrap(best), best_value
