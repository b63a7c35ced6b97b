"""The four-stroke charge/extract cycle on a finite ring.

I    the ring sits in its starting state varrho_I;
II   the battery block is cut off (cost E_d) and holds rho_II;
III  a unitary on the battery takes it to the passive state (gain: ergotropy);
IV   the battery is reconnected (cost E_c), then the ring rethermalises.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .chain_model import (
    Partition,
    build_h_parts,
    build_h_tot,
    eigensystem,
    initial_state,
    is_passive_start,
    open_chain_hamiltonian,
)
from .exceptions import DomainError, InvariantViolation
from .phases import DEFAULT_BUDGET, PhaseCoupling, minimize_reconnect
from .spin_algebra import (
    NEGATIVE_EIG_TOL,
    SpectralDecomposition,
    as_density,
    block_first,
    check_density,
    check_hermitian,
    clip_populations,
    eig_hermitian,
    expval,
    partial_trace,
)

ERGOTROPY_FLOOR = 1e-12
INVARIANT_TOL = 1e-10
POLICIES = ("zero", "minimize")


@dataclass(frozen=True)
class ErgotropyResult:
    """Sorted pairing of rho eigenvectors (descending) with H_S eigenvectors (ascending).

    ``rho_spectrum.vectors[:, a]`` is paired with ``h_spectrum.vectors[:, a]``;
    each r-vector is phase-aligned so its overlap with its partner is real and
    non-negative.
    """

    ergotropy: float
    passive_state: np.ndarray
    rho_spectrum: SpectralDecomposition
    h_spectrum: SpectralDecomposition
    initial_energy: float
    passive_energy: float

    @property
    def dim(self):
        return len(self.h_spectrum)


def disconnect_energy(state, h_int):
    """E_d = -Tr[H_int varrho_I]."""
    h_int = np.asarray(h_int)
    state = np.asarray(state)
    if state.shape[0] != h_int.shape[0]:
        raise DomainError(f"state dimension {state.shape[0]} does not match H_int {h_int.shape[0]}")
    return -expval(h_int, state)


def _align(r_vecs, e_vecs):
    out = r_vecs.copy()
    overlaps = np.einsum("sa,sa->a", e_vecs.conj(), r_vecs)
    for a, ov in enumerate(overlaps):
        if abs(ov) > 1e-12:
            out[:, a] *= np.conj(ov) / abs(ov)
    return out


def ergotropy_spectral(rho, h_s):
    """Ergotropy of ``rho`` with respect to ``h_s`` and the matching passive state."""
    rho = check_density(rho, "battery state")
    h_s = check_hermitian(h_s, "battery Hamiltonian")
    if rho.shape != h_s.shape:
        raise DomainError(f"battery state {rho.shape} and Hamiltonian {h_s.shape} differ in shape")
    r = eig_hermitian(rho, order="descending")
    e = eig_hermitian(h_s, order="ascending")
    pops = clip_populations(r.values)
    r = SpectralDecomposition(pops, _align(r.vectors, e.vectors), "descending")
    passive = (e.vectors * pops) @ e.vectors.conj().T
    e_init = expval(h_s, rho)
    e_pass = float(np.dot(pops, e.values))
    erg = e_init - e_pass
    if erg < -NEGATIVE_EIG_TOL:
        raise InvariantViolation(f"negative ergotropy {erg:.3e}")
    if erg < ERGOTROPY_FLOOR:
        erg = 0.0
    check = expval(h_s, rho - passive)
    if abs(check - (e_init - e_pass)) > INVARIANT_TOL:
        raise InvariantViolation(f"ergotropy bookkeeping mismatch {check - (e_init - e_pass):.3e}")
    return ErgotropyResult(erg, passive, r, e, e_init, e_pass)


def phase_vector(theta, dim):
    """Normalise a phase specification to a length-``dim`` vector.

    A scalar is accepted for a single battery spin and read as (theta, -theta),
    the form e^{i theta sigma^z} takes on the paired basis.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.ndim == 0:
        if dim != 2:
            if float(theta) == 0.0:
                return np.zeros(dim)
            raise DomainError(f"a scalar phase is only meaningful for M=1, got dimension {dim}")
        return np.array([float(theta), -float(theta)])
    if theta.shape != (dim,):
        raise DomainError(f"phase vector must have length {dim}, got {theta.shape}")
    return theta


def extraction_unitary(result, theta=0.0):
    """U = sum_a exp(i theta_a) |e_a><r_a| on the battery space."""
    theta = phase_vector(theta, result.dim)
    e = result.h_spectrum.vectors
    r = result.rho_spectrum.vectors
    return (e * np.exp(1j * theta)) @ r.conj().T


def _tensors(varrho, h_int, part, n):
    keep = part.sites(n)
    return block_first(as_density(varrho), keep, n), block_first(h_int, keep, n)


def phase_coupling(varrho_I, h_int, result, part):
    """theta-independent matrix C_ag = Tr[H_int U_a varrho_I U_g^dagger], U_a = |e_a><r_a| (x) 1."""
    varrho_I = np.asarray(varrho_I)
    n = int(varrho_I.shape[0]).bit_length() - 1
    if np.asarray(h_int).shape[0] != varrho_I.shape[0]:
        raise DomainError("H_int and the ring state differ in dimension")
    if result.dim != 1 << part.M:
        raise DomainError(f"battery spectrum has dimension {result.dim}, partition expects {1 << part.M}")
    rho_t, h_t = _tensors(varrho_I, h_int, part, n)
    R = result.rho_spectrum.vectors
    E = result.h_spectrum.vectors
    # <r_a| varrho |r_g> on the battery legs, charger legs open
    rt = np.einsum("sa,srtq,tg->argq", R.conj(), rho_t, R, optimize=True)
    # <e_g| H_int |e_a> likewise
    ht = np.einsum("sg,sqtr,ta->gqar", E.conj(), h_t, E, optimize=True)
    C = np.einsum("argq,gqar->ag", rt, ht, optimize=True)
    return PhaseCoupling.from_matrix(C)


def reconnect_energy(varrho_I, h_int, result, part, theta=0.0):
    """E_c = Tr[H_int U varrho_I U^dagger] with U = U_E(theta) (x) 1, evaluated directly."""
    varrho_I = np.asarray(varrho_I)
    n = int(varrho_I.shape[0]).bit_length() - 1
    rho_t, h_t = _tensors(varrho_I, h_int, part, n)
    U = extraction_unitary(result, theta)
    moved = np.einsum("as,srtq,bt->arbq", U, rho_t, U.conj(), optimize=True)
    val = np.einsum("bqar,arbq->", h_t, moved)
    if abs(val.imag) > INVARIANT_TOL * max(1.0, abs(val)):
        raise InvariantViolation(f"reconnection energy has imaginary part {val.imag:.3e}")
    return float(val.real)


@dataclass(frozen=True)
class CycleReport:
    f: float
    T: float
    M: int
    N: Optional[int]
    E_d: float
    ergotropy: float
    E_c: float
    E_c_min: Optional[float]
    theta: np.ndarray
    theta_star: Optional[np.ndarray]
    E_th: float
    eta: Optional[float]
    dissipation: Optional[float]
    seed: Optional[int] = None
    policy: str = "zero"
    extras: dict = field(default_factory=dict, compare=False)

    def as_row(self):
        return {
            "f": self.f,
            "T": self.T,
            "N": self.N,
            "M": self.M,
            "E_d": self.E_d,
            "ergotropy": self.ergotropy,
            "E_c": self.E_c,
            "E_c_min": self.E_c_min,
            "E_th": self.E_th,
            "eta": self.eta,
            "theta_star": self.theta_star,
            "seed": self.seed,
        }


def efficiency(ergotropy, input_energy):
    """ergotropy / (E_d + E_c); None when both vanish."""
    if abs(input_energy) <= ERGOTROPY_FLOOR:
        if ergotropy <= ERGOTROPY_FLOOR:
            return None
        raise InvariantViolation(f"ergotropy {ergotropy:.3e} with vanishing input energy")
    return ergotropy / input_energy


def _resolve_policy(policy, coupling, seed, budget):
    if isinstance(policy, str):
        if policy not in POLICIES:
            raise DomainError(f"phase policy must be one of {POLICIES} or a phase vector, got {policy!r}")
        if policy == "zero":
            return np.zeros(coupling.dim), "zero"
        theta, _ = minimize_reconnect(coupling, seed=seed, budget=budget)
        return theta, "minimize"
    return phase_vector(policy, coupling.dim), "fixed"


def run_cycle(spec, part, phase_policy="zero", seed=0, budget=DEFAULT_BUDGET, check=True):
    """Run all strokes for one configuration and return the bookkeeping.

    The cycle Hamiltonian is always the untilted H_tot; a tilt only selects the
    starting state.  E_c_min is computed for every policy.
    """
    if not isinstance(part, Partition):
        raise DomainError("part must be a Partition")
    part.validate(spec.N)
    N, M = spec.N, part.M
    varrho = initial_state(spec)
    _, _, h_int = build_h_parts(spec, part)
    E_d = disconnect_energy(varrho, h_int)
    rho_II = partial_trace(varrho, part.sites(N), N)
    erg = ergotropy_spectral(0.5 * (rho_II + rho_II.conj().T), open_chain_hamiltonian(M, spec.f))
    coupling = phase_coupling(varrho, h_int, erg, part)

    theta_star, E_c_min = minimize_reconnect(coupling, seed=seed, budget=budget)
    theta, policy = _resolve_policy(phase_policy, coupling, seed, budget)
    if policy == "minimize":
        theta, E_c = theta_star, E_c_min
    else:
        E_c = coupling.energy(theta)

    ergotropy = erg.ergotropy
    E_th = -(E_d - ergotropy + E_c)
    eta = efficiency(ergotropy, E_d + E_c)
    dissipation = -E_th / spec.T if spec.T > 0 else None
    report = CycleReport(
        f=spec.f, T=spec.T, M=M, N=N, E_d=E_d, ergotropy=ergotropy, E_c=E_c, E_c_min=E_c_min,
        theta=theta, theta_star=theta_star, E_th=E_th, eta=eta, dissipation=dissipation,
        seed=seed, policy=policy,
    )
    if check:
        check_report(report, spec)
    return report


def passivity_slack(spec):
    """Energy of the starting state above the ground energy of the untilted H_tot.

    Zero for passive starting states.  The quantity E_d + E_c - ergotropy is the
    energy the cycle adds to the ring, so it can dip below zero only by this much.
    """
    if is_passive_start(spec):
        return 0.0
    bare = replace(spec, tilt_h=0.0, ground_branch="raw", T=0.0)
    values, _ = eigensystem(bare, lowest=2)
    return max(expval(build_h_tot(bare), initial_state(spec)) - float(values[0]), 0.0)


def check_report(report, spec):
    """Raise InvariantViolation if the cycle bookkeeping breaks a physical bound."""
    tol = INVARIANT_TOL
    slack = passivity_slack(spec)
    if report.ergotropy < 0.0:
        raise InvariantViolation(f"ergotropy {report.ergotropy:.3e} < 0")
    for label, e_c in (("E_c", report.E_c), ("E_c_min", report.E_c_min)):
        if e_c is None:
            continue
        gap = report.E_d + e_c - report.ergotropy
        if gap < -tol - slack:
            raise InvariantViolation(f"E_d + {label} - ergotropy = {gap:.3e} < 0 (slack {slack:.3e})")
    if report.E_c_min is not None and report.E_c_min > report.E_c + tol:
        raise InvariantViolation(f"E_c_min {report.E_c_min:.12g} exceeds E_c {report.E_c:.12g}")
    if abs(report.E_th + (report.E_d - report.ergotropy + report.E_c)) > tol:
        raise InvariantViolation("heat bookkeeping mismatch")
    if slack == 0.0 and report.eta is not None and not -tol <= report.eta <= 1.0 + tol:
        raise InvariantViolation(f"efficiency {report.eta:.6g} outside [0, 1]")
    if report.dissipation is not None and report.dissipation < -tol / max(spec.T, 1e-300) - slack / spec.T:
        raise InvariantViolation(f"negative dissipation {report.dissipation:.3e}")
