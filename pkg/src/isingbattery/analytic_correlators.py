"""Infinite-chain magnetisations and nearest-neighbour correlators.

The closed forms are one-dimensional integrals over the fermion momentum
phi in [0, pi].  Writing the quasiparticle energy (in units of 2) as

    eps(phi) = sqrt(f^2 + (1-f)^2 + 2 f (1-f) cos phi)

keeps every integrand finite for all f in [0, 1], including the classical
limit f = 0.  At temperature T each integrand picks up tanh(eps / T): the
Bogoliubov modes of H_tot have energies 2 eps, so this is tanh(E / 2T).

Finite-chain values from exact diagonalisation are provided alongside so the
two routes can be checked against each other.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import integrate

from .chain_model import F_CRITICAL, ChainSpec, initial_state
from .exceptions import DomainError
from .spin_algebra import expval, partial_trace, pauli_string

BETA = 1.0 / 8.0
QUAD_TOL = 1e-12
# split point isolating the near-singular corner at f = 1/2, phi = pi
_SPLIT = np.pi - 1e-3

SOURCES = ("quadrature_T0", "quadrature_finiteT", "exact_diag")


@dataclass(frozen=True)
class CorrelatorSet:
    """One- and two-site expectation values at a single parameter point."""

    sx: float
    sz: float
    cxx: float
    cyy: float
    czz: float
    cxz: Optional[float]
    source: str
    f: float = float("nan")
    T: float = 0.0

    @property
    def delta(self):
        return self.cxx - self.cyy

    def as_row(self):
        return {
            "f": self.f,
            "T": self.T,
            "source": self.source,
            "sx": self.sx,
            "sz": self.sz,
            "cxx": self.cxx,
            "cyy": self.cyy,
            "czz": self.czz,
            "cxz": self.cxz,
            "delta": self.delta,
        }


def _check_f(f):
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"f must lie in [0, 1], got {f!r}")


def _eps(phi, f):
    return np.sqrt(f * f + (1.0 - f) ** 2 + 2.0 * f * (1.0 - f) * np.cos(phi))


def integrands(f, T=0.0):
    """Callables for <Z>, <XX>, <YY> as functions of phi, including 1/pi."""

    def thermal(phi, e):
        return 1.0 if T == 0.0 else np.tanh(e / T)

    def sz(phi):
        e = _eps(phi, f)
        return (f + (1.0 - f) * np.cos(phi)) / e * thermal(phi, e) / np.pi

    def cxx(phi):
        e = _eps(phi, f)
        return (f * np.cos(phi) + (1.0 - f)) / e * thermal(phi, e) / np.pi

    def cyy(phi):
        e = _eps(phi, f)
        return (f * np.cos(phi) + (1.0 - f) * np.cos(2.0 * phi)) / e * thermal(phi, e) / np.pi

    return sz, cxx, cyy


def _integrate(func):
    total = 0.0
    for a, b in ((0.0, _SPLIT), (_SPLIT, np.pi)):
        val, _ = integrate.quad(func, a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=400)
        total += val
    return total


def gauss_legendre(func, nodes):
    """Composite Gauss-Legendre rule on the same two panels as the adaptive route."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    total = 0.0
    for a, b in ((0.0, _SPLIT), (_SPLIT, np.pi)):
        half, mid = 0.5 * (b - a), 0.5 * (b + a)
        total += half * np.sum(w * func(half * x + mid))
    return total


def magnetization_x(f):
    """Order parameter (1 - lambda^-2)^(1/8) below f_c, zero at and above it."""
    _check_f(f)
    if f >= F_CRITICAL:
        return 0.0
    if f == 0.0:
        return 1.0
    inv_lam = f / (1.0 - f)
    return float((1.0 - inv_lam * inv_lam) ** BETA)


def cxz_identity(f, sx=None):
    """<X_i Z_{i+1}> = f sx / (2 (1 - f)) in a translation-invariant eigenstate.

    Follows from <[H_tot, Y_0]> = 0 with reflection symmetry; ``sx`` defaults
    to the infinite-chain order parameter.
    """
    _check_f(f)
    if f == 1.0:
        return 0.0
    if sx is None:
        sx = magnetization_x(f)
    return f * sx / (2.0 * (1.0 - f))


def correlators_ground(f):
    """Zero-temperature infinite-chain correlators in the plus branch."""
    _check_f(f)
    if f == 0.0:
        return CorrelatorSet(1.0, 0.0, 1.0, 0.0, 0.0, 0.0, "quadrature_T0", f=0.0)
    if f == 1.0:
        return CorrelatorSet(0.0, 1.0, 0.0, 0.0, 1.0, None, "quadrature_T0", f=1.0)
    sz_i, cxx_i, cyy_i = integrands(f)
    sz, cxx, cyy = _integrate(sz_i), _integrate(cxx_i), _integrate(cyy_i)
    return CorrelatorSet(
        sx=magnetization_x(f), sz=sz, cxx=cxx, cyy=cyy, czz=sz * sz - cxx * cyy,
        cxz=None, source="quadrature_T0", f=f,
    )


def correlators_thermal(f, T):
    """Finite-temperature infinite-chain correlators (paramagnetic: sx = cxz = 0)."""
    _check_f(f)
    if not T > 0.0:
        raise DomainError(f"T must be > 0, got {T!r}")
    if f == 0.0:
        cxx = float(np.tanh(1.0 / T))
        return CorrelatorSet(0.0, 0.0, cxx, 0.0, 0.0, 0.0, "quadrature_finiteT", f=0.0, T=T)
    if f == 1.0:
        sz = float(np.tanh(1.0 / T))
        return CorrelatorSet(0.0, sz, 0.0, 0.0, sz * sz, 0.0, "quadrature_finiteT", f=1.0, T=T)
    sz_i, cxx_i, cyy_i = integrands(f, T)
    sz, cxx, cyy = _integrate(sz_i), _integrate(cxx_i), _integrate(cyy_i)
    return CorrelatorSet(
        sx=0.0, sz=sz, cxx=cxx, cyy=cyy, czz=sz * sz - cxx * cyy,
        cxz=0.0, source="quadrature_finiteT", f=f, T=T,
    )


def with_identity_cxz(cset):
    """Copy of a zero-temperature set with cxz filled from :func:`cxz_identity`."""
    return replace(cset, cxz=cxz_identity(cset.f, cset.sx))


def _pair_state(spec):
    rho = initial_state(spec)
    return rho if spec.N == 2 else partial_trace(rho, (0, 1), spec.N)


def correlators_exact(spec):
    """Correlators on sites 0 and 1 of the finite ring in its cycle starting state."""
    rho2 = _pair_state(spec)

    def ev(ops):
        return expval(pauli_string(ops, 2), rho2)

    return CorrelatorSet(
        sx=ev({0: "x"}), sz=ev({0: "z"}),
        cxx=ev({0: "x", 1: "x"}), cyy=ev({0: "y", 1: "y"}), czz=ev({0: "z", 1: "z"}),
        cxz=ev({0: "x", 1: "z"}),
        source="exact_diag", f=spec.f, T=spec.T,
    )


def corr_xz_numeric(spec):
    """<X_0 Z_1> in the plus-branch ground state of the finite ring."""
    if spec.T > 0:
        raise DomainError("corr_xz_numeric is a zero-temperature quantity")
    spec = ChainSpec(N=spec.N, f=spec.f, T=0.0, tilt_h=spec.tilt_h, ground_branch="plus")
    return expval(pauli_string({0: "x", 1: "z"}, 2), _pair_state(spec))
