"""Closed-form cycle quantities for one- and two-spin batteries.

Both take translation-invariant one- and two-site correlators as input, so
they can be fed infinite-chain quadrature values or finite-ring values from
exact diagonalisation alike.
"""

from dataclasses import dataclass

import numpy as np

from .chain_model import F_CRITICAL
from .cycle import CycleReport, efficiency
from .exceptions import DomainError


@dataclass(frozen=True)
class SingleSpinAnalytics:
    """Bloch vector (a_x, 0, a_z) of one battery spin and its rotation to the pole."""

    a_x: float
    a_z: float
    sigma_bar: float
    alpha: float

    @property
    def bloch(self):
        return np.array([self.a_x, 0.0, self.a_z])


def single_spin_analytics(correlators):
    sx, sz = correlators.sx, correlators.sz
    sigma_bar = float(np.hypot(sx, sz))
    return SingleSpinAnalytics(a_x=sx, a_z=sz, sigma_bar=sigma_bar, alpha=0.5 * float(np.arctan2(sx, sz)))


def single_spin_unitary(analytics, theta=0.0):
    """exp(i theta Z) exp(i alpha Y): takes the Bloch vector onto +z."""
    a, t = analytics.alpha, theta
    rot = np.array([[np.cos(a), np.sin(a)], [-np.sin(a), np.cos(a)]], dtype=complex)
    return np.diag([np.exp(1j * t), np.exp(-1j * t)]) @ rot


def single_spin_report(f, theta, correlators):
    """Cycle bookkeeping for M = 1 from correlators alone.

    E_d = 2(1-f) cxx,  ergotropy = f (sigma_bar - sz),
    E_c = 2(1-f) cos(2 theta) (sx cxz - sz cxx) / sigma_bar.
    """
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"f must lie in [0, 1], got {f!r}")
    if correlators.cxz is None:
        if f < F_CRITICAL and correlators.sx != 0.0:
            raise DomainError("cxz is required below the critical point; supply it from exact diagonalisation")
        cxz = 0.0
    else:
        cxz = correlators.cxz
    an = single_spin_analytics(correlators)
    if an.sigma_bar == 0.0:
        raise DomainError("the battery spin is maximally mixed; the extraction unitary is undefined")
    E_d = 2.0 * (1.0 - f) * correlators.cxx
    erg = f * (an.sigma_bar - correlators.sz)
    if erg < 1e-12:
        erg = 0.0
    E_c = 2.0 * (1.0 - f) * np.cos(2.0 * theta) * (correlators.sx * cxz - correlators.sz * correlators.cxx) / an.sigma_bar
    E_th = -(E_d - erg + E_c)
    T = correlators.T
    return CycleReport(
        f=f, T=T, M=1, N=None, E_d=E_d, ergotropy=erg, E_c=float(E_c), E_c_min=None,
        theta=np.array([theta, -theta]), theta_star=None, E_th=E_th,
        eta=efficiency(erg, E_d + E_c), dissipation=-E_th / T if T > 0 else None,
        policy="fixed", extras={"analytics": an},
    )


def x_state(correlators):
    """Two-site reduced state with only diagonal and anti-diagonal entries.

    Valid when sx = 0 and mixed x-z correlators vanish (thermal or mixed
    ground state).  Basis order ++, +-, -+, --.
    """
    sz, czz = correlators.sz, correlators.czz
    w_plus = 1.0 + czz + 2.0 * sz
    w_minus = 1.0 + czz - 2.0 * sz
    inner = 1.0 - czz
    flip = correlators.cxx + correlators.cyy
    delta = correlators.delta
    return 0.25 * np.array(
        [
            [w_plus, 0.0, 0.0, delta],
            [0.0, inner, flip, 0.0],
            [0.0, flip, inner, 0.0],
            [delta, 0.0, 0.0, w_minus],
        ]
    )


@dataclass(frozen=True)
class TwoSpinAnalytics:
    mu1: float
    nu1: float
    delta_angle: float
    Omega_plus: float
    Omega_minus: float
    Delta: float
    ergotropy: float
    # False when the eigenvalue ordering behind the mixing-angle formula fails
    # and the value came from sorting the closed-form eigenvalues instead.
    angle_formula: bool

    @property
    def mu4(self):
        return self.mu1 + 0.5 * np.pi

    @property
    def nu4(self):
        return self.nu1 + 0.5 * np.pi


def two_spin_analytics(correlators, f):
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"f must lie in [0, 1], got {f!r}")
    if abs(correlators.sx) > 1e-12 or abs(correlators.cxz or 0.0) > 1e-12:
        raise DomainError(
            "correlators carry a longitudinal magnetisation, so the two-site state is not an X-state; "
            "use ergotropy_spectral on the reduced state instead"
        )
    sz, czz, d = correlators.sz, correlators.czz, correlators.delta
    g = 1.0 - f
    root_h = np.sqrt(4.0 * f * f + g * g)
    root_r = np.sqrt(d * d + 4.0 * sz * sz)
    mu1 = float(np.arctan2(2.0 * f + root_h, g))
    nu1 = float(np.arctan2(2.0 * sz + root_r, d)) if root_r > 0.0 else 0.5 * np.pi
    delta = mu1 - nu1
    by_angles = (f * d - g * sz) * np.sin(2.0 * delta) - (g * d + 4.0 * f * sz) * np.sin(delta) ** 2

    # eigenvalues in the labelling used by the angle formula
    flip = correlators.cxx + correlators.cyy
    r = 0.25 * np.array([1.0 + czz + root_r, 1.0 - czz + flip, 1.0 - czz - flip, 1.0 + czz - root_r])
    eps = np.array([-2.0 * root_h, -2.0 * g, 2.0 * g, 2.0 * root_h]) * 0.5
    ordered = bool(np.all(np.diff(r) <= 1e-14))
    if ordered:
        erg = by_angles
    else:
        energy = -g * correlators.cxx - 2.0 * f * sz
        erg = energy - float(np.dot(np.sort(r)[::-1], np.sort(eps)))
    if erg < 1e-12:
        erg = 0.0
    return TwoSpinAnalytics(
        mu1=mu1, nu1=nu1, delta_angle=delta,
        Omega_plus=1.0 + czz + 2.0 * sz, Omega_minus=1.0 + czz - 2.0 * sz, Delta=d,
        ergotropy=float(erg), angle_formula=ordered,
    )


def two_spin_ergotropy(correlators, f):
    """Ergotropy of a two-spin battery in an X-state, from the mixing angles."""
    return two_spin_analytics(correlators, f).ergotropy


def two_spin_unitary(analytics, vartheta1=0.0, vartheta4=0.0, vartheta=0.0):
    """Extraction unitary in the three-phase form (global phase removed)."""
    sm, cm = np.sin(analytics.mu1), np.cos(analytics.mu1)
    sn, cn = np.sin(analytics.nu1), np.cos(analytics.nu1)
    a11, a14, a41, a44 = sm * sn, sm * cn, cm * sn, cm * cn
    e1, e4 = np.exp(1j * vartheta1), np.exp(1j * vartheta4)
    c, s = np.cos(vartheta), 1j * np.sin(vartheta)
    return np.array(
        [
            [a11 * e1 + a44 * e4, 0, 0, a14 * e1 - a41 * e4],
            [0, c, s, 0],
            [0, s, c, 0],
            [a41 * e1 - a14 * e4, 0, 0, a44 * e1 + a11 * e4],
        ],
        dtype=complex,
    )
