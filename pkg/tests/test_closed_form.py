import numpy as np
import pytest

from isingbattery.analytic_correlators import (
    CorrelatorSet,
    correlators_exact,
    correlators_ground,
    correlators_thermal,
    with_identity_cxz,
)
from isingbattery.chain_model import ChainSpec, Partition, open_chain_hamiltonian
from isingbattery.closed_form import (
    single_spin_analytics,
    single_spin_report,
    single_spin_unitary,
    two_spin_analytics,
    two_spin_ergotropy,
    two_spin_unitary,
    x_state,
)
from isingbattery.cycle import ergotropy_spectral, run_cycle
from isingbattery.exceptions import DomainError


def test_single_spin_angle_identities():
    for f in (0.1, 0.3, 0.6):
        an = single_spin_analytics(correlators_ground(f))
        assert an.sigma_bar * np.sin(2 * an.alpha) == pytest.approx(an.a_x, abs=1e-12)
        assert an.sigma_bar * np.cos(2 * an.alpha) == pytest.approx(an.a_z, abs=1e-12)


def test_single_spin_unitary_rotates_to_pole():
    an = single_spin_analytics(correlators_ground(0.3))
    rho = 0.5 * (np.eye(2) + an.a_x * np.array([[0, 1], [1, 0]]) + an.a_z * np.diag([1, -1]))
    for th in (0.0, 0.7):
        U = single_spin_unitary(an, th)
        out = U @ rho @ U.conj().T
        assert out[0, 1] == pytest.approx(0.0, abs=1e-12)
        assert out[0, 0].real == pytest.approx(0.5 * (1 + an.sigma_bar), abs=1e-12)


@pytest.mark.parametrize("f", [0.15, 0.3, 0.42])
@pytest.mark.parametrize("theta", [0.0, 0.5, np.pi / 4])
def test_fast_path_equals_generic_path(f, theta):
    spec = ChainSpec(8, f)
    generic = run_cycle(spec, Partition(0, 1), phase_policy=theta, budget=300)
    fast = single_spin_report(f, theta, correlators_exact(spec))
    for name in ("E_d", "ergotropy", "E_c", "E_th"):
        assert getattr(fast, name) == pytest.approx(getattr(generic, name), abs=1e-8)


def test_zero_field_has_no_ergotropy():
    assert single_spin_report(0.0, 0.0, correlators_ground(0.0)).ergotropy == 0.0


def test_input_energy_at_critical_point():
    # E_c + E_d -> 4 sin^2(theta) / pi = 2 / pi at theta = pi/4
    gaps = []
    for f in (0.49, 0.499, 0.4999, 0.49999, 0.5):
        r = single_spin_report(f, np.pi / 4, with_identity_cxz(correlators_ground(f)))
        gaps.append(r.E_d + r.E_c - 2 / np.pi)
    assert abs(gaps[-1]) < 1e-10
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-2] < 2e-4


def test_theta_pi_half_flips_reconnection():
    c = with_identity_cxz(correlators_ground(0.3))
    a, b = single_spin_report(0.3, 0.0, c), single_spin_report(0.3, np.pi / 2, c)
    assert a.ergotropy == b.ergotropy
    assert b.E_c == pytest.approx(-a.E_c, abs=1e-14)
    assert a.E_c < 0


def test_reconnection_sign_below_critical():
    for f in np.linspace(0.05, 0.499, 12):
        c = with_identity_cxz(correlators_ground(f))
        assert c.sx * c.cxz - c.sz * c.cxx < 0


def test_single_spin_requires_cxz_below_critical():
    with pytest.raises(DomainError):
        single_spin_report(0.3, 0.0, correlators_ground(0.3))
    with pytest.raises(DomainError):
        single_spin_report(1.5, 0.0, correlators_ground(0.3))
    single_spin_report(0.7, 0.0, correlators_ground(0.7))


def test_maximally_mixed_spin_rejected():
    c = CorrelatorSet(0.0, 0.0, 0.1, 0.0, 0.0, 0.0, "test", f=0.6)
    with pytest.raises(DomainError):
        single_spin_report(0.6, 0.0, c)


@pytest.mark.parametrize("f,T", [(0.5, 1.0), (0.3, 0.5), (0.7, 2.0), (0.1, 0.2)])
def test_two_spin_matches_spectral(f, T):
    c = correlators_thermal(f, T)
    spectral = ergotropy_spectral(x_state(c), open_chain_hamiltonian(2, f)).ergotropy
    assert two_spin_ergotropy(c, f) == pytest.approx(spectral, abs=1e-10)


def test_two_spin_vanishes_at_f1():
    assert two_spin_ergotropy(correlators_thermal(1.0, 0.8), 1.0) == 0.0
    assert two_spin_ergotropy(correlators_ground(1.0), 1.0) == 0.0


def test_two_spin_rejects_longitudinal_order():
    with pytest.raises(DomainError):
        two_spin_ergotropy(correlators_ground(0.3), 0.3)


def test_two_spin_angle_relations():
    an = two_spin_analytics(correlators_thermal(0.4, 1.0), 0.4)
    assert an.nu4 == pytest.approx(an.nu1 + np.pi / 2)
    assert an.delta_angle == pytest.approx(an.mu1 - an.nu1)
    # mu1 diagonalises the (++, --) block of H_S
    g, f = 0.6, 0.4
    vec = np.array([np.sin(an.mu1), np.cos(an.mu1)])
    block = np.array([[-2 * f, -g], [-g, 2 * f]])
    lowest = np.linalg.eigvalsh(block)[0]
    assert np.allclose(block @ vec, lowest * vec, atol=1e-12)


def test_two_spin_unitary_reaches_passive_state():
    c = correlators_thermal(0.5, 1.0)
    rho = x_state(c)
    res = ergotropy_spectral(rho, open_chain_hamiltonian(2, 0.5))
    an = two_spin_analytics(c, 0.5)
    for phases in [(0.0, 0.0, 0.0), (0.3, 1.1, 0.7)]:
        U = two_spin_unitary(an, *phases)
        assert np.allclose(U.conj().T @ U, np.eye(4), atol=1e-12)
        assert np.max(np.abs(U @ rho @ U.conj().T - res.passive_state)) < 1e-10


def test_x_state_matches_finite_ring_thermal_state():
    spec = ChainSpec(8, 0.4, T=0.8)
    from isingbattery.analytic_correlators import _pair_state

    assert np.max(np.abs(x_state(correlators_exact(spec)) - _pair_state(spec))) < 1e-12
