import numpy as np
import pytest

from gpesplit.flows import FlowRegime, ModelParams, linear_flow, make_subflows, nonlinear_flow
from gpesplit.hermite import basis_function, build_basis, forward, inverse, mass_norm


@pytest.fixture(scope="module")
def basis():
    return build_basis(1.4, 12)


def _smooth_field(basis, rng):
    a = rng.standard_normal(basis.shape) + 1j * rng.standard_normal(basis.shape)
    return inverse(basis, a * np.exp(-0.2 * basis.mu))


@pytest.mark.parametrize("regime", list(FlowRegime))
def test_linear_flow_matches_spectral_definition(basis, regime, rng):
    psi = _smooth_field(basis, rng)
    tau = 0.23
    factor = np.exp(-1j * basis.mu * tau) if regime is FlowRegime.UNITARY else np.exp(-basis.mu * tau)
    expected = inverse(basis, factor * forward(basis, psi))
    assert np.allclose(linear_flow(basis, psi, tau, regime), expected, atol=1e-13)


def test_eigenfunction_only_picks_up_a_phase(basis):
    psi = basis_function(basis, 2, 3)
    out = linear_flow(basis, psi, 0.5, FlowRegime.UNITARY)
    assert np.allclose(out, np.exp(-1j * 1.4 * 6 * 0.5) * psi, atol=1e-13)


def test_linear_flow_group_property(basis, rng):
    psi = _smooth_field(basis, rng)
    two = linear_flow(basis, linear_flow(basis, psi, 0.1, FlowRegime.UNITARY), 0.2, FlowRegime.UNITARY)
    one = linear_flow(basis, psi, 0.3, FlowRegime.UNITARY)
    assert np.allclose(one, two, atol=1e-13)
    back = linear_flow(basis, one, -0.3, FlowRegime.UNITARY)
    assert np.allclose(back, psi, atol=1e-13)


def test_zero_step_is_identity(basis, rng):
    psi = _smooth_field(basis, rng)
    for regime in FlowRegime:
        assert np.array_equal(linear_flow(basis, psi, 0.0, regime), psi)
        assert np.array_equal(nonlinear_flow(psi, 0.0, ModelParams(), regime), psi)


def test_dissipative_rejects_negative_step(basis, rng):
    psi = _smooth_field(basis, rng)
    with pytest.raises(ValueError, match="negative"):
        linear_flow(basis, psi, -0.1, FlowRegime.DISSIPATIVE)
    with pytest.raises(ValueError, match="negative"):
        nonlinear_flow(psi, -0.1, ModelParams(), FlowRegime.DISSIPATIVE)


def test_dissipative_linear_flow_damps_higher_modes(basis):
    a = np.zeros(basis.shape)
    a[0, 0] = a[3, 2] = 1.0
    out = forward(basis, linear_flow(basis, inverse(basis, a), 1.0, FlowRegime.DISSIPATIVE))
    assert abs(out[3, 2] / out[0, 0]) == pytest.approx(np.exp(-1.4 * 5), rel=1e-12)


def test_nonlinear_flows_closed_form(rng):
    psi = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    p = ModelParams(beta=2.0)
    rho = np.abs(psi) ** 2
    assert np.allclose(nonlinear_flow(psi, 0.3, p, FlowRegime.UNITARY), np.exp(-0.6j * rho) * psi)
    assert np.allclose(nonlinear_flow(psi, 0.3, p, FlowRegime.DISSIPATIVE), psi / np.sqrt(1 + 1.2 * rho))


def test_dissipative_nonlinear_flow_solves_its_ode(rng):
    # u' = -beta |u|^2 u, integrated with small explicit steps
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    p = ModelParams(beta=1.5)
    u = psi.copy()
    h = 1e-5
    for _ in range(20000):
        u = u - h * p.beta * np.abs(u) ** 2 * u
    assert np.allclose(nonlinear_flow(psi, 0.2, p, FlowRegime.DISSIPATIVE), u, rtol=1e-4)


def test_unitary_nonlinear_flow_preserves_modulus(rng):
    psi = 3 * (rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9)))
    out = nonlinear_flow(psi, 1.7, ModelParams(beta=2.0), FlowRegime.UNITARY)
    assert np.max(np.abs(np.abs(out) - np.abs(psi))) < 1e-13


def test_unitary_linear_flow_keeps_mass(basis, rng):
    psi = _smooth_field(basis, rng)
    m0 = mass_norm(basis, psi)
    x = psi
    for _ in range(500):
        x = linear_flow(basis, x, 0.01, FlowRegime.UNITARY)
    assert abs(mass_norm(basis, x) - m0) / m0 < 1e-14


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(beta=-1.0)
    with pytest.raises(ValueError):
        ModelParams(gamma=0.0)


def test_make_subflows_checks_gamma(basis):
    with pytest.raises(ValueError, match="gamma"):
        make_subflows(basis, ModelParams(gamma=1.0), FlowRegime.UNITARY)
    flows = make_subflows(basis, ModelParams(gamma=1.4), FlowRegime.UNITARY)
    psi = basis_function(basis, 0, 0)
    assert np.allclose(flows.linear(psi, 0.1), linear_flow(basis, psi, 0.1, FlowRegime.UNITARY))


def test_h00_decays_at_rate_one():
    b = build_basis(1.0, 8)
    h = basis_function(b, 0, 0)
    assert np.allclose(linear_flow(b, h, 1.0, FlowRegime.DISSIPATIVE), np.exp(-1.0) * h, atol=1e-15)


@pytest.mark.parametrize("regime", list(FlowRegime))
def test_semigroup(basis, regime, rng):
    psi = _smooth_field(basis, rng)
    p = ModelParams(beta=2.0, gamma=1.4)
    two = linear_flow(basis, linear_flow(basis, psi, 0.3, regime), 0.7, regime)
    assert np.max(np.abs(two - linear_flow(basis, psi, 1.0, regime))) < 1e-12
    two = nonlinear_flow(nonlinear_flow(psi, 0.3, p, regime), 0.7, p, regime)
    assert np.max(np.abs(two - nonlinear_flow(psi, 1.0, p, regime))) < 1e-12


def test_nonlinear_examples():
    one = np.ones((2, 2), dtype=complex)
    p = ModelParams(beta=2.0)
    assert np.allclose(nonlinear_flow(one, 0.25, p, FlowRegime.DISSIPATIVE), 1 / np.sqrt(2))
    assert np.allclose(nonlinear_flow(one, np.pi / 2, p, FlowRegime.UNITARY), -1.0)
    for regime in FlowRegime:
        assert np.array_equal(nonlinear_flow(one, 0.3, ModelParams(beta=0.0), regime), one)


def test_dissipative_nonlinear_flow_shrinks_modulus(rng):
    psi = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    out = nonlinear_flow(psi, 0.1, ModelParams(beta=1.0), FlowRegime.DISSIPATIVE)
    assert np.all(np.abs(out) < np.abs(psi))


def test_unitary_linear_flow_keeps_each_mode_modulus(basis, rng):
    psi = _smooth_field(basis, rng)
    a0 = np.abs(forward(basis, psi))
    a1 = np.abs(forward(basis, linear_flow(basis, psi, 0.77, FlowRegime.UNITARY)))
    assert np.max(np.abs(a1 - a0)) < 1e-13


def test_dissipative_linear_flow_concentrates_on_h00(basis, rng):
    psi = _smooth_field(basis, rng)
    share = []
    for _ in range(20):
        a = forward(basis, psi)
        share.append(abs(a[0, 0]) / np.linalg.norm(a))
        psi = linear_flow(basis, psi, 0.2, FlowRegime.DISSIPATIVE)
    assert all(y >= x for x, y in zip(share, share[1:]))
