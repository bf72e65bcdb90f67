import math

import numpy as np
import pytest

from gpesplit import ground_state as gs_mod
from gpesplit.bench import make_seed
from gpesplit.flows import ModelParams
from gpesplit.ground_state import DivergenceError, GroundStateConfig, descend, phase_fix, refine_tau
from gpesplit.hermite import basis_function, build_basis, hamiltonian, mass_norm


def test_linear_problem_gives_h00():
    b = build_basis(1.5, 8)
    res = descend(b, ModelParams(beta=0.0, gamma=1.5), GroundStateConfig(c=1.0, tau=0.05, q=2),
                  make_seed(b, "paper_seed_1"))
    assert res.H_min == pytest.approx(1.5, abs=1e-12)
    assert res.mu_ch == pytest.approx(1.5, abs=1e-12)
    assert np.allclose(np.abs(phase_fix(res.state)), np.abs(basis_function(b, 0, 0)), atol=1e-7)


def test_history_and_constraint(ground_states):
    res = ground_states["paper_seed_1"]
    assert res.iterations == 3000
    assert res.sim_time == pytest.approx(30.0)
    assert math.isnan(res.residual_history[0][1])
    assert len(res.residual_history) == 3001
    assert mass_norm(build_basis(1.0, 16), res.state) == pytest.approx(1.0, abs=1e-14)
    H = [h for _, _, h in res.residual_history]
    # energy is non-increasing up to roundoff
    assert all(b <= a + 1e-12 for a, b in zip(H, H[1:]))


def test_chemical_potential_and_period(ground_states):
    res = ground_states["h00"]
    assert res.T_mu == pytest.approx(2 * math.pi / res.mu_ch)
    # mu = H + (beta/2) * quartic, so mu > H for beta > 0
    assert res.mu_ch > res.H_min


def test_mass_constraint_scales():
    b = build_basis(1.0, 12)
    p = ModelParams()
    res = descend(b, p, GroundStateConfig(c=0.5, tau=0.02, q=4), make_seed(b, "h00"))
    assert mass_norm(b, res.state) == pytest.approx(0.5, abs=1e-14)
    assert res.H_min == pytest.approx(hamiltonian(b, res.state, 2.0))


def test_stagnation_stops_early():
    b = build_basis(1.0, 8)
    res = descend(b, ModelParams(), GroundStateConfig(tau=0.05, q=2, stagnation_tol=1e-12), make_seed(b, "h00"))
    assert res.iterations < GroundStateConfig(tau=0.05).iteration_limit
    assert res.residual_history[-1][1] <= 1e-12


def test_refine_tau_converges_quadratically():
    b = build_basis(1.0, 10)
    res = refine_tau(b, ModelParams(), GroundStateConfig(q=4), [0.04, 0.02, 0.01, 0.005])
    H = np.array([h for _, h in res.tau_history])
    d = np.diff(H)
    assert np.all(np.abs(d[:-1] / d[1:] - 4) < 0.2)
    assert res.tau == 0.005


def test_refine_tau_rejects_bad_schedule():
    b = build_basis(1.0, 4)
    with pytest.raises(ValueError, match="decreasing"):
        refine_tau(b, ModelParams(), GroundStateConfig(), [0.01, 0.02])
    with pytest.raises(ValueError, match="empty"):
        refine_tau(b, ModelParams(), GroundStateConfig(), [])


def test_divergence_is_reported(monkeypatch):
    b = build_basis(1.0, 4)
    energies = iter(range(10_000))
    monkeypatch.setattr(gs_mod, "hamiltonian", lambda *a, **k: float(next(energies)))
    with pytest.raises(DivergenceError) as info:
        descend(b, ModelParams(), GroundStateConfig(tau=0.1, q=2, stagnation_tol=0.0), make_seed(b, "h00"))
    assert len(info.value.history) > 100


def test_config_validation():
    with pytest.raises(ValueError):
        GroundStateConfig(c=0.0)
    with pytest.raises(ValueError):
        GroundStateConfig(tau=-0.1)
    with pytest.raises(ValueError):
        GroundStateConfig(max_iters=0)
    assert GroundStateConfig(tau=0.01).iteration_limit == 3000


def test_zero_seed_is_rejected():
    b = build_basis(1.0, 4)
    with pytest.raises(ValueError, match="zero mass"):
        descend(b, ModelParams(), GroundStateConfig(), np.zeros(b.shape))


def test_phase_fix():
    z = np.array([[0.1j, -2j], [0.5, 0.0]])
    out = phase_fix(z)
    assert out[0, 1] == pytest.approx(2.0)
    assert np.allclose(np.abs(out), np.abs(z))


def test_fixed_point_consistency():
    b = build_basis(1.0, 10)
    p = ModelParams()
    cfg = GroundStateConfig(tau=0.02, q=4, stagnation_tol=1e-13)
    res = descend(b, p, cfg, make_seed(b, "h00"))
    again = descend(b, p, GroundStateConfig(tau=0.02, q=4, max_iters=1), res.state)
    assert mass_norm(b, again.state - res.state) <= 10 * cfg.stagnation_tol


def test_chemical_potential_bound(ground_states):
    for res in ground_states.values():
        assert res.mu_ch >= res.H_min
