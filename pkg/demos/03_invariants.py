# %% [markdown]
# # Real-time dynamics of a ground state
#
# A stationary state only rotates in phase, psi(t) = exp(-i mu t) psi(0).
# The distance to the initial state therefore returns to zero every
# 2 pi / mu. The splitting should reproduce that period and conserve mass and energy.

# %%
import math

from gpesplit.bench import make_seed
from gpesplit.dynamics import EvolutionConfig, evolve, measure_period
from gpesplit.flows import ModelParams
from gpesplit.ground_state import GroundStateConfig, refine_tau
from gpesplit.hermite import build_basis

basis = build_basis(1.0, 16)
params = ModelParams()
gs = refine_tau(basis, params, GroundStateConfig(c=1.0, q=4), [0.01, 0.005, 0.0025], make_seed(basis, "h00"))
print(f"mu = {gs.mu_ch:.10f}, 2 pi / mu = {gs.T_mu:.6f}")

# %% [markdown]
# Evolve for two periods with the second- and eighth-order schemes and compare
# the conservation errors.

# %%
T = 2 * math.ceil(gs.T_mu)
for q in (2, 8):
    res = evolve(basis, params, EvolutionConfig(T, 1e-3, q, record_every=1), gs.state, gs.mu_ch)
    print(f"q={q}: period {measure_period(res.records):.6f}  "
          f"max E_M {max(r.E_M for r in res.records):.2e}  max E_H {max(r.E_H for r in res.records):.2e}  "
          f"cpu {res.cpu_seconds:.1f}s")
