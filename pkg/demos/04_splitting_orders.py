# %% [markdown]
# # Splitting weights, costs and observed orders
#
# The order-q scheme averages forward and backward Lie chains at the sub-steps
# tau/m for m = 1..q/2. The weights come from a small Vandermonde-type system
# solved exactly in rationals.

# %%
import numpy as np

from gpesplit.bench import make_seed
from gpesplit.dynamics import EvolutionConfig, evolve
from gpesplit.flows import ModelParams
from gpesplit.hermite import build_basis, mass_norm
from gpesplit.splitting import build_scheme

for q in range(2, 15, 2):
    sc = build_scheme(q)
    print(f"q={q:2d} flows/step={sc.step_count:3d} weights={[str(g) for g in sc.exact_weights]}")

# %% [markdown]
# Self-convergence on a Gaussian. The reference is the eighth-order scheme at
# tau = 2^-10. The errors fall like tau^q until they reach roundoff near 1e-14.

# %%
basis = build_basis(1.0, 16)
params = ModelParams()
psi0 = make_seed(basis, "gaussian")
ref = evolve(basis, params, EvolutionConfig(1.0, 2.0**-10, 8), psi0).state
taus = [2.0**-k for k in range(3, 8)]
for q in (2, 4, 6):
    err = np.array([mass_norm(basis, evolve(basis, params, EvolutionConfig(1.0, t, q), psi0).state - ref)
                    for t in taus])
    print(f"q={q}: errors {np.array2string(err, precision=2)}  slopes {np.log2(err[:-1] / err[1:]).round(2)}")
