# %% [markdown]
# # The Hermite spectral layer
#
# A wave function on the plane is stored by its values on a tensor grid of
# Gauss-Hermite nodes. Two small matrices move between those samples and the
# Hermite coefficients, and the harmonic oscillator is diagonal in the coefficients.

# %%
import numpy as np

from gpesplit.flows import FlowRegime, linear_flow
from gpesplit.hermite import basis_function, build_basis, forward, inverse, mass_norm

basis = build_basis(gamma=1.0, M=16)
print("nodes per axis:", basis.M + 1)
print("outermost node:", basis.nodes[-1])
print("G @ E == I up to", np.max(np.abs(basis.G @ basis.E - np.eye(basis.M + 1))))

# %% [markdown]
# Transforming a random field to coefficients and back reproduces it, and the
# coefficient norm is the L2 norm of the interpolated function.

# %%
rng = np.random.default_rng(0)
psi = rng.standard_normal(basis.shape) + 1j * rng.standard_normal(basis.shape)
print("roundtrip error:", np.max(np.abs(inverse(basis, forward(basis, psi)) - psi)))
print("mass norm:", mass_norm(basis, psi))

# %% [markdown]
# The eigenvalues are gamma (k + l + 1). An eigenfunction therefore only
# rotates in phase under the linear flow.

# %%
h12 = basis_function(basis, 1, 2)
t = 0.7
out = linear_flow(basis, h12, t, FlowRegime.UNITARY)
print("phase check:", np.max(np.abs(out - np.exp(-4j * t) * h12)))

# %% [markdown]
# Ten thousand unitary steps keep the mass to roughly the last bit, because the
# step matrix is formed in extended precision and applied with long-double
# accumulation.

# %%
x = psi
for _ in range(10_000):
    x = linear_flow(basis, x, 1e-3, FlowRegime.UNITARY)
print("relative mass drift:", abs(mass_norm(basis, x) ** 2 / mass_norm(basis, psi) ** 2 - 1))
