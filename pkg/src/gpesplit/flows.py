"""Exact sub-flows for the splitting: linear (harmonic oscillator) and nonlinear (cubic) parts.

Two regimes share one interface:

* ``DISSIPATIVE``: the gradient flow ``psi_t = 1/2 Lap psi - V psi - beta |psi|^2 psi``.
* ``UNITARY``: the Gross-Pitaevskii dynamics ``i psi_t = -1/2 Lap psi + V psi + beta |psi|^2 psi``.

All flows act on grid fields and return new arrays.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .hermite import SpectralBasis, _check_shape

__all__ = [
    "FlowRegime",
    "ModelParams",
    "SubFlows",
    "linear_flow",
    "nonlinear_flow",
    "make_subflows",
]


class FlowRegime(enum.Enum):
    DISSIPATIVE = "dissipative"
    UNITARY = "unitary"


@dataclass(frozen=True)
class ModelParams:
    """Nonlinearity ``beta >= 0`` and trap frequency ``gamma > 0``; ``V = gamma^2 |x|^2 / 2``."""

    beta: float = 2.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


class SubFlows(NamedTuple):
    """The pair of partial flows ``(phi_0, phi_1)``, each called as ``flow(state, tau)``."""

    linear: Callable[[np.ndarray, float], np.ndarray]
    nonlinear: Callable[[np.ndarray, float], np.ndarray]


def _check_tau(tau: float, regime: FlowRegime) -> None:
    if regime is FlowRegime.DISSIPATIVE and tau < 0:
        raise ValueError("negative time step is not allowed for the dissipative flow")


def linear_flow(basis: SpectralBasis, field: np.ndarray, tau: float, regime: FlowRegime) -> np.ndarray:
    """Exact flow of the linear part over ``tau`` within the truncated basis.

    Each coefficient is multiplied by ``exp(-mu tau)`` (dissipative) or
    ``exp(-i mu tau)`` (unitary). The transform, the diagonal multiplication and
    the back-transform are fused into the cached one-axis matrix from
    :meth:`SpectralBasis.propagator`, applied in weight-symmetrized coordinates.
    """
    _check_shape(basis, field, "grid field")
    _check_tau(tau, regime)
    if tau == 0:
        return np.array(field, dtype=complex)
    if regime is FlowRegime.DISSIPATIVE:
        B = basis.propagator(tau, False)
        S = basis.sqrt_weights()
        return (B @ (field * S) @ B.T) / S
    # Accumulate in extended precision so that long unitary runs keep the mass.
    B = basis.propagator(tau, True)
    S = basis.sqrt_weights(np.longdouble)
    q = np.asarray(field).astype(np.clongdouble) * S
    return ((B @ q @ B.T) / S).astype(complex)


def nonlinear_flow(field: np.ndarray, tau: float, params: ModelParams, regime: FlowRegime) -> np.ndarray:
    """Pointwise exact flow of the cubic term over ``tau``.

    Dissipative: ``psi / sqrt(1 + 2 beta tau |psi|^2)``.
    Unitary: ``exp(-i beta tau |psi|^2) psi``, a pure phase rotation.
    """
    _check_tau(tau, regime)
    field = np.asarray(field)
    if tau == 0 or params.beta == 0:
        return np.array(field, dtype=complex)
    rho = field.real**2 + field.imag**2
    if regime is FlowRegime.DISSIPATIVE:
        return field / np.sqrt(1.0 + 2.0 * params.beta * tau * rho)
    return np.exp(-1j * params.beta * tau * rho) * field


def make_subflows(basis: SpectralBasis, params: ModelParams, regime: FlowRegime) -> SubFlows:
    """Bind basis, parameters and regime into the two callables used by the splitting."""
    if abs(basis.gamma - params.gamma) > 1e-15 * params.gamma:
        raise ValueError(f"basis built for gamma={basis.gamma}, model has gamma={params.gamma}")

    def linear(state, tau):
        return linear_flow(basis, state, tau, regime)

    def nonlinear(state, tau):
        return nonlinear_flow(state, tau, params, regime)

    return SubFlows(linear, nonlinear)
