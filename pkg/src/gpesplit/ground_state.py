"""Ground states by normalized gradient flow with high-order positive splitting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .flows import FlowRegime, ModelParams, make_subflows
from .hermite import SpectralBasis, basis_function, chemical_potential, forward, hamiltonian, mass_norm
from .splitting import build_scheme, composite_step

__all__ = [
    "GroundStateConfig",
    "GroundStateResult",
    "DivergenceError",
    "descend",
    "refine_tau",
    "phase_fix",
]

# H may rise by roundoff once converged; only rises above this count as divergence.
_ENERGY_SLACK = 1e-10
_DIVERGENCE_WINDOW = 100


class DivergenceError(RuntimeError):
    """Raised when the energy keeps increasing; ``history`` holds the records so far."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


@dataclass(frozen=True)
class GroundStateConfig:
    """Parameters of the descent.

    ``max_iters=None`` means ``ceil(30 / tau)`` iterations (30 time units). With
    ``stagnation_tol=0`` the descent always runs ``max_iters`` steps.
    """

    c: float = 1.0
    tau: float = 0.01
    q: int = 4
    max_iters: int | None = None
    stagnation_tol: float = 1e-14

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.stagnation_tol < 0:
            raise ValueError("stagnation_tol must be nonnegative")

    @property
    def iteration_limit(self) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return math.ceil(30.0 / self.tau - 1e-9)


@dataclass(frozen=True)
class GroundStateResult:
    """Converged (or last) iterate and its diagnostics.

    ``residual_history`` holds ``(iteration, residual, H)`` with
    ``residual = ||Psi_j - Psi_{j-1}||_2``; iteration 0 is the normalized seed.
    ``tau_history`` is filled by :func:`refine_tau` with ``(tau, H_min)`` pairs.
    """

    state: np.ndarray
    H_min: float
    mu_ch: float
    T_mu: float
    iterations: int
    tau: float
    residual_history: list = field(repr=False)
    tau_history: tuple = ()

    @property
    def sim_time(self) -> float:
        return self.iterations * self.tau


def phase_fix(field: np.ndarray) -> np.ndarray:
    """Multiply by the unit scalar that makes the largest-magnitude entry real and positive."""
    flat = np.asarray(field).ravel()
    z = flat[np.argmax(np.abs(flat))]
    if z == 0:
        return np.array(field, dtype=complex)
    return field * (abs(z) / z)


def descend(basis: SpectralBasis, params: ModelParams, config: GroundStateConfig, seed: np.ndarray,
            executor=None) -> GroundStateResult:
    """Iterate ``Psi <- c Phi(tau) Psi / ||Phi(tau) Psi||`` with the dissipative splitting."""
    norm0 = mass_norm(basis, seed)
    if not norm0 > 0:
        raise ValueError("seed has zero mass")
    scheme = build_scheme(config.q)
    flows = make_subflows(basis, params, FlowRegime.DISSIPATIVE)
    c, tau = config.c, config.tau

    psi = np.asarray(seed, dtype=complex) * (c / norm0)
    H = hamiltonian(basis, psi, params.beta)
    history = [(0, math.nan, H)]
    rises = 0
    j = 0
    for j in range(1, config.iteration_limit + 1):
        nxt = composite_step(scheme, tau, psi, flows, executor)
        a = forward(basis, nxt)
        nrm = float(np.linalg.norm(a))
        if not (nrm > 0 and math.isfinite(nrm)):
            raise DivergenceError(f"state norm became {nrm} at iteration {j}", history)
        nxt *= c / nrm
        residual = mass_norm(basis, nxt - psi)
        H_new = hamiltonian(basis, nxt, params.beta)
        history.append((j, residual, H_new))
        rises = rises + 1 if H_new > H + _ENERGY_SLACK else 0
        if rises > _DIVERGENCE_WINDOW:
            raise DivergenceError(f"energy increased for {rises} consecutive iterations", history)
        psi, H = nxt, H_new
        if residual <= config.stagnation_tol:
            break

    mu = chemical_potential(basis, psi, params.beta, c)
    return GroundStateResult(
        state=psi,
        H_min=H,
        mu_ch=mu,
        T_mu=2.0 * math.pi / mu,
        iterations=j,
        tau=tau,
        residual_history=history,
    )


def refine_tau(basis: SpectralBasis, params: ModelParams, base_config: GroundStateConfig,
               tau_schedule, seed: np.ndarray | None = None) -> GroundStateResult:
    """Run :func:`descend` for each step in a decreasing schedule, warm-starting each run.

    The first run starts from ``seed`` (default ``h_{0,0}``).
    The returned result is the last run, with ``tau_history`` listing every
    ``(tau, H_min)`` pair along the way.
    """
    taus = [float(t) for t in tau_schedule]
    if not taus:
        raise ValueError("tau schedule is empty")
    if any(b >= a for a, b in zip(taus, taus[1:])):
        raise ValueError("tau schedule must be strictly decreasing")
    state = basis_function(basis, 0, 0) if seed is None else seed
    trail = []
    result = None
    for tau in taus:
        result = descend(basis, params, replace(base_config, tau=tau), state)
        trail.append((tau, result.H_min))
        state = result.state
    return replace(result, tau_history=tuple(trail))
