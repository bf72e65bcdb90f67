"""Real-time GPE propagation with conservation and phase-rotation diagnostics."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .flows import FlowRegime, ModelParams, make_subflows
from .hermite import SpectralBasis, hamiltonian, mass_norm
from .splitting import build_scheme, composite_step

__all__ = [
    "EvolutionConfig",
    "DiagnosticsRecord",
    "EvolutionResult",
    "EvolutionAborted",
    "evolve",
    "measure_period",
]

MAX_RECORDS = 100_000


@dataclass(frozen=True)
class EvolutionConfig:
    """Final time ``T``, step ``tau``, splitting order ``q``.

    A negative ``tau`` runs the unitary dynamics backwards over ``|tau| * N``.
    ``record_every=None`` picks the smallest stride giving at most ``MAX_RECORDS`` rows.
    """

    T: float
    tau: float
    q: int = 2
    record_every: int | None = None

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.tau == 0:
            raise ValueError("tau must be nonzero")
        if self.record_every is not None and self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        n = self.T / abs(self.tau)
        if abs(n - round(n)) * abs(self.tau) > 1e-9 * abs(self.tau):
            raise ValueError(f"T={self.T} is not an integer multiple of tau={self.tau}")

    @property
    def n_steps(self) -> int:
        return round(self.T / abs(self.tau))

    @property
    def stride(self) -> int:
        if self.record_every is not None:
            return self.record_every
        return max(1, math.ceil(self.n_steps / MAX_RECORDS))


class DiagnosticsRecord(NamedTuple):
    """Diagnostics at time ``t``; ``dist_rotating`` is ``None`` without a reference frequency."""

    t: float
    E_M: float
    E_H: float
    dist_plain: float
    dist_rotating: float | None


class EvolutionResult(NamedTuple):
    records: list
    state: np.ndarray
    steps: int
    cpu_seconds: float


class EvolutionAborted(RuntimeError):
    """Non-finite values appeared; ``records`` ends with the last finite record."""

    def __init__(self, message, records):
        super().__init__(message)
        self.records = records


class CellTimeout(RuntimeError):
    pass


def _record(basis, beta, t, psi, psi0, m0, h0, mu):
    m = mass_norm(basis, psi)
    h = hamiltonian(basis, psi, beta)
    e_h = abs(h - h0) / abs(h0) if h0 != 0 else abs(h - h0)
    rot = None
    if mu is not None:
        rot = float(np.max(np.abs(psi - psi0 * np.exp(-1j * mu * t))))
    return DiagnosticsRecord(t, abs(m - m0) / m0, e_h, float(np.max(np.abs(psi - psi0))), rot)


def evolve(basis: SpectralBasis, params: ModelParams, config: EvolutionConfig, psi0: np.ndarray,
           mu_for_rotation: float | None = None, executor=None, flows=None,
           deadline: float | None = None) -> EvolutionResult:
    """Propagate ``psi0`` with the unitary composite splitting from 0 to ``T``.

    Diagnostics are recorded at ``t = 0`` and every ``config.stride`` steps (always
    including the final step). ``cpu_seconds`` counts process time spent in the
    composite steps only. ``flows`` overrides the unitary sub-flows (e.g. with
    counting wrappers); ``deadline`` is a ``time.monotonic()`` value after which
    :class:`CellTimeout` is raised.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    m0 = mass_norm(basis, psi0)
    if not m0 > 0:
        raise ValueError("initial state has zero mass")
    scheme = build_scheme(config.q)
    if flows is None:
        flows = make_subflows(basis, params, FlowRegime.UNITARY)
    h0 = hamiltonian(basis, psi0, params.beta)
    tau, n, stride = config.tau, config.n_steps, config.stride

    records = [_record(basis, params.beta, 0.0, psi0, psi0, m0, h0, mu_for_rotation)]
    psi = psi0
    cpu = 0.0
    for j in range(1, n + 1):
        t0 = time.process_time()
        psi = composite_step(scheme, tau, psi, flows, executor)
        cpu += time.process_time() - t0
        if j % stride == 0 or j == n:
            if not np.all(np.isfinite(psi)):
                raise EvolutionAborted(f"non-finite state at step {j}", records)
            records.append(_record(basis, params.beta, j * tau, psi, psi0, m0, h0, mu_for_rotation))
        if deadline is not None and time.monotonic() > deadline:
            raise CellTimeout(f"deadline passed at step {j} of {n}")
    return EvolutionResult(records, psi, n, cpu)


def measure_period(records) -> float:
    """Mean spacing of successive minima of ``dist_plain``.

    Minima are refined by a parabola through the three samples around each
    discrete minimum of ``dist_plain**2``; squaring turns the cusp of
    ``|sin(mu t / 2)|`` into a smooth quadratic minimum.
    """
    t = np.array([r.t for r in records], dtype=float)
    d = np.array([r.dist_plain for r in records], dtype=float)
    if len(t) < 3:
        raise ValueError("need at least 3 records")
    y = d * d
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise ValueError("records must be equally spaced in time")
    h = dt[0]
    # Discrete minima well below the oscillation amplitude; skip plateaus from noise.
    level = y.min() + 0.25 * (y.max() - y.min())
    minima = []
    i = 1
    while i < len(y) - 1:
        if y[i] <= y[i - 1] and y[i] < y[i + 1] and y[i] < level:
            denom = y[i - 1] - 2 * y[i] + y[i + 1]
            shift = 0.5 * (y[i - 1] - y[i + 1]) / denom if denom > 0 else 0.0
            minima.append(t[i] + shift * h)
        i += 1
    if len(minima) < 2:
        raise ValueError(f"found {len(minima)} minima, need at least 2")
    return float(np.mean(np.diff(minima)))
