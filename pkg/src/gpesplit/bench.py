"""Benchmark drivers: ground-state convergence, invariant preservation, cost vs accuracy.

Each driver takes a :class:`RunConfig`, writes plot-ready CSV files into
``config.out_dir`` and returns :class:`BenchmarkArtifacts` with the key numbers
and pass/fail checks against the published reference values.
"""
from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
import os
import platform
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .dynamics import CellTimeout, EvolutionConfig, evolve, measure_period
from .flows import FlowRegime, ModelParams, make_subflows
from .ground_state import GroundStateConfig, descend, phase_fix, refine_tau
from .hermite import SpectralBasis, basis_function, build_basis, inverse
from .splitting import build_scheme, counting

__all__ = [
    "RunConfig",
    "CostRecord",
    "BenchmarkArtifacts",
    "make_seed",
    "run_benchmark_I",
    "run_benchmark_II",
    "run_benchmark_III",
    "emit_report",
    "load_artifacts",
    "write_csv",
    "WORKERS_ENV",
]

WORKERS_ENV = "GPESPLIT_WORKERS"
BENCHMARKS = ("ground_state", "invariants", "cost_accuracy")
SEEDS = ("paper_seed_1", "h00", "gaussian")

# Published reference values (beta=2, gamma=1, M=16).
H_MIN_SEED_1 = 1.14672998984857
H_MIN_H00 = 1.146729989848536
H_MIN_LIMIT = 1.146728491833
PERIODS = {0.25: 5.834, 1.0: 4.898, 2.0: 4.144}


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration of one benchmark run.

    ``c_values`` are mass constraints in the ``||u||^2`` sense used for the period
    table, so the ground state for ``c`` has L2 norm ``sqrt(c)``. ``T=None`` lets the
    benchmark choose (30 for I and III, three whole periods for II).
    """

    benchmark: str
    beta: float = 2.0
    gamma: float = 1.0
    M: int = 16
    orders: tuple = (4,)
    taus: tuple = (0.01,)
    c_values: tuple = (1.0,)
    T: float | None = None
    seeds: tuple = ("paper_seed_1", "h00")
    out_dir: str = "results"
    workers: int = 1
    repeats: int = 3
    timeout: float | None = None
    refine_levels: int = 8
    gs_taus: tuple = (0.01, 0.005, 0.0025, 0.00125, 0.000625)

    def __post_init__(self):
        if self.benchmark not in BENCHMARKS:
            raise ValueError(f"unknown benchmark {self.benchmark!r}; choose from {BENCHMARKS}")
        for name in ("orders", "taus", "c_values", "seeds", "gs_taus"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be nonempty")
        if any(int(q) != q or q < 2 or q % 2 for q in self.orders):
            raise ValueError(f"orders must be even integers >= 2, got {self.orders}")
        if any(t <= 0 for t in self.taus) or any(t <= 0 for t in self.gs_taus):
            raise ValueError("time steps must be positive")
        if any(c <= 0 for c in self.c_values):
            raise ValueError("c values must be positive")
        if unknown := set(self.seeds) - set(SEEDS):
            raise ValueError(f"unknown seeds {sorted(unknown)}; choose from {SEEDS}")
        if self.workers < 1 or self.repeats < 1:
            raise ValueError("workers and repeats must be >= 1")

    @classmethod
    def defaults(cls, benchmark: str, **overrides) -> "RunConfig":
        presets = {
            "ground_state": dict(orders=(4,), taus=(0.01,), seeds=("paper_seed_1", "h00")),
            "invariants": dict(orders=(2, 8), taus=(1e-3,), c_values=(0.25, 1.0, 2.0), seeds=("h00",)),
            "cost_accuracy": dict(orders=tuple(range(2, 15, 2)), taus=tuple(2.0**-k for k in range(10)),
                                  T=30.0, seeds=("gaussian",)),
        }
        kw = dict(presets.get(benchmark, {}))
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(benchmark=benchmark, **kw)

    @classmethod
    def from_file(cls, path, **overrides) -> "RunConfig":
        """Read a ``[run]`` section of ``key = value`` lines; lists are comma-separated."""
        parser = configparser.ConfigParser()
        with open(path) as fh:
            parser.read_file(fh)
        raw = dict(parser["run"]) if parser.has_section("run") else {}
        values = dict(_parse_field(k, v) for k, v in raw.items())
        values.update({k: v for k, v in overrides.items() if v is not None})
        bench = values.pop("benchmark", None)
        if bench is None:
            raise ValueError(f"{path}: missing 'benchmark' key")
        return cls.defaults(bench, **values)

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def model(self) -> ModelParams:
        return ModelParams(self.beta, self.gamma)

    def is_reference_setup(self) -> bool:
        return self.beta == 2.0 and self.gamma == 1.0 and self.M == 16


_TUPLE_TYPES = {"orders": int, "taus": float, "c_values": float, "seeds": str, "gs_taus": float}
_SCALAR_TYPES = {"benchmark": str, "beta": float, "gamma": float, "M": int, "T": float, "out_dir": str,
                 "workers": int, "repeats": int, "timeout": float, "refine_levels": int}


def _parse_field(key: str, text: str) -> tuple:
    """Map a file key (case-insensitive) to ``(field name, typed value)``."""
    names = {f.name.lower(): f.name for f in fields(RunConfig)}
    if key.lower() not in names:
        raise ValueError(f"unknown config key {key!r}")
    key = names[key.lower()]
    text = text.strip()
    if key in _TUPLE_TYPES:
        conv = _TUPLE_TYPES[key]
        return key, tuple(conv(_num(p) if conv is not str else p.strip()) for p in text.split(",") if p.strip())
    if text.lower() in ("", "none"):
        return key, None
    conv = _SCALAR_TYPES[key]
    return key, (conv(_num(text)) if conv is not str else text)


def _num(text: str):
    """Parse numbers, allowing ``2^-3`` style powers."""
    text = text.strip()
    if "^" in text:
        base, exp = text.split("^")
        return float(base) ** float(exp)
    v = float(text)
    return int(v) if v.is_integer() and "." not in text and "e" not in text.lower() else v


@dataclass(frozen=True)
class CostRecord:
    q: int
    tau: float
    cpu_seconds: float | None
    max_E_M: float | None
    max_E_H: float | None
    flow_applications: int | None = None
    expected_applications: int | None = None


@dataclass
class BenchmarkArtifacts:
    name: str
    config: RunConfig
    summary: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "config": self.config.to_dict(),
            "config_hash": self.config.config_hash(),
            "summary": self.summary,
            "files": [str(f) for f in self.files],
            "checks": self.checks,
        }

    def save(self) -> Path:
        path = Path(self.config.out_dir) / f"{self.name}_artifacts.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, default=_json_default))
        return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(path, header, rows, config: RunConfig | None = None) -> Path:
    """Comma-separated, one header row, floats at 17 significant digits.

    With ``config`` the resolved configuration is embedded as ``#`` comment lines
    above the header.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if config is not None:
            fh.write(f"# config_hash={config.config_hash()}\n")
            fh.write("# config=" + json.dumps(config.to_dict(), sort_keys=True, default=str) + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def make_seed(basis: SpectralBasis, name: str) -> np.ndarray:
    """Named initial fields on the grid.

    ``paper_seed_1``: ``0.01 h00 + 0.1 h01 + 0.1 h10 + h11``; ``h00``: the linear
    ground state; ``gaussian``: ``exp(-V) / (2 pi^(3/4))`` with ``V = gamma^2 |x|^2 / 2``
    (not normalized).
    """
    if name == "paper_seed_1":
        a = np.zeros(basis.shape)
        a[0, 0], a[0, 1], a[1, 0], a[1, 1] = 0.01, 0.1, 0.1, 1.0
        return inverse(basis, a).astype(complex)
    if name == "h00":
        return basis_function(basis, 0, 0)
    if name == "gaussian":
        X, Y = basis.mesh()
        V = 0.5 * basis.gamma**2 * (X**2 + Y**2)
        return (np.exp(-V) / (2.0 * math.pi**0.75)).astype(complex)
    raise ValueError(f"unknown seed {name!r}")


def _workers(config: RunConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    return int(env) if env else config.workers


# -- Benchmark I -------------------------------------------------------------


def run_benchmark_I(config: RunConfig) -> BenchmarkArtifacts:
    """Descend from each seed with ``tau=taus[0]``, ``q=orders[0]`` for ``T`` time units."""
    if config.benchmark != "ground_state":
        raise ValueError("config is not for the ground_state benchmark")
    basis = build_basis(config.gamma, config.M)
    params = config.model()
    tau, q, c = config.taus[0], config.orders[0], math.sqrt(config.c_values[0])
    T = 30.0 if config.T is None else config.T
    gs_config = GroundStateConfig(c=c, tau=tau, q=q, max_iters=max(1, round(T / tau)), stagnation_tol=0.0)
    art = BenchmarkArtifacts("ground_state", config)
    states = {}
    for seed in config.seeds:
        t0 = time.perf_counter()
        res = descend(basis, params, gs_config, make_seed(basis, seed))
        wall = time.perf_counter() - t0
        rows = [(j, j * tau, r, H) for j, r, H in res.residual_history]
        art.files.append(write_csv(Path(config.out_dir) / f"ground_state_{seed}.csv",
                                   ["iteration", "sim_time", "residual", "H"], rows, config))
        residuals = [r for _, r, _ in res.residual_history[1:]]
        art.summary[seed] = {
            "H_min": res.H_min, "mu_ch": res.mu_ch, "T_mu": res.T_mu, "iterations": res.iterations,
            "final_residual": residuals[-1], "min_residual": min(residuals), "wall_seconds": wall,
        }
        states[seed] = phase_fix(res.state)
        print(f"[ground_state] seed={seed} H_min={res.H_min:.15f} residual={residuals[-1]:.2e}")
    if len(states) >= 2:
        a, b = list(states.values())[:2]
        art.summary["seed_agreement_inf"] = float(np.max(np.abs(a - b)))
    if config.refine_levels > 0:
        schedule = [tau / 2**k for k in range(config.refine_levels + 1)]
        res = refine_tau(basis, params, GroundStateConfig(c=c, q=q), schedule, make_seed(basis, "h00"))
        art.summary["refined"] = {"H_min": res.H_min, "tau_history": [list(p) for p in res.tau_history]}
        art.files.append(write_csv(Path(config.out_dir) / "ground_state_refinement.csv",
                                   ["tau", "H_min"], res.tau_history, config))
        print(f"[ground_state] refined tau={schedule[-1]:.3e} H_min={res.H_min:.13f}")

    if config.is_reference_setup() and tau == 0.01 and q == 4 and c == 1.0:
        s = art.summary
        if "paper_seed_1" in s:
            art.checks["H_min_paper_seed_1"] = abs(s["paper_seed_1"]["H_min"] - H_MIN_SEED_1) <= 1e-9
        if "h00" in s:
            art.checks["H_min_h00"] = abs(s["h00"]["H_min"] - H_MIN_H00) <= 1e-9
        if "seed_agreement_inf" in s and set(config.seeds[:2]) == {"paper_seed_1", "h00"}:
            art.checks["seed_agreement"] = s["seed_agreement_inf"] <= 1e-13
        if "refined" in s and tau / 2**config.refine_levels <= 4e-5:
            art.checks["H_min_refined"] = abs(s["refined"]["H_min"] - H_MIN_LIMIT) <= 5e-11
    art.save()
    return art


# -- Benchmark II ------------------------------------------------------------


def run_benchmark_II(config: RunConfig) -> BenchmarkArtifacts:
    """Evolve ground states for each mass and track conservation and periodicity.

    Every order in ``orders`` is run for ``c = 1`` (or the first mass if 1 is
    absent); the other masses use only the lowest order.
    """
    if config.benchmark != "invariants":
        raise ValueError("config is not for the invariants benchmark")
    basis = build_basis(config.gamma, config.M)
    params = config.model()
    tau = config.taus[0]
    orders = sorted(config.orders)
    focus = 1.0 if 1.0 in config.c_values else config.c_values[0]
    art = BenchmarkArtifacts("invariants", config)
    for mass in config.c_values:
        norm = math.sqrt(mass)
        gs = refine_tau(basis, params, GroundStateConfig(c=norm, q=4), config.gs_taus,
                        norm * make_seed(basis, "h00"))
        T = config.T if config.T is not None else 3 * math.ceil(gs.T_mu)
        entry = {"mu_ch": gs.mu_ch, "T_mu": gs.T_mu, "H_min": gs.H_min, "T": T, "orders": {}}
        for q in orders if mass == focus else orders[:1]:
            res = evolve(basis, params, EvolutionConfig(T, tau, q, record_every=1), gs.state, gs.mu_ch)
            name = f"invariants_c{mass:g}_q{q}.csv"
            art.files.append(write_csv(Path(config.out_dir) / name,
                                       ["t", "E_M", "E_H", "dist_plain", "dist_rotating"], res.records, config))
            period = measure_period(res.records)
            entry["orders"][q] = {
                "measured_period": period,
                "max_E_M": max(r.E_M for r in res.records),
                "max_E_H": max(r.E_H for r in res.records),
                "max_dist_rotating": max(r.dist_rotating for r in res.records),
                "cpu_seconds": res.cpu_seconds,
            }
            print(f"[invariants] c={mass:g} q={q} mu_ch={gs.mu_ch:.10f} T_mu={gs.T_mu:.6f} "
                  f"measured={period:.6f}")
        art.summary[f"{mass:g}"] = entry

    if config.is_reference_setup() and tau == 1e-3:
        q0 = orders[0]
        for mass in config.c_values:
            entry = art.summary[f"{mass:g}"]
            measured = entry["orders"][q0]["measured_period"]
            if mass in PERIODS and q0 == 2:
                art.checks[f"period_c{mass:g}"] = abs(measured - PERIODS[mass]) <= 0.005
            art.checks[f"period_vs_mu_c{mass:g}"] = abs(measured - entry["T_mu"]) <= 2 * tau
        fo = art.summary[f"{focus:g}"]["orders"]
        if 2 in fo and 8 in fo:
            art.checks["q8_improves_E_M"] = fo[8]["max_E_M"] < fo[2]["max_E_M"]
            art.checks["q8_improves_E_H"] = fo[8]["max_E_H"] < fo[2]["max_E_H"]
    art.save()
    return art


# -- Benchmark III -----------------------------------------------------------


def _cost_cell(args) -> CostRecord:
    gamma, M, beta, q, tau, T, repeats, timeout = args
    basis = build_basis(gamma, M)
    params = ModelParams(beta, gamma)
    psi0 = make_seed(basis, "gaussian")
    scheme = build_scheme(q)
    cfg = EvolutionConfig(T, tau, q, record_every=1)
    expected = cfg.n_steps * scheme.step_count
    times = []
    first = None
    applied = None
    for rep in range(repeats):
        deadline = None if timeout is None else time.monotonic() + timeout
        flows, counter = counting(make_subflows(basis, params, FlowRegime.UNITARY))
        try:
            res = evolve(basis, params, cfg, psi0, flows=flows, deadline=deadline)
        except CellTimeout:
            return CostRecord(q, tau, None, None, None, None, expected)
        if first is None:
            first, applied = res, counter.total
        times.append(res.cpu_seconds)
    return CostRecord(
        q=q, tau=tau,
        cpu_seconds=statistics.median(times),
        max_E_M=max(r.E_M for r in first.records),
        max_E_H=max(r.E_H for r in first.records),
        flow_applications=applied,
        expected_applications=expected,
    )


def cpu_ratio_table(records) -> list:
    """``(q, observed, theoretical)`` with observed = mean CPU(q) / mean CPU(2).

    Means are taken over the steps completed by every order.
    """
    by_q = {}
    for r in records:
        by_q.setdefault(r.q, {})[r.tau] = r.cpu_seconds
    if 2 not in by_q:
        raise ValueError("the ratio table needs order 2")
    common = set.intersection(*({t for t, s in d.items() if s is not None} for d in by_q.values()))
    if not common:
        raise ValueError("no time step was completed by all orders")
    base = statistics.mean(by_q[2][t] for t in common)
    s2 = build_scheme(2).step_count
    return [(q, statistics.mean(by_q[q][t] for t in common) / base, build_scheme(q).step_count / s2)
            for q in sorted(by_q)]


def run_benchmark_III(config: RunConfig) -> BenchmarkArtifacts:
    """Max relative mass/energy errors and CPU time over a grid of orders and steps."""
    if config.benchmark != "cost_accuracy":
        raise ValueError("config is not for the cost_accuracy benchmark")
    T = 30.0 if config.T is None else config.T
    cells = [(config.gamma, config.M, config.beta, int(q), float(tau), T, config.repeats, config.timeout)
             for q in config.orders for tau in config.taus]
    workers = _workers(config)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_cost_cell, cells))
    else:
        records = [_cost_cell(cell) for cell in cells]
    for r in records:
        state = "timeout" if r.cpu_seconds is None else f"cpu={r.cpu_seconds:.3f}s E_M={r.max_E_M:.2e} E_H={r.max_E_H:.2e}"
        print(f"[cost_accuracy] q={r.q} tau={r.tau:g} {state}")

    art = BenchmarkArtifacts("cost_accuracy", config)
    art.files.append(write_csv(
        Path(config.out_dir) / "cost_accuracy.csv",
        ["q", "tau", "cpu_seconds", "max_E_M", "max_E_H", "flow_applications", "expected_applications"],
        [tuple(asdict(r).values()) for r in records], config))
    art.summary["cells"] = [asdict(r) for r in records]
    done = [r for r in records if r.cpu_seconds is not None]
    art.checks["step_count_law"] = all(r.flow_applications == r.expected_applications for r in done)
    if any(r.q == 2 for r in done):
        table = cpu_ratio_table(records)
        art.files.append(write_csv(Path(config.out_dir) / "cpu_ratios.csv",
                                   ["q", "observed_ratio", "theoretical_ratio"], table, config))
        art.summary["cpu_ratios"] = [list(row) for row in table]
        art.checks["cpu_ratios_within_2x"] = all(0.5 <= obs / theo <= 2.0 for _, obs, theo in table)
        for q, obs, theo in table:
            print(f"[cost_accuracy] ratio q={q}: observed {obs:.2f} theoretical {theo:.2f}")
    art.save()
    return art


# -- Report ------------------------------------------------------------------


def load_artifacts(out_dir) -> list:
    """Artifact dictionaries previously saved by the benchmark drivers."""
    return [json.loads(p.read_text()) for p in sorted(Path(out_dir).glob("*_artifacts.json"))]


def emit_report(artifacts, out_dir) -> tuple[Path, bool]:
    """Write ``summary.json`` and return its path and whether every check passed."""
    items = [a.to_dict() if isinstance(a, BenchmarkArtifacts) else a for a in artifacts]
    if not items:
        raise ValueError("no benchmark artifacts to report")
    passed = all(all(a["checks"].values()) for a in items)
    combined = hashlib.sha256("".join(a["config_hash"] for a in items).encode()).hexdigest()[:16]
    summary = {
        "config_hash": combined,
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "platform": platform.platform(),
            "note": "CPU times are machine dependent; only their ratios are compared.",
        },
        "benchmarks": {a["name"]: {"config_hash": a["config_hash"], "config": a["config"],
                                   "summary": a["summary"], "checks": a["checks"]} for a in items},
        "all_checks_passed": passed,
    }
    path = Path(out_dir) / "summary.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary, indent=2, default=_json_default))
    return path, passed
