"""Parameterized vector-unit cost model and configuration sweep.

Prices the instruction traces produced by :mod:`vann.kernels` under a
(vlen, k, n, m) vector-unit configuration with a fixed clock frequency
and memory bandwidth, turns measured workload profiles into
queries-per-second estimates, and exhaustively sweeps configuration
grids for per-algorithm and best-on-average winners.

The execution model is in-order and non-overlapping: total cycles are
the sum of per-instruction costs.  Multi-lane spreading over the n
adders / m fused-MAC units uses a pipelined formula,
``latency + ceil(lanes/units) - 1``; subtraction is priced as an add
and the ordered reduction as a binary tree of adds.  Loads are capped
by the per-cycle memory bandwidth.  All of this is isolated in
:func:`instruction_cost` so the rules can be swapped in one place.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import lru_cache

from .errors import InfeasibleConfigError
from .kernels import Instruction, InstructionTrace, trace_dot, trace_l2

DEFAULT_FREQ_HZ = 1.85e9
DEFAULT_BANDWIDTH_BPS = 29.8e9

DEFAULT_VLEN_GRID = (128, 256, 512, 1024, 2048, 4096, 8192, 16384)
DEFAULT_UNIT_GRID = (1, 2, 4, 8, 16, 32, 64, 128, 256, 512)
DEFAULT_K_GRID = (4, 8, 16, 32)

KERNELS = ("l2", "dot")


@dataclass(frozen=True)
class LatencyTable:
    """Instruction latencies in clock cycles."""

    add: int = 3
    macc: int = 6
    load: int = 1
    setvl: int = 1
    mv_v_to_s: int = 1
    mv_s_to_v: int = 1

    def __post_init__(self):
        for name in ("add", "macc", "load", "setvl", "mv_v_to_s", "mv_s_to_v"):
            if getattr(self, name) < 1:
                raise ValueError(f"latency {name} must be a positive integer")


DEFAULT_LATENCIES = LatencyTable()


@dataclass(frozen=True)
class VectorUnitConfig:
    """One point in the design space: register geometry, units, clock, memory."""

    vlen: int
    k: int
    n: int
    m: int
    freq: float = DEFAULT_FREQ_HZ
    bandwidth: float = DEFAULT_BANDWIDTH_BPS

    def __post_init__(self):
        if self.vlen < 32 or self.vlen % 32 != 0:
            raise ValueError("vlen must be a positive multiple of 32")
        if min(self.k, self.n, self.m) < 1:
            raise ValueError("k, n and m must be >= 1")
        if self.freq <= 0 or self.bandwidth <= 0:
            raise ValueError("freq and bandwidth must be positive")

    @property
    def lanes(self) -> int:
        """Number of 32-bit elements one vector register holds."""
        return self.vlen // 32

    @property
    def bytes_per_cycle(self) -> float:
        return self.bandwidth / self.freq


@dataclass(frozen=True)
class WorkloadProfile:
    """Measured per-query work volume of one algorithm."""

    algorithm: str
    dim: int
    calls_per_query: float
    kernel: str = "l2"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.calls_per_query <= 0:
            raise ValueError("calls_per_query must be positive")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}")

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "dim": self.dim,
            "calls_per_query": self.calls_per_query,
            "kernel": self.kernel,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorkloadProfile":
        return cls(
            algorithm=d["algorithm"],
            dim=int(d["dim"]),
            calls_per_query=float(d["calls_per_query"]),
            kernel=d.get("kernel", "l2"),
        )


@dataclass(frozen=True)
class TraceCost:
    cycles: int
    bytes_loaded: int


@dataclass(frozen=True)
class SimReport:
    """Per-query performance of one (profile, config) pairing."""

    cycles_per_call: int
    cycles_per_query: float
    time_per_query: float
    qps: float
    achieved_bandwidth: float


def instruction_cost(
    instr: Instruction,
    config: VectorUnitConfig,
    latencies: LatencyTable = DEFAULT_LATENCIES,
) -> int:
    """Cycle cost of a single instruction under the given configuration."""
    lanes = instr.active_lanes
    if lanes > config.lanes:
        raise InfeasibleConfigError(
            f"{instr.opcode} needs {lanes} lanes but vlen={config.vlen} provides {config.lanes}"
        )
    op = instr.opcode
    if op == "setvl":
        return latencies.setvl
    if op == "mv_s_to_v":
        return latencies.mv_s_to_v
    if op == "mv_v_to_s":
        return latencies.mv_v_to_s
    if op in ("add", "sub"):
        return latencies.add + (lanes + config.n - 1) // config.n - 1
    if op == "macc":
        return latencies.macc + (lanes + config.m - 1) // config.m - 1
    if op == "redosum":
        depth = (max(2, lanes) - 1).bit_length()  # ceil(log2(max(2, lanes)))
        return latencies.add * depth
    if op == "load":
        transfer = math.ceil(lanes * 4 / config.bytes_per_cycle)
        return max(latencies.load, transfer)
    raise ValueError(f"unknown opcode {op!r}")


def simulate_trace(
    trace: InstructionTrace,
    config: VectorUnitConfig,
    latencies: LatencyTable = DEFAULT_LATENCIES,
) -> TraceCost:
    """Total in-order cycle count of a trace (sum of per-instruction costs)."""
    if trace.registers_used > config.k:
        raise InfeasibleConfigError(
            f"kernel needs {trace.registers_used} vector registers, config has k={config.k}"
        )
    cycles = 0
    for (op, lanes), count in trace.instruction_counts().items():
        cycles += count * instruction_cost(Instruction(op, lanes), config, latencies)
    return TraceCost(cycles=cycles, bytes_loaded=trace.bytes_loaded)


@lru_cache(maxsize=None)
def _kernel_trace(kernel: str, dim: int, lanes: int) -> InstructionTrace:
    if kernel == "l2":
        return trace_l2(dim, lanes)
    if kernel == "dot":
        return trace_dot(dim, lanes)
    raise ValueError(f"kernel must be one of {KERNELS}")


def qps(
    profile: WorkloadProfile,
    config: VectorUnitConfig,
    latencies: LatencyTable = DEFAULT_LATENCIES,
) -> SimReport:
    """Queries-per-second estimate for one profile on one configuration.

    Only the vectorized kernel work is modeled: a query costs
    calls_per_query times the cycle count of one kernel call.
    """
    trace = _kernel_trace(profile.kernel, profile.dim, config.lanes)
    cost = simulate_trace(trace, config, latencies)
    cycles_per_query = profile.calls_per_query * cost.cycles
    time_per_query = cycles_per_query / config.freq
    bytes_per_query = profile.calls_per_query * cost.bytes_loaded
    return SimReport(
        cycles_per_call=cost.cycles,
        cycles_per_query=cycles_per_query,
        time_per_query=time_per_query,
        qps=config.freq / cycles_per_query,
        achieved_bandwidth=bytes_per_query / time_per_query,
    )


def _normalized_grid(values, name: str) -> tuple[int, ...]:
    grid = tuple(sorted(set(int(v) for v in values)))
    if not grid:
        raise ValueError(f"{name} grid must not be empty")
    if grid[0] < 1:
        raise ValueError(f"{name} grid entries must be positive")
    return grid


@dataclass(frozen=True)
class SweepSpec:
    """Configuration grid plus the fixed clock and memory parameters."""

    vlen_grid: tuple[int, ...] = DEFAULT_VLEN_GRID
    k_grid: tuple[int, ...] = DEFAULT_K_GRID
    n_grid: tuple[int, ...] = DEFAULT_UNIT_GRID
    m_grid: tuple[int, ...] = DEFAULT_UNIT_GRID
    freq: float = DEFAULT_FREQ_HZ
    bandwidth: float = DEFAULT_BANDWIDTH_BPS

    def __post_init__(self):
        object.__setattr__(self, "vlen_grid", _normalized_grid(self.vlen_grid, "vlen"))
        object.__setattr__(self, "k_grid", _normalized_grid(self.k_grid, "k"))
        object.__setattr__(self, "n_grid", _normalized_grid(self.n_grid, "n"))
        object.__setattr__(self, "m_grid", _normalized_grid(self.m_grid, "m"))
        for vlen in self.vlen_grid:
            if vlen % 32 != 0:
                raise ValueError("every vlen grid entry must be a multiple of 32")
        if self.freq <= 0 or self.bandwidth <= 0:
            raise ValueError("freq and bandwidth must be positive")

    def configs(self) -> list[VectorUnitConfig]:
        """The full grid in a fixed enumeration order."""
        return [
            VectorUnitConfig(vlen=v, k=k, n=n, m=m, freq=self.freq, bandwidth=self.bandwidth)
            for v in self.vlen_grid
            for k in self.k_grid
            for n in self.n_grid
            for m in self.m_grid
        ]


@dataclass(frozen=True)
class Evaluation:
    config: VectorUnitConfig
    profile: WorkloadProfile
    report: SimReport


@dataclass(frozen=True)
class AverageWinner:
    config: VectorUnitConfig
    mean_qps: float
    mean_bandwidth: float
    reports: tuple[SimReport, ...]  # one per profile, in profile order


@dataclass(frozen=True)
class SweepResult:
    profiles: tuple[WorkloadProfile, ...]
    per_algorithm: dict[str, Evaluation]
    best_average: AverageWinner
    evaluations: list[Evaluation]


def _tie_key(config: VectorUnitConfig) -> tuple:
    # Deterministic preference among equal-qps configs: smaller vlen,
    # then fewer total units, then fewer registers.
    return (config.vlen, config.n + config.m, config.k, config.n, config.m)


def sweep(
    spec: SweepSpec,
    profiles,
    latencies: LatencyTable = DEFAULT_LATENCIES,
) -> SweepResult:
    """Exhaustive grid evaluation: per-algorithm argmax-qps winners plus the
    configuration maximizing mean qps across all profiles."""
    profiles = tuple(profiles)
    if not profiles:
        raise ValueError("at least one workload profile required")
    names = [p.algorithm for p in profiles]
    if len(set(names)) != len(names):
        raise ValueError("profile algorithm names must be unique")

    evaluations: list[Evaluation] = []
    best: dict[str, Evaluation] = {}
    best_avg: tuple | None = None
    for config in spec.configs():
        reports = []
        feasible_all = True
        for profile in profiles:
            try:
                report = qps(profile, config, latencies)
            except InfeasibleConfigError:
                feasible_all = False
                continue
            reports.append((profile, report))
            evaluations.append(Evaluation(config, profile, report))
            cur = best.get(profile.algorithm)
            cand = (-report.qps, _tie_key(config))
            if cur is None or cand < (-cur.report.qps, _tie_key(cur.config)):
                best[profile.algorithm] = Evaluation(config, profile, report)
        if feasible_all and len(reports) == len(profiles):
            mean_qps = sum(r.qps for _, r in reports) / len(reports)
            cand = (-mean_qps, _tie_key(config))
            if best_avg is None or cand < best_avg[0]:
                best_avg = (cand, config, tuple(r for _, r in reports), mean_qps)

    if len(best) < len(profiles):
        missing = [n for n in names if n not in best]
        raise InfeasibleConfigError(f"no feasible configuration for profiles: {missing}")
    if best_avg is None:
        raise InfeasibleConfigError("no configuration is feasible for every profile")

    _, avg_config, avg_reports, mean_qps = best_avg
    mean_bw = sum(r.achieved_bandwidth for r in avg_reports) / len(avg_reports)
    return SweepResult(
        profiles=profiles,
        per_algorithm=best,
        best_average=AverageWinner(
            config=avg_config,
            mean_qps=mean_qps,
            mean_bandwidth=mean_bw,
            reports=avg_reports,
        ),
        evaluations=evaluations,
    )


AVERAGE_COLUMN = "Best on average"
TABLE3_ROWS = ("k", "vlen", "n", "m", "bandwidth (GB/s)", "Q/s")


def table3_cells(result: SweepResult) -> list[list[str]]:
    """Summary table as formatted cells: one column per algorithm plus the
    best-on-average column; the average column reports the mean bandwidth
    and mean Q/s of all algorithms on the winning-average configuration."""
    header = [""]
    columns: list[tuple[VectorUnitConfig, float, float]] = []
    for profile in result.profiles:
        entry = result.per_algorithm[profile.algorithm]
        header.append(profile.algorithm)
        columns.append((entry.config, entry.report.achieved_bandwidth, entry.report.qps))
    avg = result.best_average
    header.append(AVERAGE_COLUMN)
    columns.append((avg.config, avg.mean_bandwidth, avg.mean_qps))

    rows = [header]
    for label in TABLE3_ROWS:
        row = [label]
        for config, bandwidth, qps_value in columns:
            if label == "k":
                row.append(str(config.k))
            elif label == "vlen":
                row.append(str(config.vlen))
            elif label == "n":
                row.append(str(config.n))
            elif label == "m":
                row.append(str(config.m))
            elif label == "bandwidth (GB/s)":
                row.append(f"{bandwidth / 1e9:.1f}")
            else:
                row.append(str(round(qps_value)))
        rows.append(row)
    return rows


def table3_text(result: SweepResult) -> str:
    """Pretty-text rendering of the summary table."""
    cells = table3_cells(result)
    widths = [max(len(row[i]) for row in cells) for i in range(len(cells[0]))]
    lines = []
    for row in cells:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def table3_dict(result: SweepResult) -> dict:
    """Structured form of the summary table (raw, unrounded values)."""
    out: dict = {"columns": {}}

    def column(config: VectorUnitConfig, bandwidth: float, qps_value: float) -> dict:
        return {
            "k": config.k,
            "vlen": config.vlen,
            "n": config.n,
            "m": config.m,
            "bandwidth": bandwidth,
            "qps": qps_value,
        }

    for profile in result.profiles:
        entry = result.per_algorithm[profile.algorithm]
        out["columns"][profile.algorithm] = column(
            entry.config, entry.report.achieved_bandwidth, entry.report.qps
        )
    avg = result.best_average
    out["columns"][AVERAGE_COLUMN] = column(avg.config, avg.mean_bandwidth, avg.mean_qps)
    return out


def load_sweep_spec(path) -> tuple[SweepSpec, LatencyTable]:
    """Read a sweep specification file (JSON object; every key optional).

    Recognized keys: vlen, k, n, m (arrays), freq, bandwidth (numbers),
    latencies (object with add/macc/load/setvl/mv_v_to_s/mv_s_to_v).
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: sweep spec must be a JSON object")
    spec = SweepSpec(
        vlen_grid=tuple(raw.get("vlen", DEFAULT_VLEN_GRID)),
        k_grid=tuple(raw.get("k", DEFAULT_K_GRID)),
        n_grid=tuple(raw.get("n", DEFAULT_UNIT_GRID)),
        m_grid=tuple(raw.get("m", DEFAULT_UNIT_GRID)),
        freq=float(raw.get("freq", DEFAULT_FREQ_HZ)),
        bandwidth=float(raw.get("bandwidth", DEFAULT_BANDWIDTH_BPS)),
    )
    latencies = DEFAULT_LATENCIES
    if "latencies" in raw:
        latencies = replace(DEFAULT_LATENCIES, **{k: int(v) for k, v in raw["latencies"].items()})
    return spec, latencies


def load_profiles(path) -> list[WorkloadProfile]:
    """Read workload profiles from a JSON file ({"profiles": [...]})."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    entries = raw["profiles"] if isinstance(raw, dict) else raw
    return [WorkloadProfile.from_dict(e) for e in entries]


def save_profiles(profiles, path) -> None:
    """Write workload profiles in the format load_profiles reads."""
    payload = {"profiles": [p.to_dict() for p in profiles]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
