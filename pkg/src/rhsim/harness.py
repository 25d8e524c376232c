"""Seeded Monte-Carlo sweep over schemes and power budgets, with CSV output.

Every row gets its own generator seeded from a stable digest of
(scheme token, power index, trial), XORed with the base seed, so any single
row can be reproduced in isolation and the whole CSV is reproducible from the
configuration alone. Failed rows are marked (NaN throughput) and the sweep
continues.
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass

import numpy as np

from .ao import solve
from .baselines import run_baseline
from .channel import build_network
from .config import SimConfig, parse_scheme

__all__ = ["SweepRow", "SweepResult", "trial_seed", "run_sweep", "write_csv", "read_csv", "summarize", "format_summary"]

logger = logging.getLogger(__name__)

CSV_HEADER = "scheme,p_max_dbm,trial,seed,throughput,iterations,converged,violations,wall_ms"


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    p_max_dbm: float
    trial: int
    seed: int
    throughput: float  # bits/s/Hz; NaN marks a failed row
    iterations: int
    converged: bool
    violations: int
    wall_ms: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    def __len__(self) -> int:
        return len(self.rows)


def trial_seed(base_seed: int, scheme: str, p_max_index: int, trial: int) -> int:
    """Stable 64-bit seed for one row, independent of execution order."""
    digest = hashlib.sha256(f"{scheme}|{p_max_index}|{trial}".encode()).digest()
    return (int.from_bytes(digest[:8], "big") ^ base_seed) & 0xFFFFFFFFFFFFFFFF


def _run_row(config: SimConfig, scheme: str, p_max_dbm: float, seed: int) -> tuple[float, int, bool, int]:
    rng = np.random.default_rng(seed)
    network = build_network(
        config.build_layout(), config.path_loss_model(), config.dims, config.noise_dbm, rng
    )
    catalog = config.build_catalog()
    opts = config.solver_options(p_max_dbm)
    kind = parse_scheme(scheme)
    if kind is None:
        solution = solve(network, catalog, opts, rng)
    else:
        solution = run_baseline(kind, network, catalog, opts, rng)
    return solution.throughput, solution.iterations, solution.converged, solution.violations


def run_sweep(config: SimConfig) -> SweepResult:
    """Run every (scheme, p_max, trial) cell in deterministic order."""
    rows = []
    for scheme in config.schemes:
        for p_index, p_max_dbm in enumerate(config.p_max_dbm):
            for trial in range(config.trials):
                seed = trial_seed(config.seed, scheme, p_index, trial)
                start = time.perf_counter()
                try:
                    throughput, iterations, converged, violations = _run_row(config, scheme, p_max_dbm, seed)
                except Exception:
                    logger.exception("row failed: scheme=%s p_max=%s trial=%d", scheme, p_max_dbm, trial)
                    throughput, iterations, converged, violations = float("nan"), 0, False, 0
                elapsed_ms = int(round((time.perf_counter() - start) * 1000.0)) if config.timing else 0
                rows.append(
                    SweepRow(
                        scheme=scheme,
                        p_max_dbm=float(p_max_dbm),
                        trial=trial,
                        seed=seed,
                        throughput=throughput,
                        iterations=iterations,
                        converged=converged,
                        violations=violations,
                        wall_ms=elapsed_ms,
                    )
                )
    return SweepResult(rows=tuple(rows))


def _fmt(value: float) -> str:
    return format(value, ".17g")


def write_csv(result: SweepResult, path) -> None:
    """Write rows with 17-significant-digit floats so they round-trip exactly."""
    if not result.rows:
        raise ValueError("refusing to write an empty sweep result")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(CSV_HEADER + "\n")
        for row in result.rows:
            handle.write(
                f"{row.scheme},{_fmt(row.p_max_dbm)},{row.trial},{row.seed},"
                f"{_fmt(row.throughput)},{row.iterations},{int(row.converged)},"
                f"{row.violations},{row.wall_ms}\n"
            )


def read_csv(path) -> SweepResult:
    with open(path, "r", encoding="utf-8") as handle:
        header = handle.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header!r}")
        rows = []
        for line in handle:
            parts = line.strip().split(",")
            if len(parts) != 9:
                raise ValueError(f"malformed CSV row: {line!r}")
            rows.append(
                SweepRow(
                    scheme=parts[0],
                    p_max_dbm=float(parts[1]),
                    trial=int(parts[2]),
                    seed=int(parts[3]),
                    throughput=float(parts[4]),
                    iterations=int(parts[5]),
                    converged=bool(int(parts[6])),
                    violations=int(parts[7]),
                    wall_ms=int(parts[8]),
                )
            )
    return SweepResult(rows=tuple(rows))


def summarize(result: SweepResult) -> list[tuple[str, float, float, float, int]]:
    """Per-(scheme, p_max) mean and standard error, sorted by scheme then power.

    Warns (soft check) when a scheme's mean throughput is not non-decreasing
    in the power budget.
    """
    if not result.rows:
        raise ValueError("nothing to summarize")
    cells: dict[tuple[str, float], list[float]] = {}
    scheme_order: list[str] = []
    for row in result.rows:
        if row.scheme not in scheme_order:
            scheme_order.append(row.scheme)
        cells.setdefault((row.scheme, row.p_max_dbm), []).append(row.throughput)

    table = []
    for scheme in sorted(scheme_order):
        points = sorted(p for s, p in cells if s == scheme)
        means = []
        for p_max in points:
            values = np.asarray(cells[(scheme, p_max)], dtype=float)
            mean = float(np.nanmean(values))
            if values.size > 1:
                stderr = float(np.nanstd(values, ddof=1) / np.sqrt(np.sum(~np.isnan(values))))
            else:
                stderr = 0.0
            table.append((scheme, p_max, mean, stderr, int(values.size)))
            means.append(mean)
        if any(b < a for a, b in zip(means, means[1:])):
            logger.warning("scheme %s: mean throughput is not non-decreasing in p_max", scheme)
    return table


def format_summary(table) -> str:
    lines = [f"{'scheme':<20} {'p_max_dbm':>10} {'mean':>12} {'stderr':>12} {'n':>6}"]
    for scheme, p_max, mean, stderr, count in table:
        lines.append(f"{scheme:<20} {p_max:>10.1f} {mean:>12.4f} {stderr:>12.4f} {count:>6d}")
    return "\n".join(lines)
