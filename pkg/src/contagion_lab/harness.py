"""Sweeps of the stress protocols over seeds, parameter grids and replicas.

A contagion event is a run in which at least one bank beyond the seed is
triggered. Three metrics summarize an all-seeds sweep:

* contagion probability: fraction of seeds producing an event;
* conditional extent: mean affected fraction given an event (None when no
  event occurred);
* maximum extent: largest affected fraction over seeds.

All sweeps fan out over independent runs against immutable inputs and
aggregate in a fixed order, so results do not depend on scheduling or on
the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .balance import BankingSystem, NetExposureMatrix, net_exposures
from .cascades import (
    CascadeResult,
    CompiledSystem,
    ShockParams,
    compile_system,
    counterparty_cascade_compiled,
    exogenous_shock_compiled,
    fire_sale_cascade_compiled,
    rollover_cascade_compiled,
)
from .nullmodels import ASSET_SIDE, LIABILITY_SIDE, default_swap_budget, generate_replica

PROTOCOLS = ("counterparty", "rollover", "fire_sale")


@dataclass
class EnsembleReport:
    """Aggregated metrics of one all-seeds sweep."""

    contagion_probability: float
    conditional_extent: float | None
    max_extent: float
    per_seed_results: tuple[CascadeResult, ...]
    extent_histogram: dict[int, int]

    @classmethod
    def from_results(cls, results, n_banks: int) -> "EnsembleReport":
        sizes = [len(r.affected) for r in results]
        events = [s for s in sizes if s >= 1]
        histogram: dict[int, int] = {}
        for s in sizes:
            histogram[s] = histogram.get(s, 0) + 1
        return cls(
            contagion_probability=len(events) / len(results) if results else 0.0,
            conditional_extent=(sum(events) / len(events) / n_banks) if events else None,
            max_extent=max(sizes, default=0) / n_banks,
            per_seed_results=tuple(results),
            extent_histogram=histogram,
        )

    def prob_affected_above(self, threshold: int) -> float:
        """Fraction of seeds whose cascade affected more than `threshold` banks."""
        if not self.per_seed_results:
            return 0.0
        hits = sum(count for size, count in self.extent_histogram.items() if size > threshold)
        return hits / len(self.per_seed_results)


@dataclass(frozen=True)
class SweepConfig:
    protocol: str
    c_grid: tuple[float, ...] = ()
    phi_grid: tuple[float, ...] = ()
    f: float = 0.0
    replicas: int = 0
    rng_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.protocol not in PROTOCOLS + ("exogenous",):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        for grid in (self.c_grid, self.phi_grid):
            for value in grid:
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"grid value {value} outside [0, 1]")
        if self.replicas < 0:
            raise ValueError("replicas must be >= 0")


def _run_one_seed(compiled: CompiledSystem, protocol: str, seed: int, *,
                  f: float = 0.0, c: float = 0.0, with_counterparty: bool = True) -> CascadeResult:
    if protocol == "counterparty":
        return counterparty_cascade_compiled(compiled, seed)
    if protocol == "rollover":
        return rollover_cascade_compiled(compiled, seed, f)
    if protocol == "fire_sale":
        return fire_sale_cascade_compiled(compiled, seed, c, with_counterparty)
    raise ValueError(f"protocol {protocol!r} needs a seed bank")


def run_all_seeds(system: BankingSystem, protocol: str, *, f: float = 0.0, c: float = 0.0,
                  with_counterparty: bool = True,
                  net: NetExposureMatrix | None = None) -> EnsembleReport:
    """One cascade per bank as seed, folded into an EnsembleReport."""
    if net is None:
        net = net_exposures(system.exposures)
    compiled = compile_system(system, net)
    results = [
        _run_one_seed(compiled, protocol, seed, f=f, c=c, with_counterparty=with_counterparty)
        for seed in range(system.n)
    ]
    return EnsembleReport.from_results(results, system.n)


def amplification_curve(system: BankingSystem, cphi_grid, *,
                        net: NetExposureMatrix | None = None):
    """Failure fractions of the one-shot asset shock with and without the
    counterparty channel, plus their ratio, at each c*phi level.

    Returns rows (c_phi, frac_no_network, frac_with_network, ratio); the
    ratio is None where the no-network fraction is zero.
    """
    if net is None:
        net = net_exposures(system.exposures)
    compiled = compile_system(system, net)
    rows = []
    for cphi in cphi_grid:
        frac = {}
        for with_cp in (False, True):
            params = ShockParams(c=1.0, phi=float(cphi), with_counterparty=with_cp)
            result = exogenous_shock_compiled(compiled, params)
            frac[with_cp] = len(result.affected) / system.n
        ratio = frac[True] / frac[False] if frac[False] > 0 else None
        rows.append((float(cphi), frac[False], frac[True], ratio))
    return rows


def fire_sale_sweep(system: BankingSystem, c_grid, *, large_cascade_threshold: int = 10,
                    net: NetExposureMatrix | None = None, threads: int = 1):
    """Fire-sale metrics across the portfolio-overlap grid.

    For each c, runs the all-seeds sweep with the counterparty term both
    suppressed and active. Returns rows of
    (c, report_without_counterparty, report_with_counterparty).
    """
    if net is None:
        net = net_exposures(system.exposures)
    tasks = [
        (float(c), with_cp) for c in c_grid for with_cp in (False, True)
    ]
    outputs = _parallel_map(
        _fire_sale_cell, [(system, net, c, with_cp) for c, with_cp in tasks], threads
    )
    rows = []
    for k in range(0, len(tasks), 2):
        c = tasks[k][0]
        rows.append((c, outputs[k], outputs[k + 1]))
    return rows


def _fire_sale_cell(args):
    system, net, c, with_cp = args
    return run_all_seeds(system, "fire_sale", c=c, with_counterparty=with_cp, net=net)


def _metrics_tuple(report: EnsembleReport):
    return (report.contagion_probability, report.conditional_extent, report.max_extent)


@dataclass(frozen=True)
class NullModelComparison:
    """Original metrics next to the rewired-ensemble distribution."""

    original: tuple[float, float | None, float]
    replicas: tuple[tuple[float, float | None, float], ...]
    discarded: int

    def replica_values(self, metric_index: int):
        return [r[metric_index] for r in self.replicas]


def _replica_metrics(args):
    system, protocol, f, retention, swap_budget, rng_seed, index = args
    replica, discarded = generate_replica(system, retention, swap_budget, rng_seed, index)
    report = run_all_seeds(replica, protocol, f=f)
    return _metrics_tuple(report), discarded


def null_model_comparison(system: BankingSystem, protocol: str, replicas: int, rng_seed: int,
                          *, f: float = 0.0, swap_budget: int | None = None,
                          threads: int = 1) -> NullModelComparison:
    """Metric distribution over degree-preserving replicas vs the original.

    Counterparty stress rewires with asset-side weight retention, roll-over
    with liability-side retention, matching how each channel reads the
    exposure weights.
    """
    if protocol not in ("counterparty", "rollover"):
        raise ValueError(f"null-model comparison supports counterparty/rollover, not {protocol!r}")
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    retention = ASSET_SIDE if protocol == "counterparty" else LIABILITY_SIDE
    if swap_budget is None:
        swap_budget = default_swap_budget(system)
    original = _metrics_tuple(run_all_seeds(system, protocol, f=f))
    tasks = [
        (system, protocol, f, retention, swap_budget, rng_seed, index)
        for index in range(replicas)
    ]
    outputs = _parallel_map(_replica_metrics, tasks, threads)
    return NullModelComparison(
        original=original,
        replicas=tuple(m for m, _ in outputs),
        discarded=sum(d for _, d in outputs),
    )


def resolve_threads(threads: int | None) -> int:
    """CLI precedence: explicit flag, CONTAGION_LAB_THREADS, then 1."""
    if threads is not None and threads >= 1:
        return threads
    env = os.environ.get("CONTAGION_LAB_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            value = 0
        if value >= 1:
            return value
    return 1


def _parallel_map(fn, tasks, threads: int):
    """Deterministic map: results come back in task order regardless of
    scheduling, so any thread count yields identical output."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        chunk = max(1, len(tasks) // (threads * 4))
        return list(pool.map(fn, tasks, chunksize=chunk))
