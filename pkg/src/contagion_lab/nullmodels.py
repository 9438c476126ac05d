"""Reference ensembles: Erdos-Renyi graphs and degree-preserving rewirings.

Rewiring randomizes the directed exposure structure with double-edge swaps
while keeping every bank's in- and out-degree. Loan amounts are not free:
depending on the contagion channel under study, the weight of a rewired
link stays either with the bank holding it as an asset (the lender) or
with the bank using it as funding (the borrower). Balance-sheet totals are
untouched so every bank keeps its original equity; the implied non-interbank
remainder absorbs the recomposition, and a replica whose interbank totals
no longer fit inside the balance-sheet totals is infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .balance import BankingSystem, ExposureMatrix, ValidationError
from .randomness import make_rng

ASSET_SIDE = "asset_side"
LIABILITY_SIDE = "liability_side"


class InfeasibleAdjustment(RuntimeError):
    """Equity matching would force a negative implied balance-sheet entry."""


@dataclass(frozen=True)
class RewiringPolicy:
    retention: str  # ASSET_SIDE or LIABILITY_SIDE
    swap_budget: int
    rng_seed: int

    def __post_init__(self):
        if self.retention not in (ASSET_SIDE, LIABILITY_SIDE):
            raise ValueError(f"unknown retention policy {self.retention!r}")
        if self.swap_budget < 0:
            raise ValueError("swap_budget must be >= 0")


def default_swap_budget(system: BankingSystem) -> int:
    """Standard mixing heuristic: ten attempted swaps per directed edge."""
    return 10 * len(system.exposures.entries)


def erdos_renyi(n: int, avg_degree: float, directed: bool, rng_seed: int) -> np.ndarray:
    """Independent edge coin-flips at p = avg_degree/(n-1).

    The directed variant draws the undirected graph and assigns each link
    a random direction.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 <= avg_degree <= n - 1:
        raise ValueError(f"avg_degree must be in [0, {n - 1}], got {avg_degree}")
    rng = make_rng(rng_seed)
    p = avg_degree / (n - 1)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    if not directed:
        return upper | upper.T
    orient = rng.random((n, n)) < 0.5
    adj = np.zeros((n, n), dtype=bool)
    ii, jj = np.nonzero(upper)
    forward = orient[ii, jj]
    adj[ii[forward], jj[forward]] = True
    adj[jj[~forward], ii[~forward]] = True
    return adj


def _attempt_rewire(system: BankingSystem, policy: RewiringPolicy, attempt: int) -> BankingSystem:
    edges = sorted(system.exposures.entries.items())
    m = len(edges)
    src = [i for (i, _), _ in edges]
    dst = [j for (_, j), _ in edges]
    weight = [w for _, w in edges]
    present = {(i, j) for (i, j), _ in edges}
    rng = make_rng(policy.rng_seed, attempt)

    if m >= 2:
        picks = rng.integers(0, m, size=(policy.swap_budget, 2)).tolist()
        for e1, e2 in picks:
            if e1 == e2:
                continue
            a, b = src[e1], dst[e1]
            c, d = src[e2], dst[e2]
            if a == d or c == b:
                continue  # would create a self-loop
            if (a, d) in present or (c, b) in present:
                continue  # would create a duplicate directed edge
            present.discard((a, b))
            present.discard((c, d))
            present.add((a, d))
            present.add((c, b))
            dst[e1], dst[e2] = d, b
            if policy.retention == ASSET_SIDE:
                # lenders keep their loan amounts: weights travel with dst
                weight[e1], weight[e2] = weight[e2], weight[e1]
            # liability_side: borrowers keep funding, weights stay with src

    entries = {(src[k], dst[k]): weight[k] for k in range(m)}
    try:
        return BankingSystem(
            balance_sheets=system.balance_sheets,
            exposures=ExposureMatrix(n=system.n, entries=entries),
        )
    except ValidationError as exc:
        raise InfeasibleAdjustment(str(exc)) from exc


def rewire(system: BankingSystem, policy: RewiringPolicy) -> BankingSystem:
    """One rewired replica; raises InfeasibleAdjustment if it does not fit."""
    return _attempt_rewire(system, policy, attempt=0)


def generate_replica(system: BankingSystem, retention: str, swap_budget: int,
                     base_seed: int, replica_index: int,
                     max_attempts: int = 100) -> tuple[BankingSystem, int]:
    """Rewire with resampling on infeasibility.

    Returns (replica, discarded) where discarded counts the infeasible
    attempts that were thrown away before one fit. Aborts after
    max_attempts so silently biased ensembles cannot happen.
    """
    seed_seq = np.random.SeedSequence(entropy=base_seed, spawn_key=(replica_index,))
    derived = int(seed_seq.generate_state(1, dtype=np.uint64)[0])
    for attempt in range(max_attempts):
        policy = RewiringPolicy(retention=retention, swap_budget=swap_budget, rng_seed=derived)
        try:
            return _attempt_rewire(system, policy, attempt), attempt
        except InfeasibleAdjustment:
            continue
    raise InfeasibleAdjustment(
        f"replica {replica_index}: no feasible rewiring in {max_attempts} attempts"
    )
