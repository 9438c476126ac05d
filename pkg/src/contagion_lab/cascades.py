"""Contagion protocols over a banking system.

Four stress protocols, all run as synchronous-round fixed points over a
per-run CascadeState:

* counterparty loss: a failed borrower's net creditors write the loan off
  in full (zero recovery) and fail when losses exceed capital;
* roll-over risk: a hoarding lender's net borrowers lose that funding and
  start hoarding when the shortfall exceeds liquid assets plus a fraction
  f of their illiquid assets;
* exogenous common-asset shock: every bank holds a fraction c of its
  assets in one common asset whose price drops by phi, optionally followed
  by counterparty rounds on the weakened survivors;
* endogenous fire sale: a failing bank's portfolio liquidation devalues
  the common asset in proportion to the bank's share of system assets,
  coupling the asset channel with counterparty loss.

Rounds are synchronous: every bank is evaluated against the previous
round's failure flags, so results are independent of iteration order. All
trigger comparisons are exact. Counterparty and roll-over losses are sums
of integer cents; the common-asset terms are rationals, compared via a
vectorized float screen whose ambiguous cases are resolved with exact
integer cross-multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .balance import BankingSystem, NetExposureMatrix

# Relative width of the float screen around a trigger threshold. Comparisons
# landing within the band are re-done in exact integer arithmetic, so the
# value only affects speed, never results.
_SCREEN = 1e-9


@dataclass
class CascadeState:
    """Mutable per-run state owned by exactly one worker.

    status flags are monotone: a triggered bank never untriggers, and the
    asset-price devaluation never decreases.
    """

    status: np.ndarray  # bool per bank, True once triggered
    round: int
    asset_price_devaluation: Fraction
    cumulative_loss: np.ndarray  # int64 cents per bank


@dataclass(frozen=True)
class CascadeResult:
    """Outcome of one cascade run.

    affected excludes the seed: it is the set of banks triggered as a
    response to the initial perturbation. seed is None for exogenous-shock
    runs. final_devaluation is the common-asset price drop (0 when the run
    had no asset channel).
    """

    seed: int | None
    affected: frozenset[int]
    rounds: int
    final_devaluation: float


@dataclass(frozen=True)
class ShockParams:
    """Common-asset shock configuration.

    c: fraction of each balance sheet held in the common asset.
    phi: exogenous devaluation of that asset.
    f: short-term liquidation fraction for the roll-over trigger.
    with_counterparty: whether counterparty rounds follow an asset shock.
    """

    c: float = 0.0
    phi: float = 0.0
    f: float = 0.0
    with_counterparty: bool = True

    def __post_init__(self):
        for name in ("c", "phi", "f"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


class CompiledSystem:
    """Immutable arrays shared by every cascade run on one (system, net) pair.

    Adjacency is stored twice, keyed by borrower and by lender, so that a
    newly triggered bank's contribution to the next round's losses is one
    fancy-indexed add.
    """

    def __init__(self, system: BankingSystem, net: NetExposureMatrix):
        n = system.n
        self.n = n
        self.capital = np.array([s.capital for s in system.balance_sheets], dtype=np.int64)
        self.assets = np.array([s.total_assets for s in system.balance_sheets], dtype=np.int64)
        self.liquid = np.array([s.liquid_assets for s in system.balance_sheets], dtype=np.int64)
        self.total_assets_sum = int(self.assets.sum())

        by_borrower: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        by_lender: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for (i, j), amount in net.entries.items():
            # i owes j: j is the lender holding the asset, i holds the funding
            by_borrower[i].append((j, amount))
            by_lender[j].append((i, amount))
        self.lenders_of = [np.array([t for t, _ in rows], dtype=np.intp) for rows in by_borrower]
        self.lender_amounts = [np.array([a for _, a in rows], dtype=np.int64) for rows in by_borrower]
        self.borrowers_of = [np.array([t for t, _ in rows], dtype=np.intp) for rows in by_lender]
        self.borrower_amounts = [np.array([a for _, a in rows], dtype=np.int64) for rows in by_lender]


def compile_system(system: BankingSystem, net: NetExposureMatrix) -> CompiledSystem:
    """Precompute the cascade arrays once; reuse across many runs."""
    return CompiledSystem(system, net)


def _check_seed(compiled: CompiledSystem, seed: int):
    if not 0 <= seed < compiled.n:
        raise IndexError(f"seed {seed} out of range for {compiled.n} banks")


def _counterparty_fixed_point(compiled: CompiledSystem, seed: int):
    """Pure counterparty loss: fail when capital < sum of loans to failed banks."""
    failed = np.zeros(compiled.n, dtype=bool)
    failed[seed] = True
    loss = np.zeros(compiled.n, dtype=np.int64)
    frontier = [seed]
    rounds = 0
    while True:
        rounds += 1
        for b in frontier:
            loss[compiled.lenders_of[b]] += compiled.lender_amounts[b]
        newly = (compiled.capital < loss) & ~failed
        if not newly.any():
            break
        failed |= newly
        frontier = np.flatnonzero(newly)
    return failed, rounds


def counterparty_cascade(system: BankingSystem, net: NetExposureMatrix, seed: int) -> CascadeResult:
    """Shut down the seed bank and propagate counterparty losses to a fixed point."""
    compiled = compile_system(system, net)
    return counterparty_cascade_compiled(compiled, seed)


def counterparty_cascade_compiled(compiled: CompiledSystem, seed: int) -> CascadeResult:
    _check_seed(compiled, seed)
    failed, rounds = _counterparty_fixed_point(compiled, seed)
    failed[seed] = False
    return CascadeResult(seed=seed, affected=frozenset(np.flatnonzero(failed).tolist()),
                         rounds=rounds, final_devaluation=0.0)


def rollover_cascade(system: BankingSystem, net: NetExposureMatrix, seed: int, f: float) -> CascadeResult:
    """Stop rolling over the seed's interbank lending and propagate hoarding."""
    compiled = compile_system(system, net)
    return rollover_cascade_compiled(compiled, seed, f)


def rollover_cascade_compiled(compiled: CompiledSystem, seed: int, f: float) -> CascadeResult:
    _check_seed(compiled, seed)
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"f must be in [0, 1], got {f}")
    pf, qf = float(f).as_integer_ratio()

    hoarding = np.zeros(compiled.n, dtype=bool)
    hoarding[seed] = True
    funding_loss = np.zeros(compiled.n, dtype=np.int64)

    if qf == 1:
        # f is exactly 0 or 1: thresholds are plain integer cents
        threshold = compiled.liquid + pf * (compiled.assets - compiled.liquid)

        def newly_hoarding():
            return (funding_loss > threshold) & ~hoarding
    else:
        # hoard iff loss > liq + f*(tot - liq); cross-multiplied by qf this is
        # loss*qf > liq*qf + pf*(tot - liq), exact in unbounded ints
        numerators = [
            int(liq) * qf + pf * (int(tot) - int(liq))
            for liq, tot in zip(compiled.liquid, compiled.assets)
        ]
        thr_f = compiled.liquid + f * (compiled.assets - compiled.liquid)

        def newly_hoarding():
            loss_f = funding_loss.astype(np.float64)
            band = _SCREEN * (np.abs(loss_f) + np.abs(thr_f) + 1.0)
            out = (loss_f > thr_f + band) & ~hoarding
            unsure = np.flatnonzero((np.abs(loss_f - thr_f) <= band) & ~hoarding)
            for i in unsure:
                if int(funding_loss[i]) * qf > numerators[i]:
                    out[i] = True
            return out

    frontier = [seed]
    rounds = 0
    while True:
        rounds += 1
        for l in frontier:
            funding_loss[compiled.borrowers_of[l]] += compiled.borrower_amounts[l]
        newly = newly_hoarding()
        if not newly.any():
            break
        hoarding |= newly
        frontier = np.flatnonzero(newly)

    hoarding[seed] = False
    return CascadeResult(seed=seed, affected=frozenset(np.flatnonzero(hoarding).tolist()),
                         rounds=rounds, final_devaluation=0.0)


def _asset_loss_failures(compiled, residual_f, residual_int, alive, assets_f, num, den):
    """Banks with residual capital < assets * num/den, exactly.

    residual_f/assets_f are float views used as a screen; comparisons within
    the band are resolved via residual*den < assets*num in unbounded ints.
    """
    rhs = assets_f * (num / den)
    band = _SCREEN * (np.abs(residual_f) + rhs + 1.0)
    out = (residual_f < rhs - band) & alive
    unsure = np.flatnonzero((np.abs(residual_f - rhs) <= band) & alive)
    for i in unsure:
        if residual_int(i) * den < int(compiled.assets[i]) * num:
            out[i] = True
    return out


def exogenous_shock(system: BankingSystem, net: NetExposureMatrix, params: ShockParams) -> CascadeResult:
    """Depreciate the common asset once by c*phi, then optionally let
    counterparty loss propagate among the weakened survivors."""
    compiled = compile_system(system, net)
    return exogenous_shock_compiled(compiled, params)


def exogenous_shock_compiled(compiled: CompiledSystem, params: ShockParams) -> CascadeResult:
    shock = Fraction(params.c) * Fraction(params.phi)
    num, den = shock.numerator, shock.denominator

    failed = np.zeros(compiled.n, dtype=bool)
    loss = np.zeros(compiled.n, dtype=np.int64)
    capital_f = compiled.capital.astype(np.float64)
    assets_f = compiled.assets.astype(np.float64)

    # round 1: the shock itself, capital < assets * c * phi
    direct = _asset_loss_failures(
        compiled, capital_f, lambda i: int(compiled.capital[i]), ~failed, assets_f, num, den
    )
    rounds = 1
    if direct.any():
        failed |= direct
        if params.with_counterparty:
            frontier = np.flatnonzero(direct)
            while True:
                rounds += 1
                for b in frontier:
                    loss[compiled.lenders_of[b]] += compiled.lender_amounts[b]
                newly = _asset_loss_failures(
                    compiled,
                    capital_f - loss.astype(np.float64),
                    lambda i: int(compiled.capital[i]) - int(loss[i]),
                    ~failed,
                    assets_f,
                    num,
                    den,
                )
                if not newly.any():
                    break
                failed |= newly
                frontier = np.flatnonzero(newly)

    return CascadeResult(seed=None, affected=frozenset(np.flatnonzero(failed).tolist()),
                         rounds=rounds, final_devaluation=params.phi)


def fire_sale_cascade(system: BankingSystem, net: NetExposureMatrix, seed: int, c: float,
                      with_counterparty: bool = True) -> CascadeResult:
    """Liquidate the seed and let devaluation and counterparty loss interact.

    Each failure devalues the common asset by the bank's share of system
    assets; a bank fails when capital < assets*c*devaluation plus (unless
    with_counterparty is False) its counterparty losses.
    """
    compiled = compile_system(system, net)
    return fire_sale_cascade_compiled(compiled, seed, c, with_counterparty)


def fire_sale_cascade_compiled(compiled: CompiledSystem, seed: int, c: float,
                               with_counterparty: bool = True) -> CascadeResult:
    _check_seed(compiled, seed)
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"c must be in [0, 1], got {c}")
    pc, qc = float(c).as_integer_ratio()
    s_tot = compiled.total_assets_sum

    failed = np.zeros(compiled.n, dtype=bool)
    failed[seed] = True
    loss = np.zeros(compiled.n, dtype=np.int64)
    capital_f = compiled.capital.astype(np.float64)
    assets_f = compiled.assets.astype(np.float64)
    liquidated = 0  # cents of failed banks' assets, drives the devaluation

    frontier = [seed]
    rounds = 0
    while True:
        rounds += 1
        for b in frontier:
            if with_counterparty:
                loss[compiled.lenders_of[b]] += compiled.lender_amounts[b]
            liquidated += int(compiled.assets[b])
        s_failed = min(liquidated, s_tot)
        # fail iff capital - cp_loss < assets * c * (s_failed / s_tot)
        num = pc * s_failed
        den = qc * s_tot
        if with_counterparty:
            newly = _asset_loss_failures(
                compiled,
                capital_f - loss.astype(np.float64),
                lambda i: int(compiled.capital[i]) - int(loss[i]),
                ~failed,
                assets_f,
                num,
                den,
            )
        else:
            newly = _asset_loss_failures(
                compiled, capital_f, lambda i: int(compiled.capital[i]), ~failed, assets_f, num, den
            )
        if not newly.any():
            break
        failed |= newly
        frontier = np.flatnonzero(newly)

    devaluation = min(Fraction(liquidated, s_tot), Fraction(1)) if s_tot > 0 else Fraction(0)
    failed[seed] = False
    return CascadeResult(seed=seed, affected=frozenset(np.flatnonzero(failed).tolist()),
                         rounds=rounds, final_devaluation=float(devaluation))
