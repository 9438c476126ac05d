"""Core domain types: bank balance sheets and the interbank exposure matrix.

All currency amounts are stored as integer euro cents so that netting and
cascade trigger comparisons are exact; floats appear only in derived
statistics (leverage, extents, ...).
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ValidationError(ValueError):
    """An ingested system violates a balance-sheet or exposure invariant."""


class ZeroCapitalError(ValueError):
    """Leverage requested for a bank with non-positive capital."""


@dataclass(frozen=True)
class BalanceSheet:
    """Per-bank totals, in integer cents.

    total_assets and total_liabilities include the non-interbank side;
    liquid_assets is the cash-like subset of total_assets.
    """

    bank_id: str
    total_assets: int
    total_liabilities: int
    liquid_assets: int

    def __post_init__(self):
        for name in ("total_assets", "total_liabilities", "liquid_assets"):
            value = getattr(self, name)
            if not isinstance(value, int):
                raise TypeError(f"{name} must be an integer amount of cents, got {type(value).__name__}")
            if value < 0:
                raise ValidationError(f"bank {self.bank_id!r}: {name} is negative ({value})")
        if self.liquid_assets > self.total_assets:
            raise ValidationError(
                f"bank {self.bank_id!r}: liquid assets ({self.liquid_assets}) exceed total assets ({self.total_assets})"
            )

    @property
    def capital(self) -> int:
        return self.total_assets - self.total_liabilities


@dataclass(frozen=True)
class ExposureMatrix:
    """Sparse directed exposures: entries[(i, j)] is what bank i owes bank j.

    Amounts are positive integer cents; absent pairs mean no exposure.
    """

    n: int
    entries: dict[tuple[int, int], int]

    def __post_init__(self):
        for (i, j), amount in self.entries.items():
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValidationError(f"exposure ({i}, {j}) outside bank range [0, {self.n})")
            if i == j:
                raise ValidationError(f"self-exposure at bank {i}")
            if not isinstance(amount, int) or amount <= 0:
                raise ValidationError(f"exposure ({i}, {j}) must be a positive integer amount, got {amount!r}")

    def interbank_liabilities(self, i: int) -> int:
        """Total the bank owes into the interbank market."""
        return sum(a for (b, _), a in self.entries.items() if b == i)

    def interbank_assets(self, i: int) -> int:
        """Total the bank has lent into the interbank market."""
        return sum(a for (_, l), a in self.entries.items() if l == i)


@dataclass(frozen=True)
class NetExposureMatrix:
    """Pairwise-netted exposures: at most one direction per pair is positive."""

    n: int
    entries: dict[tuple[int, int], int]

    def __post_init__(self):
        for (i, j), amount in self.entries.items():
            if amount <= 0:
                raise ValidationError(f"net exposure ({i}, {j}) must be positive, got {amount}")
            if (j, i) in self.entries:
                raise ValidationError(f"net exposures ({i}, {j}) and ({j}, {i}) are both present")


@dataclass(frozen=True)
class BankingSystem:
    """Immutable bundle of balance sheets plus the exposure matrix.

    Construction enforces the ingestion invariants: positive capital for
    every bank and interbank totals consistent with balance-sheet totals.
    Safe to share across concurrent simulation workers.
    """

    balance_sheets: tuple[BalanceSheet, ...]
    exposures: ExposureMatrix
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sheets = tuple(self.balance_sheets)
        object.__setattr__(self, "balance_sheets", sheets)
        if self.exposures.n != len(sheets):
            raise ValidationError(
                f"exposure matrix is for {self.exposures.n} banks but {len(sheets)} balance sheets given"
            )
        index = {}
        for pos, sheet in enumerate(sheets):
            if sheet.bank_id in index:
                raise ValidationError(f"duplicate bank id {sheet.bank_id!r}")
            index[sheet.bank_id] = pos
            if sheet.capital <= 0:
                raise ValidationError(
                    f"bank {sheet.bank_id!r} has non-positive capital ({sheet.capital} cents); "
                    "already-insolvent banks are rejected at ingestion"
                )
        object.__setattr__(self, "_index", index)

        ib_assets = [0] * len(sheets)
        ib_liabilities = [0] * len(sheets)
        for (i, j), amount in self.exposures.entries.items():
            ib_liabilities[i] += amount
            ib_assets[j] += amount
        for pos, sheet in enumerate(sheets):
            if ib_assets[pos] > sheet.total_assets:
                raise ValidationError(
                    f"bank {sheet.bank_id!r}: interbank assets ({ib_assets[pos]}) exceed total assets "
                    f"({sheet.total_assets})"
                )
            if ib_liabilities[pos] > sheet.total_liabilities:
                raise ValidationError(
                    f"bank {sheet.bank_id!r}: interbank liabilities ({ib_liabilities[pos]}) exceed total "
                    f"liabilities ({sheet.total_liabilities})"
                )

    @property
    def n(self) -> int:
        return len(self.balance_sheets)

    def index_of(self, bank_id: str) -> int:
        return self._index[bank_id]


def capital(system: BankingSystem, i: int) -> int:
    """Equity of bank i in cents: total assets minus total liabilities."""
    return system.balance_sheets[i].capital


def leverage(system: BankingSystem, i: int) -> float:
    """Total assets over equity; raises ZeroCapitalError for capital <= 0."""
    sheet = system.balance_sheets[i]
    cap = sheet.capital
    if cap <= 0:
        raise ZeroCapitalError(f"bank {sheet.bank_id!r} has capital {cap} <= 0")
    return sheet.total_assets / cap


def net_exposures(exposures: ExposureMatrix) -> NetExposureMatrix:
    """Apply pairwise netting: net(i, j) = max(0, L(i, j) - L(j, i))."""
    entries = {}
    for (i, j), amount in exposures.entries.items():
        net = amount - exposures.entries.get((j, i), 0)
        if net > 0:
            entries[(i, j)] = net
    return NetExposureMatrix(n=exposures.n, entries=entries)
