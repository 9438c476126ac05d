import random

import pytest

from contagion_lab.balance import BalanceSheet, BankingSystem, ExposureMatrix


def build_system(capitals, exposures, liquid=None, assets_scale=10):
    """Small helper: banks with given capitals (cents) and raw exposures.

    Total assets are inflated enough that interbank consistency holds; the
    liquid share defaults to zero.
    """
    n = len(capitals)
    totals = {}
    for (i, j), a in exposures.items():
        totals[i] = totals.get(i, 0) + a
        totals[j] = totals.get(j, 0) + a
    sheets = []
    for i, cap in enumerate(capitals):
        base = max(totals.get(i, 0), cap) * assets_scale + cap
        liq = 0 if liquid is None else liquid[i]
        sheets.append(BalanceSheet(
            bank_id=f"B{i:03d}",
            total_assets=base + liq,
            total_liabilities=base + liq - cap,
            liquid_assets=liq,
        ))
    return BankingSystem(balance_sheets=tuple(sheets), exposures=ExposureMatrix(n=n, entries=exposures))


def random_small_system(rng, max_banks=5, with_liquid=False):
    """Random dense-ish weighted digraph with integer-cent balance sheets."""
    n = rng.randint(1, max_banks)
    entries = {}
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < 0.5:
                entries[(i, j)] = rng.randint(1, 2000)
    capitals = [rng.randint(1, 1500) for _ in range(n)]
    liquid = [rng.randint(0, 500) for _ in range(n)] if with_liquid else None
    return build_system(capitals, entries, liquid=liquid)


@pytest.fixture
def small_rng():
    return random.Random(20260810)
