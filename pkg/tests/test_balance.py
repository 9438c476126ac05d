import pytest
from hypothesis import given
from hypothesis import strategies as st

from contagion_lab.balance import (
    BalanceSheet,
    BankingSystem,
    ExposureMatrix,
    ValidationError,
    ZeroCapitalError,
    capital,
    leverage,
    net_exposures,
)


def make_system(rows):
    """rows: list of (assets, liabilities, liquid) in cents."""
    sheets = tuple(
        BalanceSheet(bank_id=f"B{i}", total_assets=a, total_liabilities=l, liquid_assets=q)
        for i, (a, l, q) in enumerate(rows)
    )
    return BankingSystem(balance_sheets=sheets, exposures=ExposureMatrix(n=len(rows), entries={}))


class TestCapitalAndLeverage:
    def test_capital_direct_subtraction(self):
        system = make_system([(100, 90, 0)])
        assert capital(system, 0) == 10

    def test_capital_boundary_rejected_at_ingestion(self):
        with pytest.raises(ValidationError, match="non-positive capital"):
            make_system([(100, 100, 0)])

    def test_capital_at_typical_leverage(self):
        # assets = 11 * capital means capital = assets / 11
        system = make_system([(1100, 1000, 0)])
        assert capital(system, 0) == 1100 // 11

    def test_leverage_typical_value(self):
        system = make_system([(110, 100, 0)])
        assert leverage(system, 0) == pytest.approx(11.0)

    def test_leverage_unlevered_bank(self):
        system = make_system([(100, 0, 0)])
        assert leverage(system, 0) == 1.0

    def test_leverage_of_091_liability_ratio(self):
        system = make_system([(100, 91, 0)])
        assert leverage(system, 0) == pytest.approx(100 / 9)

    def test_leverage_rejects_zero_capital(self):
        sheet = BalanceSheet(bank_id="X", total_assets=5, total_liabilities=5, liquid_assets=0)
        bad = object.__new__(BankingSystem)
        object.__setattr__(bad, "balance_sheets", (sheet,))
        with pytest.raises(ZeroCapitalError):
            leverage(bad, 0)

    def test_index_out_of_range(self):
        system = make_system([(100, 90, 0)])
        with pytest.raises(IndexError):
            capital(system, 3)


class TestIngestionInvariants:
    def test_negative_amounts_rejected(self):
        with pytest.raises(ValidationError):
            BalanceSheet(bank_id="X", total_assets=-1, total_liabilities=0, liquid_assets=0)

    def test_liquid_above_total_rejected(self):
        with pytest.raises(ValidationError, match="liquid"):
            BalanceSheet(bank_id="X", total_assets=10, total_liabilities=0, liquid_assets=11)

    def test_self_exposure_rejected(self):
        with pytest.raises(ValidationError, match="self-exposure"):
            ExposureMatrix(n=2, entries={(1, 1): 5})

    def test_zero_exposure_rejected(self):
        with pytest.raises(ValidationError):
            ExposureMatrix(n=2, entries={(0, 1): 0})

    def test_out_of_range_exposure_rejected(self):
        with pytest.raises(ValidationError):
            ExposureMatrix(n=2, entries={(0, 2): 5})

    def test_interbank_assets_bound(self):
        sheets = (
            BalanceSheet(bank_id="A", total_assets=100, total_liabilities=50, liquid_assets=0),
            BalanceSheet(bank_id="B", total_assets=30, total_liabilities=10, liquid_assets=0),
        )
        # bank B is owed 40 but only has 30 of total assets
        with pytest.raises(ValidationError, match="interbank assets"):
            BankingSystem(balance_sheets=sheets, exposures=ExposureMatrix(n=2, entries={(0, 1): 40}))

    def test_interbank_liabilities_bound(self):
        sheets = (
            BalanceSheet(bank_id="A", total_assets=100, total_liabilities=5, liquid_assets=0),
            BalanceSheet(bank_id="B", total_assets=100, total_liabilities=50, liquid_assets=0),
        )
        with pytest.raises(ValidationError, match="interbank liabilities"):
            BankingSystem(balance_sheets=sheets, exposures=ExposureMatrix(n=2, entries={(0, 1): 40}))

    def test_duplicate_bank_id_rejected(self):
        sheets = (
            BalanceSheet(bank_id="A", total_assets=10, total_liabilities=1, liquid_assets=0),
            BalanceSheet(bank_id="A", total_assets=10, total_liabilities=1, liquid_assets=0),
        )
        with pytest.raises(ValidationError, match="duplicate"):
            BankingSystem(balance_sheets=sheets, exposures=ExposureMatrix(n=2, entries={}))

    def test_capital_identity_exact(self):
        system = make_system([(123456789, 100000001, 5)])
        sheet = system.balance_sheets[0]
        assert capital(system, 0) + sheet.total_liabilities == sheet.total_assets


class TestNetting:
    def test_both_directions(self):
        net = net_exposures(ExposureMatrix(n=3, entries={(0, 1): 10, (1, 0): 3}))
        assert net.entries == {(0, 1): 7}

    def test_full_offset(self):
        net = net_exposures(ExposureMatrix(n=2, entries={(0, 1): 5, (1, 0): 5}))
        assert net.entries == {}

    def test_one_sided(self):
        net = net_exposures(ExposureMatrix(n=2, entries={(0, 1): 10}))
        assert net.entries == {(0, 1): 10}

    @given(st.dictionaries(
        st.tuples(st.integers(0, 5), st.integers(0, 5)).filter(lambda p: p[0] != p[1]),
        st.integers(1, 10**9),
        max_size=20,
    ))
    def test_netting_antisymmetric_by_construction(self, entries):
        raw = ExposureMatrix(n=6, entries=entries)
        net = net_exposures(raw)
        for i in range(6):
            for j in range(6):
                if i == j:
                    continue
                lhs = net.entries.get((i, j), 0) - net.entries.get((j, i), 0)
                rhs = entries.get((i, j), 0) - entries.get((j, i), 0)
                assert lhs == rhs
                assert net.entries.get((i, j), 0) <= entries.get((i, j), 0)

    @given(st.dictionaries(
        st.tuples(st.integers(0, 5), st.integers(0, 5)).filter(lambda p: p[0] != p[1]),
        st.integers(1, 10**9),
        max_size=20,
    ))
    def test_netting_idempotent(self, entries):
        once = net_exposures(ExposureMatrix(n=6, entries=entries))
        twice = net_exposures(ExposureMatrix(n=6, entries=dict(once.entries)))
        assert once.entries == twice.entries
