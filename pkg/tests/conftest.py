import datetime as dt

import pytest
from hypothesis import settings

from occr.domain import (
    AssetStats,
    CollateralLeg,
    Direction,
    LoanPosition,
    LoanStatus,
    Transaction,
    WalletHistory,
)

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

D0 = dt.date(2024, 1, 1)
T0 = dt.datetime(2024, 1, 1, tzinfo=dt.timezone.utc)


def make_loan(loan_id="L1", loan=50.0, collateral=100.0, ltv=0.8, status="repaid",
              opened=D0, closed=None, asset="ETH", lt=None):
    status = LoanStatus(status)
    if status.closed and closed is None:
        closed = opened + dt.timedelta(days=10)
    return LoanPosition(
        loan_id=loan_id,
        opened_at=opened,
        status=status,
        loan_usd=loan,
        ltv_at_open=ltv,
        collaterals=(CollateralLeg(asset, collateral),),
        closed_at=closed if status.closed else None,
        liquidation_threshold=lt,
    )


def make_tx(amount, credit=True, recency=1.0, when=T0, tx_id=""):
    return Transaction(when, amount, Direction.CREDIT if credit else Direction.DEBIT, recency, tx_id)


@pytest.fixture
def stats():
    return {
        "ETH": AssetStats("ETH", 0.8, 3000.0),
        "USDC": AssetStats("USDC", 0.0, 1.0),
        "WBTC": AssetStats("WBTC", 0.5, 60000.0),
    }


@pytest.fixture
def empty_wallet():
    return WalletHistory("empty", 100.0)
