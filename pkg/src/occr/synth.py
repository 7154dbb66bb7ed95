"""Synthetic wallet generators.

Transaction amounts and collateral sizes are Pareto, signs are Bernoulli,
recency is uniform, and loan amounts are uniform below the borrow cap. The
``*_arrays`` variants return raw numpy arrays for the replication harness;
the object variants wrap the same draws in domain types.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from occr.domain import (
    CollateralLeg,
    Direction,
    LoanPosition,
    LoanStatus,
    Transaction,
    WalletHistory,
    DEFAULT_LT_MARGIN,
)

EPOCH = dt.datetime(2024, 1, 1, tzinfo=dt.timezone.utc)
DEFAULT_SPAN_DAYS = 365


@dataclass(frozen=True)
class TxnGenParams:
    p: float
    alpha: float
    x_min: float
    n: int

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError("p must be a probability")
        if not (self.alpha > 1 and self.x_min > 0):
            raise ValueError("need alpha > 1 and x_min > 0")
        if self.n < 0:
            raise ValueError("n must be nonnegative")


@dataclass(frozen=True)
class LoanGenParams:
    alpha: float
    x_min: float
    l_min: float
    l_max: float
    n: int
    s_h: float = 0.0
    p_open: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 1 and self.x_min > 0):
            raise ValueError("need alpha > 1 and x_min > 0")
        if not 0 < self.l_min <= self.l_max <= 1:
            raise ValueError("need 0 < l_min <= l_max <= 1")
        if not (0 <= self.s_h <= 1 and 0 <= self.p_open <= 1):
            raise ValueError("s_h and p_open must be probabilities")
        if self.n < 0:
            raise ValueError("n must be nonnegative")


def pareto_from_uniform(u, alpha: float, x_min: float):
    """Inverse-transform map ``x_min * u**(-1/alpha)`` for ``u`` in (0, 1]."""
    return x_min * np.power(u, -1.0 / alpha)


def sample_pareto(alpha: float, x_min: float, rng: np.random.Generator, size=None):
    # rng.random() is on [0, 1); flip it onto (0, 1] so u never hits zero.
    u = 1.0 - rng.random(size)
    return pareto_from_uniform(u, alpha, x_min)


def transaction_arrays(params: TxnGenParams, rng: np.random.Generator):
    """``(amounts, signs, recency)`` arrays of length ``params.n``."""
    amounts = sample_pareto(params.alpha, params.x_min, rng, params.n)
    signs = np.where(rng.random(params.n) < params.p, 1.0, -1.0)
    recency = rng.random(params.n)
    return amounts, signs, recency


def loan_arrays(params: LoanGenParams, rng: np.random.Generator):
    """``(collateral, ltv, loan, liquidated)`` arrays of length ``params.n``."""
    n = params.n
    collateral = sample_pareto(params.alpha, params.x_min, rng, n)
    ltv = rng.uniform(params.l_min, params.l_max, n)
    # (0, 1] keeps every loan strictly positive.
    loan = (1.0 - rng.random(n)) * ltv * collateral
    liquidated = rng.random(n) < params.s_h
    return collateral, ltv, loan, liquidated


def generate_transactions(
    params: TxnGenParams,
    rng: np.random.Generator,
    start: dt.datetime = EPOCH,
    span_days: int = DEFAULT_SPAN_DAYS,
) -> tuple[Transaction, ...]:
    """Transactions with timestamps placed at ``start + recency * span``.

    The placement makes the file-window recency computed at ingestion
    reproduce the drawn weights up to the window of the whole file.
    """
    amounts, signs, recency = transaction_arrays(params, rng)
    span = dt.timedelta(days=span_days)
    txns = [
        Transaction(
            timestamp=start + span * float(t),
            amount_usd=float(a),
            direction=Direction.CREDIT if s > 0 else Direction.DEBIT,
            recency_weight=float(t),
            tx_id=f"T{i:06d}",
        )
        for i, (a, s, t) in enumerate(zip(amounts, signs, recency))
    ]
    txns.sort(key=lambda tx: tx.timestamp)
    return tuple(txns)


def generate_loans(
    params: LoanGenParams,
    rng: np.random.Generator,
    asset_ids: Sequence[str] = ("ETH",),
    start: dt.date = EPOCH.date(),
    span_days: int = DEFAULT_SPAN_DAYS,
) -> tuple[LoanPosition, ...]:
    collateral, ltv, loan, liquidated = loan_arrays(params, rng)
    n = params.n
    open_at = np.sort(rng.integers(0, span_days, n))
    duration = rng.integers(1, 31, n)
    is_open = rng.random(n) < params.p_open
    asset_idx = rng.integers(0, len(asset_ids), n)
    loans = []
    for j in range(n):
        opened = start + dt.timedelta(days=int(open_at[j]))
        if is_open[j]:
            status, closed = LoanStatus.OPEN, None
        else:
            status = LoanStatus.LIQUIDATED if liquidated[j] else LoanStatus.REPAID
            closed = opened + dt.timedelta(days=int(duration[j]))
        loans.append(LoanPosition(
            loan_id=f"L{j:06d}",
            opened_at=opened,
            status=status,
            loan_usd=float(loan[j]),
            ltv_at_open=float(ltv[j]),
            collaterals=(CollateralLeg(asset_ids[asset_idx[j]], float(collateral[j])),),
            closed_at=closed,
            liquidation_threshold=min(float(ltv[j]) + DEFAULT_LT_MARGIN, 1.0),
        ))
    return tuple(loans)


def generate_wallet(
    txn: TxnGenParams,
    loan: LoanGenParams,
    holdings: float,
    rng: np.random.Generator,
    wallet_id: str = "w0",
    asset_ids: Sequence[str] = ("ETH",),
) -> WalletHistory:
    return WalletHistory(
        wallet_id=wallet_id,
        holdings_usd=float(holdings),
        loans=generate_loans(loan, rng, asset_ids),
        transactions=generate_transactions(txn, rng),
    )
