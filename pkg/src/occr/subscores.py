"""The four closed-form subscores: historical, utilization, transaction, new credit.

Every estimator raises a dedicated error when the wallet carries no evidence
for it; ``occr.aggregate.score_wallet`` substitutes the no-history policy.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from occr.domain import AssetStats, CollateralLeg, LoanPosition, LoanStatus, Transaction
from occr.errors import (
    InsufficientLoans,
    NoEligibleLoans,
    NoTransactions,
    SingleLoan,
    UnknownAsset,
    ZeroSigmaMax,
)


def recency_weight(dt_month: float, k: float) -> float:
    """Logistic recency ``1 / (1 + exp(-(dt - k)))``; 0.5 at the midpoint ``k``."""
    x = dt_month - k
    # Two branches keep exp() from overflowing on either tail.
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def collateral_risk_factor(
    legs: Sequence[CollateralLeg],
    stats: Mapping[str, AssetStats],
    sigma_max: float,
) -> float:
    """Collateral-weighted relative volatility of a loan's collateral, in [0, 1]."""
    if not sigma_max > 0:
        raise ZeroSigmaMax("sigma_max must be positive")
    num = 0.0
    den = 0.0
    for leg in legs:
        try:
            vol = stats[leg.asset_id].annualized_volatility
        except KeyError:
            raise UnknownAsset(leg.asset_id) from None
        num += leg.amount_usd * (vol / sigma_max)
        den += leg.amount_usd
    return num / den


@dataclass(frozen=True)
class HistoricalInputs:
    """Per-closed-loan arrays feeding the weighted liquidation ratio.

    The weight of loan ``j`` is ``loan_usd * (1 - risk_factor) * p * recency``.
    """

    liquidated: np.ndarray
    loan_usd: np.ndarray
    risk_factor: np.ndarray
    liquidation_proportion: np.ndarray
    recency: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.loan_usd * (1.0 - self.risk_factor) * self.liquidation_proportion * self.recency

    @classmethod
    def from_arrays(cls, liquidated, loan_usd, risk_factor, liquidation_proportion, recency):
        arrs = np.broadcast_arrays(
            np.asarray(liquidated, dtype=float),
            np.asarray(loan_usd, dtype=float),
            np.asarray(risk_factor, dtype=float),
            np.asarray(liquidation_proportion, dtype=float),
            np.asarray(recency, dtype=float),
        )
        return cls(*arrs)


def historical_subscore(inputs: HistoricalInputs) -> float:
    w = inputs.weights
    total = float(w.sum()) if w.size else 0.0
    if not total > 0:
        raise NoEligibleLoans("no closed loan carries positive weight")
    return float(np.dot(w, inputs.liquidated) / total)


def month_index(day: dt.date) -> int:
    return day.year * 12 + day.month - 1


def historical_inputs(
    loans: Sequence[LoanPosition],
    stats: Mapping[str, AssetStats],
    sigma_max: float,
    liquidation_proportion: float = 1.0,
    midpoint: float | None = None,
) -> HistoricalInputs:
    """Assemble historical inputs from a wallet's loans.

    Month indices are 0-based from the earliest loan month across *all*
    loans; only closed loans enter the result. The default sigmoid midpoint
    is half the total month span.
    """
    if not loans:
        raise NoEligibleLoans("wallet has no loans")
    months = [month_index(loan.opened_at) for loan in loans]
    first = min(months)
    if midpoint is None:
        midpoint = (max(months) - first) / 2.0
    rows = []
    for loan, m in zip(loans, months):
        if not loan.status.closed:
            continue
        rows.append((
            1.0 if loan.status is LoanStatus.LIQUIDATED else 0.0,
            loan.loan_usd,
            collateral_risk_factor(loan.collaterals, stats, sigma_max),
            recency_weight(m - first, midpoint),
        ))
    if not rows:
        raise NoEligibleLoans("wallet has no closed loans")
    x, amount, r, t = (np.array(col) for col in zip(*rows))
    return HistoricalInputs.from_arrays(x, amount, r, liquidation_proportion, t)


def utilization_subscore(loans: Iterable[LoanPosition]) -> float:
    """Loan-weighted unused borrow headroom ``sum((1 - L/(C*LTV)) * L) / sum(L)``."""
    num = 0.0
    den = 0.0
    for loan in loans:
        cap = loan.collateral_usd * loan.ltv_at_open
        amount = loan.loan_usd
        # Validation allows a 1e-9 relative overshoot of the cap; clip it.
        num += max(0.0, 1.0 - amount / cap) * amount
        den += amount
    if not den > 0:
        raise NoEligibleLoans("no loans for utilization")
    return num / den


def utilization_from_arrays(loan_usd: np.ndarray, cap_usd: np.ndarray) -> float:
    """Vectorized utilization estimator over loan amounts and borrow caps."""
    loan_usd = np.asarray(loan_usd, dtype=float)
    den = loan_usd.sum()
    if not den > 0:
        raise NoEligibleLoans("no loans for utilization")
    return float(((1.0 - loan_usd / cap_usd) * loan_usd).sum() / den)


def transaction_subscore(txns: Iterable[Transaction]) -> float:
    """Recency-weighted net flow over gross flow, in [-1, 1]."""
    txns = list(txns)
    if not txns:
        raise NoTransactions("wallet has no transactions")
    amounts = np.array([tx.amount_usd for tx in txns])
    signs = np.array([tx.direction.sign for tx in txns], dtype=float)
    recency = np.array([tx.recency_weight for tx in txns])
    return transaction_from_arrays(amounts, signs, recency)


def transaction_from_arrays(amounts, signs, recency) -> float:
    amounts = np.asarray(amounts, dtype=float)
    if amounts.size == 0:
        raise NoTransactions("wallet has no transactions")
    return float((amounts * signs * recency).sum() / np.abs(amounts).sum())


def min_loan_gap(dates: Sequence, j: int):
    """Shortest gap from loan ``j`` to an adjacent loan.

    ``dates`` must be sorted. End loans only have one neighbor and use that
    gap. Works for ``datetime.date`` (returns ``timedelta``) and numbers.
    """
    n = len(dates)
    if n < 2:
        raise SingleLoan("gap undefined for fewer than two loans")
    if j == 0:
        return dates[1] - dates[0]
    if j == n - 1:
        return dates[n - 1] - dates[n - 2]
    return min(dates[j] - dates[j - 1], dates[j + 1] - dates[j])


def min_gaps(points: np.ndarray) -> np.ndarray:
    """``min_loan_gap`` for every index of a sorted numeric array at once."""
    points = np.asarray(points, dtype=float)
    if points.shape[-1] < 2:
        raise SingleLoan("gap undefined for fewer than two loans")
    d = np.diff(points, axis=-1)
    left = np.concatenate([d[..., :1], d], axis=-1)
    right = np.concatenate([d, d[..., -1:]], axis=-1)
    return np.minimum(left, right)


def newcredit_subscore(
    amounts: Sequence[float],
    gaps: Sequence[float],
    amount_threshold: float | None = None,
    gap_threshold: float | None = None,
) -> float:
    """Share of loans that are both large and closely spaced.

    A loan counts when ``amount >= amount_threshold`` and
    ``gap <= gap_threshold``; thresholds default to the window means.
    """
    amounts = np.asarray(amounts, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    n = amounts.size
    if n < 2:
        raise InsufficientLoans("need at least two loans in the window")
    mu_l = amounts.mean() if amount_threshold is None else amount_threshold
    mu_d = gaps.mean() if gap_threshold is None else gap_threshold
    flags = (amounts >= mu_l) & (gaps <= mu_d)
    return float(flags.sum() / n)


def newcredit_from_loans(
    loans: Sequence[LoanPosition], as_of: dt.date, window_days: int
) -> float:
    """New-credit subscore over loans opened in ``(as_of - window_days, as_of]``."""
    start = as_of - dt.timedelta(days=window_days)
    recent = [loan for loan in loans if start < loan.opened_at <= as_of]
    if len(recent) < 2:
        raise InsufficientLoans("fewer than two loans in the new-credit window")
    recent.sort(key=lambda loan: loan.opened_at)
    days = np.array([loan.opened_at.toordinal() for loan in recent], dtype=float)
    return newcredit_subscore([loan.loan_usd for loan in recent], min_gaps(days))
