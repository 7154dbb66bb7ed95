"""Domain types for wallets, loans, transactions and scoring configuration.

All monetary amounts are USD floats. Types are frozen; ``validate_wallet``
is the only sanctioned way to turn a raw record into a scored one.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import enum
from dataclasses import dataclass

from occr.errors import (
    BorrowCapViolated,
    InvalidRecord,
    MissingCloseDate,
    NegativeAmount,
)

DEFAULT_WEIGHTS = (0.35, 0.25, 0.15, -0.15, 0.10)
# Default liquidation threshold margin above the opening LTV.
DEFAULT_LT_MARGIN = 0.05
_CAP_RTOL = 1e-9


class LoanStatus(str, enum.Enum):
    REPAID = "repaid"
    LIQUIDATED = "liquidated"
    OPEN = "open"

    @property
    def closed(self) -> bool:
        return self is not LoanStatus.OPEN


class Direction(str, enum.Enum):
    CREDIT = "credit"
    DEBIT = "debit"

    @property
    def sign(self) -> int:
        return 1 if self is Direction.CREDIT else -1


@dataclass(frozen=True)
class CollateralLeg:
    asset_id: str
    amount_usd: float


@dataclass(frozen=True)
class LoanPosition:
    loan_id: str
    opened_at: dt.date
    status: LoanStatus
    loan_usd: float
    ltv_at_open: float
    collaterals: tuple[CollateralLeg, ...]
    closed_at: dt.date | None = None
    liquidation_threshold: float | None = None

    @property
    def collateral_usd(self) -> float:
        return sum(leg.amount_usd for leg in self.collaterals)

    @property
    def threshold(self) -> float:
        if self.liquidation_threshold is not None:
            return self.liquidation_threshold
        return min(self.ltv_at_open + DEFAULT_LT_MARGIN, 1.0)


@dataclass(frozen=True)
class Transaction:
    timestamp: dt.datetime
    amount_usd: float
    direction: Direction
    recency_weight: float = 1.0
    tx_id: str = ""


@dataclass(frozen=True)
class WalletHistory:
    wallet_id: str
    holdings_usd: float
    loans: tuple[LoanPosition, ...] = ()
    transactions: tuple[Transaction, ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.loans and not self.transactions

    @property
    def open_loans(self) -> tuple[LoanPosition, ...]:
        return tuple(loan for loan in self.loans if loan.status is LoanStatus.OPEN)

    @property
    def closed_loans(self) -> tuple[LoanPosition, ...]:
        return tuple(loan for loan in self.loans if loan.status.closed)


@dataclass(frozen=True)
class AssetStats:
    asset_id: str
    annualized_volatility: float
    spot_price_usd: float
    drift: float = 0.0

    def __post_init__(self):
        if self.annualized_volatility < 0:
            raise NegativeAmount(self.asset_id, "annualized_volatility < 0")
        if self.spot_price_usd <= 0:
            raise NegativeAmount(self.asset_id, "spot_price_usd <= 0")


@dataclass(frozen=True)
class ScoreConfig:
    """Scoring parameters.

    ``weights`` apply to ``(s_h, s_c, 1 - s_cu, s_ct, s_nc)`` in that order.
    ``sigmoid_midpoint``, ``default_score``, ``sigma_max`` and ``as_of`` are
    derived from the data when left as ``None``.
    """

    weights: tuple[float, float, float, float, float] = DEFAULT_WEIGHTS
    liquidation_proportion: float = 1.0
    sigmoid_midpoint: float | None = None
    sim_batch_size: int = 2000
    sim_epsilon: float = 1e-4
    sim_max_batches: int = 500
    sim_horizon_days: int = 30
    sim_steps_per_day: int = 1
    rng_seed: int = 0
    ltv_fixed: float = 0.75
    ltv_alpha: float = 0.5
    ltv_cap: float = 0.90
    occr_avg: float = 0.5
    default_score: float | None = None
    new_credit_window_days: int = 30
    sigma_max: float | None = None
    as_of: dt.date | None = None

    def __post_init__(self):
        if len(self.weights) != 5:
            raise ValueError("weights must have five entries")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not 0 < self.liquidation_proportion <= 1:
            raise ValueError("liquidation_proportion must be in (0, 1]")
        if self.sim_epsilon <= 0:
            raise ValueError("sim_epsilon must be positive")
        for name in ("sim_batch_size", "sim_max_batches", "sim_horizon_days",
                     "sim_steps_per_day", "new_credit_window_days"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")
        if not 0 < self.ltv_fixed < 1:
            raise ValueError("ltv_fixed must be in (0, 1)")
        if not 0 < self.ltv_cap <= 1 or self.ltv_cap < self.ltv_fixed:
            raise ValueError("ltv_cap must be in (0, 1] and >= ltv_fixed")
        if self.ltv_alpha < 0:
            raise ValueError("ltv_alpha must be nonnegative")
        if self.default_score is not None and not 0 <= self.default_score <= 1:
            raise ValueError("default_score must be in [0, 1]")

    def replace(self, **changes) -> ScoreConfig:
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class WalletScoreReport:
    wallet_id: str
    s_h: float
    s_c: float
    s_cu: float
    s_ct: float
    s_nc: float
    occr: float
    occr_raw: float
    ltv_offer: float
    sim_paths_used: int = 0
    sim_converged: bool = True

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _check_loan(loan: LoanPosition) -> LoanPosition:
    lid = loan.loan_id
    if not loan.loan_usd > 0:
        raise NegativeAmount(lid, "loan_usd must be positive")
    if not loan.collaterals:
        raise InvalidRecord(lid, "loan has no collateral legs")
    for leg in loan.collaterals:
        if not leg.amount_usd > 0:
            raise NegativeAmount(lid, f"collateral {leg.asset_id} amount must be positive")
    if not 0 < loan.ltv_at_open <= 1:
        raise InvalidRecord(lid, "ltv_at_open must be in (0, 1]")
    if loan.status.closed:
        if loan.closed_at is None:
            raise MissingCloseDate(lid, f"{loan.status.value} loan has no closed_at")
        if loan.closed_at < loan.opened_at:
            raise InvalidRecord(lid, "closed_at precedes opened_at")
    elif loan.closed_at is not None:
        raise InvalidRecord(lid, "open loan has closed_at")
    cap = loan.ltv_at_open * loan.collateral_usd
    if loan.loan_usd > cap * (1 + _CAP_RTOL):
        raise BorrowCapViolated(lid, f"loan {loan.loan_usd:g} exceeds borrow cap {cap:g}")
    lt = loan.threshold
    if not 0 < lt <= 1 or lt < loan.ltv_at_open:
        raise InvalidRecord(lid, "liquidation_threshold must be in (0, 1] and >= ltv_at_open")
    if loan.liquidation_threshold is None:
        loan = dataclasses.replace(loan, liquidation_threshold=lt)
    return loan


def _check_transaction(wallet_id: str, idx: int, tx: Transaction) -> None:
    tid = tx.tx_id or f"{wallet_id}#tx{idx}"
    if not tx.amount_usd > 0:
        raise NegativeAmount(tid, "transaction amount must be positive")
    if not 0 <= tx.recency_weight <= 1:
        raise InvalidRecord(tid, "recency_weight must be in [0, 1]")


def validate_wallet(raw: WalletHistory) -> WalletHistory:
    """Check every invariant and return the wallet with records sorted.

    Loans are ordered by ``(opened_at, loan_id)`` and transactions by
    timestamp; both sorts are stable, so the function is idempotent.
    Missing liquidation thresholds are filled with the default margin.
    """
    if not raw.holdings_usd >= 0:
        raise NegativeAmount(raw.wallet_id, "holdings_usd must be nonnegative")
    seen: set[str] = set()
    loans = []
    for loan in raw.loans:
        if loan.loan_id in seen:
            raise InvalidRecord(loan.loan_id, "duplicate loan_id")
        seen.add(loan.loan_id)
        loans.append(_check_loan(loan))
    for i, tx in enumerate(raw.transactions):
        _check_transaction(raw.wallet_id, i, tx)
    loans.sort(key=lambda loan: (loan.opened_at, loan.loan_id))
    txns = sorted(raw.transactions, key=lambda tx: tx.timestamp)
    return dataclasses.replace(raw, loans=tuple(loans), transactions=tuple(txns))

