"""On-chain credit risk scoring: subscores, LaR simulation, OCCR aggregation."""

from occr.aggregate import dynamic_ltv, occr_moments, occr_score, score_wallet, score_wallets
from occr.domain import (
    AssetStats,
    CollateralLeg,
    Direction,
    LoanPosition,
    LoanStatus,
    ScoreConfig,
    Transaction,
    WalletHistory,
    WalletScoreReport,
    validate_wallet,
)

__all__ = [
    "AssetStats", "CollateralLeg", "Direction", "LoanPosition", "LoanStatus",
    "ScoreConfig", "Transaction", "WalletHistory", "WalletScoreReport",
    "dynamic_ltv", "occr_moments", "occr_score", "score_wallet", "score_wallets",
    "validate_wallet",
]
