"""OCCR score assembly, its asymptotic moments, and dynamic LTV quotes."""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Mapping, Sequence

from occr.domain import AssetStats, ScoreConfig, WalletHistory, WalletScoreReport
from occr.errors import (
    InsufficientLoans,
    NoEligibleLoans,
    NoOpenPositions,
    NoTransactions,
    ZeroSigmaMax,
)
from occr.larsim import current_subscore
from occr.oracle import MomentPair
from occr.rng import ordered_map
from occr import subscores

FALLBACK_SCORE = 0.5


@dataclass(frozen=True)
class SubscoreVector:
    s_h: float
    s_c: float
    s_cu: float
    s_ct: float
    s_nc: float

    def components(self) -> tuple[float, float, float, float, float]:
        """Values multiplied by the weights: utilization enters as headroom ``1 - s_cu``."""
        return (self.s_h, self.s_c, 1.0 - self.s_cu, self.s_ct, self.s_nc)


@dataclass(frozen=True)
class OccrMoments:
    mean: float
    variance: float


def occr_score(v: SubscoreVector, cfg: ScoreConfig = ScoreConfig()) -> tuple[float, float]:
    """Return ``(occr_raw, occr)`` where ``occr`` is clamped to [0, 1]."""
    raw = sum(w * c for w, c in zip(cfg.weights, v.components()))
    return raw, min(max(raw, 0.0), 1.0)


def occr_moments(components: Sequence[MomentPair], cfg: ScoreConfig = ScoreConfig()) -> OccrMoments:
    """Weighted mean and variance of independent components.

    ``components`` are the moments of ``(s_h, s_c, 1 - s_cu, s_ct, s_nc)``.
    """
    if len(components) != 5:
        raise ValueError("expected five component moments")
    mean = sum(w * c.mean for w, c in zip(cfg.weights, components))
    var = sum(w * w * c.variance for w, c in zip(cfg.weights, components))
    return OccrMoments(mean, var)


def ltv_adjustment(occr_t: float, cfg: ScoreConfig) -> float:
    return cfg.ltv_alpha * (occr_t - cfg.occr_avg)


def dynamic_ltv(occr_t: float, cfg: ScoreConfig) -> float:
    """LTV offer: better-than-average scores raise the base LTV up to the cap."""
    f = ltv_adjustment(occr_t, cfg)
    return min(cfg.ltv_fixed - min(f, 0.0), cfg.ltv_cap)


def universe_sigma_max(stats: Mapping[str, AssetStats], cfg: ScoreConfig) -> float:
    if cfg.sigma_max is not None:
        return cfg.sigma_max
    return max((a.annualized_volatility for a in stats.values()), default=0.0)


def _latest_event(wallet: WalletHistory) -> dt.date | None:
    days = [loan.opened_at for loan in wallet.loans]
    days += [loan.closed_at for loan in wallet.loans if loan.closed_at is not None]
    days += [tx.timestamp.date() for tx in wallet.transactions]
    return max(days, default=None)


def _empty_report(wallet: WalletHistory, score: float, cfg: ScoreConfig) -> WalletScoreReport:
    return WalletScoreReport(
        wallet_id=wallet.wallet_id,
        s_h=score, s_c=0.0, s_cu=0.0, s_ct=0.0, s_nc=0.0,
        occr=score, occr_raw=score,
        ltv_offer=dynamic_ltv(score, cfg),
        sim_paths_used=0, sim_converged=True,
    )


def score_wallet(
    wallet: WalletHistory,
    stats: Mapping[str, AssetStats],
    cfg: ScoreConfig = ScoreConfig(),
) -> WalletScoreReport:
    """Score one validated wallet.

    Subscores without evidence fall back to: ``s_h`` = default score,
    ``s_c`` = ``s_cu`` = ``s_ct`` = ``s_nc`` = 0. A wallet with no loans and no
    transactions gets the default score as its OCCR directly.
    """
    default = cfg.default_score if cfg.default_score is not None else FALLBACK_SCORE
    if wallet.is_empty:
        return _empty_report(wallet, default, cfg)

    sigma_max = universe_sigma_max(stats, cfg)
    try:
        if wallet.closed_loans and not sigma_max > 0:
            raise ZeroSigmaMax("asset universe has no positive volatility")
        hist = subscores.historical_inputs(
            wallet.loans, stats, sigma_max, cfg.liquidation_proportion, cfg.sigmoid_midpoint
        )
        s_h = subscores.historical_subscore(hist)
    except NoEligibleLoans:
        s_h = default

    try:
        sim = current_subscore(wallet, stats, cfg)
        s_c, paths, converged = sim.s_c, sim.paths_used, sim.converged
    except NoOpenPositions:
        s_c, paths, converged = 0.0, 0, True

    try:
        s_cu = subscores.utilization_subscore(wallet.loans)
    except NoEligibleLoans:
        s_cu = 0.0

    try:
        s_ct = subscores.transaction_subscore(wallet.transactions)
    except NoTransactions:
        s_ct = 0.0

    as_of = cfg.as_of or _latest_event(wallet)
    try:
        s_nc = subscores.newcredit_from_loans(wallet.loans, as_of, cfg.new_credit_window_days)
    except InsufficientLoans:
        s_nc = 0.0

    raw, occr = occr_score(SubscoreVector(s_h, s_c, s_cu, s_ct, s_nc), cfg)
    return WalletScoreReport(
        wallet_id=wallet.wallet_id,
        s_h=s_h, s_c=s_c, s_cu=s_cu, s_ct=s_ct, s_nc=s_nc,
        occr=occr, occr_raw=raw,
        ltv_offer=dynamic_ltv(occr, cfg),
        sim_paths_used=paths, sim_converged=converged,
    )


def score_wallets(
    wallets: Sequence[WalletHistory],
    stats: Mapping[str, AssetStats],
    cfg: ScoreConfig = ScoreConfig(),
    threads: int = 1,
) -> list[WalletScoreReport]:
    """Score a batch; empty wallets get the batch mean OCCR unless configured."""
    active = [i for i, w in enumerate(wallets) if not w.is_empty]
    scored = ordered_map(lambda i: score_wallet(wallets[i], stats, cfg), active, threads)
    reports = dict(zip(active, scored))
    if cfg.default_score is not None:
        fill = cfg.default_score
    elif scored:
        fill = sum(r.occr for r in scored) / len(scored)
    else:
        fill = FALLBACK_SCORE
    return [
        reports[i] if i in reports else _empty_report(w, fill, cfg)
        for i, w in enumerate(wallets)
    ]
