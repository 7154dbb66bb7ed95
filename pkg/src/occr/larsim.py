"""Liquidation-at-Risk simulation and the current credit-risk subscore.

Collateral prices follow independent geometric Brownian motions. A position
is liquidated at the first step where its debt reaches the liquidation
threshold times the collateral value; the liquidated amount is that
collateral value times the liquidation proportion. Paths are simulated in
batches until the running variance of total LaR stabilises.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from occr.domain import AssetStats, LoanPosition, ScoreConfig, WalletHistory
from occr.errors import NoOpenPositions, UnknownAsset
from occr.rng import substream

DAYS_PER_YEAR = 365


@dataclass(frozen=True)
class SimOutcome:
    s_c: float
    paths_used: int
    lar_mean: float
    lar_variance: float
    converged: bool
    batches: int
    exceed_count: int = 0


def stable_key(text: str) -> int:
    """64-bit stream key derived from a string, stable across processes."""
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def simulate_price_paths(
    stats: AssetStats,
    horizon_days: int,
    steps_per_day: int,
    rng: np.random.Generator,
    n_paths: int | None = None,
) -> np.ndarray:
    """GBM price paths starting at spot.

    Returns shape ``(steps + 1,)`` when ``n_paths`` is None, else
    ``(n_paths, steps + 1)``.
    """
    steps = horizon_days * steps_per_day
    dt_years = 1.0 / (DAYS_PER_YEAR * steps_per_day)
    sigma = stats.annualized_volatility
    shape = (steps,) if n_paths is None else (n_paths, steps)
    z = rng.standard_normal(shape)
    incr = (stats.drift - 0.5 * sigma**2) * dt_years + sigma * np.sqrt(dt_years) * z
    log_path = np.cumsum(incr, axis=-1)
    pad = [(0, 0)] * (log_path.ndim - 1) + [(1, 0)]
    return stats.spot_price_usd * np.exp(np.pad(log_path, pad))


def simulate_price_path(stats, horizon_days, steps_per_day, rng) -> np.ndarray:
    return simulate_price_paths(stats, horizon_days, steps_per_day, rng)


def collateral_value(position: LoanPosition, paths: Mapping[str, np.ndarray]) -> np.ndarray:
    """Collateral USD value along each path, legs scaled by ``P(t) / P(0)``."""
    total = 0.0
    for leg in position.collaterals:
        try:
            path = np.asarray(paths[leg.asset_id], dtype=float)
        except KeyError:
            raise UnknownAsset(leg.asset_id) from None
        total = total + leg.amount_usd * path / path[..., :1]
    return total


def position_lar(
    position: LoanPosition,
    paths: Mapping[str, np.ndarray],
    liquidation_proportion: float = 1.0,
):
    """Liquidated collateral at the first threshold crossing, 0 if none.

    Accepts one path per asset (returns a float) or a stack of paths with
    the step axis last (returns an array over paths).
    """
    value = collateral_value(position, paths)
    crossed = position.loan_usd >= position.threshold * value
    hit = crossed.any(axis=-1)
    first = np.argmax(crossed, axis=-1)
    at_first = np.take_along_axis(value, np.expand_dims(first, -1), axis=-1)[..., 0]
    lar = np.where(hit, liquidation_proportion * at_first, 0.0)
    return float(lar) if lar.ndim == 0 else lar


def _merge_moments(count, mean, m2, batch: np.ndarray):
    # Chan et al. pairwise update of (count, mean, sum of squared deviations).
    nb = batch.size
    mb = float(batch.mean())
    m2b = float(((batch - mb) ** 2).sum())
    total = count + nb
    delta = mb - mean
    mean = mean + delta * nb / total
    m2 = m2 + m2b + delta**2 * count * nb / total
    return total, mean, m2


def current_subscore(
    wallet: WalletHistory,
    stats: Mapping[str, AssetStats],
    cfg: ScoreConfig,
) -> SimOutcome:
    """Estimate the probability that total LaR meets or exceeds holdings.

    Batch ``b`` of wallet ``w`` draws from stream ``(seed, key(w), b)`` so the
    outcome depends only on the seed and the wallet id.
    """
    positions = wallet.open_loans
    if not positions:
        raise NoOpenPositions(wallet.wallet_id)
    assets = sorted({leg.asset_id for pos in positions for leg in pos.collaterals})
    for asset in assets:
        if asset not in stats:
            raise UnknownAsset(asset, wallet.wallet_id)

    key = stable_key(wallet.wallet_id)
    batch = cfg.sim_batch_size
    count, mean, m2 = 0, 0.0, 0.0
    prev_var = None
    exceed = 0
    converged = False
    batches = 0
    while batches < cfg.sim_max_batches:
        rng = substream(cfg.rng_seed, key, batches)
        paths = {
            a: simulate_price_paths(stats[a], cfg.sim_horizon_days, cfg.sim_steps_per_day, rng, batch)
            for a in assets
        }
        lar_total = np.zeros(batch)
        for pos in positions:
            lar_total += position_lar(pos, paths, cfg.liquidation_proportion)
        exceed += int((lar_total >= wallet.holdings_usd).sum())
        count, mean, m2 = _merge_moments(count, mean, m2, lar_total)
        batches += 1
        var = m2 / (count - 1) if count > 1 else 0.0
        if prev_var is not None and abs(var - prev_var) <= cfg.sim_epsilon * max(prev_var, 1.0):
            converged = True
            break
        prev_var = var

    return SimOutcome(
        s_c=exceed / count,
        paths_used=count,
        lar_mean=mean,
        lar_variance=m2 / (count - 1) if count > 1 else 0.0,
        converged=converged,
        batches=batches,
        exceed_count=exceed,
    )
