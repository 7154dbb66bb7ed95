"""Closed-form moments for every estimator under the synthetic data model.

These are the analytic targets that simulation studies are checked against.
All variance expressions are first-order delta-method approximations except
the Bernoulli-mean ones, which are exact.
"""

from __future__ import annotations

from dataclasses import dataclass

from occr.errors import ScaleOrderViolated, ShapeTooSmall, ThresholdOutOfRange

UNIFORM_MEAN = 0.5
UNIFORM_VAR = 1.0 / 12.0


@dataclass(frozen=True)
class MomentPair:
    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be nonnegative")


def _need_finite_variance(alpha: float) -> None:
    if not alpha > 2:
        raise ShapeTooSmall(f"Pareto shape {alpha} <= 2 has no finite second moment")


def pareto_mean(alpha: float, scale: float) -> float:
    if not alpha > 1:
        raise ShapeTooSmall(f"Pareto shape {alpha} <= 1 has no finite mean")
    return alpha * scale / (alpha - 1)


def pareto_second_moment(alpha: float, scale: float) -> float:
    _need_finite_variance(alpha)
    return alpha * scale**2 / (alpha - 2)


def loan_moments(alpha: float, m: float, l_min: float, l_max: float) -> tuple[float, float]:
    """``(E[L], E[L^2])`` for ``L ~ U(0, ltv * c)``, ``ltv ~ U(l_min, l_max)``, ``c ~ Pareto(alpha, m)``."""
    _need_finite_variance(alpha)
    el = (l_min + l_max) * alpha * m / (4 * (alpha - 1))
    el2 = (l_min**2 + l_min * l_max + l_max**2) * alpha * m**2 / (9 * (alpha - 2))
    return el, el2


def weight_moments(p: float, e_l: float, e_l2: float) -> tuple[float, float]:
    """First two moments of ``L * (1 - r) * p * t`` with ``r, t ~ U(0, 1)``."""
    return p * e_l / 4.0, p**2 * e_l2 / 9.0


def historical_var_oracle(s_h: float, n: int, e_l: float, e_l2: float) -> float:
    return 16.0 * s_h * (1.0 - s_h) * e_l2 / (9.0 * n * e_l**2)


def historical_bias_oracle(s_h: float, n: int, mu_w: float, mu_w2: float) -> float:
    """Approximate ``E[s_h_hat]`` from the weight moments."""
    if not mu_w > 0:
        raise ValueError("mu_w must be positive")
    return s_h * (1.0 + (mu_w2 - mu_w**2) / (n * mu_w**2))


def lar_exceedance_oracle(alpha_l: float, xm_l: float, alpha_h: float, xm_h: float) -> float:
    """``P(LaR > H)`` for independent Pareto LaR and holdings, valid for ``xm_l <= xm_h``."""
    if not (alpha_l > 0 and alpha_h > 0 and xm_l > 0 and xm_h > 0):
        raise ValueError("shapes and scales must be positive")
    if xm_l > xm_h:
        raise ScaleOrderViolated("closed form requires xm_l <= xm_h")
    return alpha_h / (alpha_l + alpha_h) * (xm_l / xm_h) ** alpha_l


def newcredit_prob_oracle(x_m: float, mu_l: float, alpha: float, mu_dd: float, n: int) -> float:
    """Probability a loan is large (Pareto tail) and closely spaced (uniform spacings)."""
    if mu_l < x_m:
        raise ThresholdOutOfRange("amount threshold below the Pareto scale")
    if not 0 <= mu_dd <= 0.5:
        raise ThresholdOutOfRange("spacing threshold must lie in [0, 1/2]")
    return (x_m / mu_l) ** alpha * (1.0 - (1.0 - 2.0 * mu_dd) ** n)


def transaction_moments_oracle(
    p: float,
    alpha: float,
    x_min: float,
    n: int,
    mu_t: float = UNIFORM_MEAN,
    var_t: float = UNIFORM_VAR,
) -> MomentPair:
    """Moments of the transaction subscore with Pareto amounts and random signs.

    ``x_min`` cancels out of both moments; it is accepted for symmetry with
    the generator parameters.
    """
    _need_finite_variance(alpha)
    mu_s = 2.0 * p - 1.0
    shape = (alpha - 1) ** 2 / (alpha * (alpha - 2))
    var = shape * ((var_t + mu_t**2) - mu_s**2 * mu_t**2) / n
    return MomentPair(mu_s * mu_t, var)


def collateral_cap_moments(alpha: float, m: float, l_min: float, l_max: float) -> tuple[float, float]:
    """``(E[Y], E[Y^2])`` for the borrow cap ``Y = collateral * ltv``."""
    _need_finite_variance(alpha)
    e_y = pareto_mean(alpha, m) * (l_min + l_max) / 2.0
    e_y2 = pareto_second_moment(alpha, m) * (l_min**2 + l_min * l_max + l_max**2) / 3.0
    return e_y, e_y2


def utilization_moments_oracle(
    alpha: float, m: float, l_min: float, l_max: float, n: int
) -> MomentPair:
    e_y, e_y2 = collateral_cap_moments(alpha, m, l_min, l_max)
    var_y = e_y2 - e_y**2
    mean = 1.0 / 3.0 + e_y2 / (9.0 * n * e_y**2)

    # Sum-level moments of numerator N = sum(L - L^2/Y) and denominator D = sum(L).
    mu_n = n * e_y / 6.0
    mu_d = n * e_y / 2.0
    var_d = n * (e_y2 / 3.0 - e_y**2 / 4.0)
    var_n = n * (e_y2 / 180.0 + var_y / 36.0)
    cov = n * var_y / 12.0
    var = var_n / mu_d**2 + mu_n**2 * var_d / mu_d**4 - 2.0 * mu_n * cov / mu_d**3
    return MomentPair(mean, var)


def current_moments_oracle(s_c: float, k: int) -> MomentPair:
    return MomentPair(s_c, s_c * (1.0 - s_c) / k)


def newcredit_moments_oracle(s_nc: float, n: int) -> MomentPair:
    return MomentPair(s_nc, s_nc * (1.0 - s_nc) / n)
