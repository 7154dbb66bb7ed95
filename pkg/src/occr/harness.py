"""Replication studies: estimate a subscore on many synthetic wallets and
compare the spread of estimates with the closed-form moments.

Replication ``r`` always draws from stream ``(seed, r)``, so every study is
reproducible and independent of the thread count.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace
from typing import Callable, Sequence

import numpy as np

from occr import oracle, subscores
from occr.aggregate import OccrMoments, occr_moments
from occr.domain import ScoreConfig
from occr.errors import InsufficientSizes, ScaleTooSmall
from occr.oracle import MomentPair
from occr.rng import ordered_map, substream
from occr.synth import LoanGenParams, TxnGenParams, loan_arrays, sample_pareto, transaction_arrays

MIN_REPLICATIONS = 100
FULL_REPLICATIONS = 5000
FULL_PER_REP_N = 60000


class Subscore(str, enum.Enum):
    TRANSACTION = "transaction"
    UTILIZATION = "utilization"
    HISTORICAL = "historical"
    CURRENT = "current"
    NEWCREDIT = "newcredit"


@dataclass(frozen=True)
class ExceedanceParams:
    """Pareto LaR against Pareto holdings; ``n`` draws give one estimate."""

    alpha_l: float
    xm_l: float
    alpha_h: float
    xm_h: float


@dataclass(frozen=True)
class NewCreditParams:
    """Pareto loan amounts on uniform dates in [0, 1] with fixed thresholds."""

    x_m: float
    alpha: float
    mu_l: float
    mu_dd: float


@dataclass(frozen=True)
class StudySpec:
    subscore: Subscore
    gen_params: TxnGenParams | LoanGenParams | ExceedanceParams | NewCreditParams
    replications: int = FULL_REPLICATIONS
    per_rep_n: int = FULL_PER_REP_N
    confidence_z: float = 1.96
    rng_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.replications < 2:
            raise ValueError("need at least two replications")


@dataclass(frozen=True)
class StudyResult:
    subscore: str
    params: dict
    replications: int
    per_rep_n: int
    mean_estimate: float
    theoretical_mean: float
    sse: float
    ase: float
    coverage: float

    @property
    def mean_stderr(self) -> float:
        return math.sqrt(self.ase / self.replications)


# -- per-replication estimators ------------------------------------------------

def _estimate_transaction(params: TxnGenParams, n: int, rng) -> float:
    amounts, signs, recency = transaction_arrays(replace(params, n=n), rng)
    return subscores.transaction_from_arrays(amounts, signs, recency)


def _estimate_utilization(params: LoanGenParams, n: int, rng) -> float:
    collateral, ltv, loan, _ = loan_arrays(replace(params, n=n), rng)
    return subscores.utilization_from_arrays(loan, collateral * ltv)


def _estimate_historical(params: LoanGenParams, n: int, rng) -> float:
    _, _, loan, liquidated = loan_arrays(replace(params, n=n), rng)
    risk = rng.random(n)
    recency = rng.random(n)
    inputs = subscores.HistoricalInputs.from_arrays(liquidated, loan, risk, 1.0, recency)
    return subscores.historical_subscore(inputs)


def _estimate_current(params: ExceedanceParams, n: int, rng) -> float:
    lar = sample_pareto(params.alpha_l, params.xm_l, rng, n)
    holdings = sample_pareto(params.alpha_h, params.xm_h, rng, n)
    return float(np.mean(lar >= holdings))


def spacing_min_gaps(u: np.ndarray) -> np.ndarray:
    """Shortest adjacent spacing of each sorted point in [0, 1], counting 0 and 1 as neighbours."""
    padded = np.concatenate([np.zeros(u.shape[:-1] + (1,)), u, np.ones(u.shape[:-1] + (1,))], axis=-1)
    d = np.diff(padded, axis=-1)
    return np.minimum(d[..., :-1], d[..., 1:])


def _estimate_newcredit(params: NewCreditParams, n: int, rng) -> float:
    amounts = sample_pareto(params.alpha, params.x_m, rng, n)
    dates = np.sort(rng.random(n))
    return subscores.newcredit_subscore(amounts, spacing_min_gaps(dates), params.mu_l, params.mu_dd)


_ESTIMATORS: dict[Subscore, Callable] = {
    Subscore.TRANSACTION: _estimate_transaction,
    Subscore.UTILIZATION: _estimate_utilization,
    Subscore.HISTORICAL: _estimate_historical,
    Subscore.CURRENT: _estimate_current,
    Subscore.NEWCREDIT: _estimate_newcredit,
}


def theoretical_moments(subscore: Subscore, params, n: int) -> MomentPair:
    """Closed-form mean and variance of one estimate at sample size ``n``."""
    if subscore is Subscore.TRANSACTION:
        return oracle.transaction_moments_oracle(params.p, params.alpha, params.x_min, n)
    if subscore is Subscore.UTILIZATION:
        return oracle.utilization_moments_oracle(params.alpha, params.x_min, params.l_min, params.l_max, n)
    if subscore is Subscore.HISTORICAL:
        e_l, e_l2 = oracle.loan_moments(params.alpha, params.x_min, params.l_min, params.l_max)
        return MomentPair(params.s_h, oracle.historical_var_oracle(params.s_h, n, e_l, e_l2))
    if subscore is Subscore.CURRENT:
        s = oracle.lar_exceedance_oracle(params.alpha_l, params.xm_l, params.alpha_h, params.xm_h)
        return oracle.current_moments_oracle(s, n)
    if subscore is Subscore.NEWCREDIT:
        s = oracle.newcredit_prob_oracle(params.x_m, params.mu_l, params.alpha, params.mu_dd, n)
        return oracle.newcredit_moments_oracle(s, n)
    raise ValueError(subscore)


def study_estimates(spec: StudySpec) -> np.ndarray:
    subscore = Subscore(spec.subscore)
    fn = _ESTIMATORS[subscore]
    est = ordered_map(
        lambda r: fn(spec.gen_params, spec.per_rep_n, substream(spec.rng_seed, r)),
        range(spec.replications),
        spec.threads,
    )
    return np.asarray(est, dtype=float)


def summarize(spec: StudySpec, estimates: np.ndarray, theory: MomentPair) -> StudyResult:
    half_width = spec.confidence_z * math.sqrt(theory.variance)
    covered = np.abs(estimates - theory.mean) <= half_width
    return StudyResult(
        subscore=Subscore(spec.subscore).value,
        params=asdict(spec.gen_params),
        replications=spec.replications,
        per_rep_n=spec.per_rep_n,
        mean_estimate=float(estimates.mean()),
        theoretical_mean=theory.mean,
        sse=float(estimates.var(ddof=1)),
        ase=theory.variance,
        coverage=float(covered.mean()),
    )


def run_study(spec: StudySpec) -> StudyResult:
    theory = theoretical_moments(Subscore(spec.subscore), spec.gen_params, spec.per_rep_n)
    return summarize(spec, study_estimates(spec), theory)


# -- table reproduction ------------------------------------------------------

TABLE1_ROWS = [
    TxnGenParams(0.60, 2.10, 300, FULL_PER_REP_N),
    TxnGenParams(0.35, 2.25, 300, FULL_PER_REP_N),
    TxnGenParams(0.80, 2.10, 320, FULL_PER_REP_N),
    TxnGenParams(0.68, 2.60, 110, FULL_PER_REP_N),
    TxnGenParams(0.42, 2.06, 108, FULL_PER_REP_N),
]

TABLE2_ROWS = [
    LoanGenParams(2.10, 300, 0.50, 0.90, FULL_PER_REP_N),
    LoanGenParams(2.30, 210, 0.64, 0.92, FULL_PER_REP_N),
    LoanGenParams(2.80, 50, 0.62, 0.84, FULL_PER_REP_N),
    LoanGenParams(2.45, 680, 0.46, 0.74, FULL_PER_REP_N),
    LoanGenParams(2.45, 680, 0.46, 0.94, FULL_PER_REP_N),
]

# Reference (estimate, ASE, SSE, CP) per row at full scale, kept for side-by-side output.
TABLE1_REFERENCE = [
    (0.0997, 0.000031, 0.000019, 0.985),
    (-0.1496, 0.000014, 0.000013, 0.957),
    (0.2991, 0.000023, 0.000014, 0.984),
    (0.1796, 0.000008, 0.000009, 0.946),
    (-0.0798, 0.000049, 0.000021, 0.992),
]
TABLE2_REFERENCE = [
    (0.333333, 0.0000059, 0.0000035, 0.986),
    (0.333359, 0.0000025, 0.0000022, 0.965),
    (0.333341, 0.0000014, 0.0000014, 0.952),
    (0.333368, 0.0000019, 0.0000019, 0.957),
    (0.333351, 0.0000020, 0.0000018, 0.958),
]

TABLES = {
    "table1": (Subscore.TRANSACTION, TABLE1_ROWS, TABLE1_REFERENCE),
    "table2": (Subscore.UTILIZATION, TABLE2_ROWS, TABLE2_REFERENCE),
}


def table_specs(
    table: str,
    scale: float = 1.0,
    rng_seed: int = 0,
    threads: int = 1,
    replications: int | None = None,
    per_rep_n: int | None = None,
) -> list[StudySpec]:
    if not 0 < scale <= 1:
        raise ValueError("scale must be in (0, 1]")
    subscore, rows, _ = TABLES[table]
    reps = replications or round(FULL_REPLICATIONS * scale)
    n = per_rep_n or round(FULL_PER_REP_N * scale)
    if reps < MIN_REPLICATIONS or n < MIN_REPLICATIONS:
        raise ScaleTooSmall(f"scale {scale} gives {reps} replications x {n} draws; need >= {MIN_REPLICATIONS}")
    # Rows get distinct seed streams so they are not driven by identical uniforms.
    return [
        StudySpec(subscore, row, reps, n, rng_seed=rng_seed + i, threads=threads)
        for i, row in enumerate(rows)
    ]


def reproduce_table(table: str, scale: float = 1.0, **kwargs) -> list[StudyResult]:
    return [run_study(spec) for spec in table_specs(table, scale, **kwargs)]


def format_table(results: Sequence[StudyResult], reference=None) -> str:
    head = f"{'No.':>3}  {'params':<28} {'estimate':>10} {'theory':>10} {'ASE':>11} {'SSE':>11} {'CP':>6}"
    if reference:
        head += f"  {'ref est':>9} {'ref CP':>6}"
    lines = [head, "-" * len(head)]
    for i, r in enumerate(results):
        label = "(" + ", ".join(f"{v:g}" for k, v in r.params.items() if k not in ("n", "s_h", "p_open")) + ")"
        line = (f"{i + 1:>3}  {label:<28} {r.mean_estimate:>10.6f} {r.theoretical_mean:>10.6f} "
                f"{r.ase:>11.3e} {r.sse:>11.3e} {r.coverage:>6.3f}")
        if reference:
            line += f"  {reference[i][0]:>9g} {reference[i][3]:>6.3f}"
        lines.append(line)
    return "\n".join(lines)


# -- consistency ---------------------------------------------------------------

def scaling_slope(sizes: Sequence[float], variances: Sequence[float]) -> float:
    """Least-squares slope of log(variance) against log(n)."""
    sizes = np.asarray(sizes, dtype=float)
    if sizes.size < 3 or sizes.max() / sizes.min() < 10:
        raise InsufficientSizes("need >= 3 sizes spanning at least one decade")
    slope, _ = np.polyfit(np.log(sizes), np.log(np.asarray(variances, dtype=float)), 1)
    return float(slope)


def variance_scaling_check(spec: StudySpec, sizes: Sequence[int]) -> float:
    if len(sizes) < 3 or max(sizes) / min(sizes) < 10:
        raise InsufficientSizes("need >= 3 sizes spanning at least one decade")
    sse = [run_study(replace(spec, per_rep_n=int(n))).sse for n in sizes]
    return scaling_slope(sizes, sse)


# -- oracle cross-checks -----------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    estimate: float
    expected: float
    stderr: float

    @property
    def z(self) -> float:
        diff = self.estimate - self.expected
        return diff / self.stderr if self.stderr > 0 else (0.0 if diff == 0 else math.inf)

    def passed(self, k: float = 5.0) -> bool:
        return abs(self.z) <= k


def _mean_check(name, samples, expected) -> CheckResult:
    samples = np.asarray(samples, dtype=float)
    return CheckResult(name, float(samples.mean()), expected, float(samples.std(ddof=1) / math.sqrt(samples.size)))


def _var_check(name, samples, expected) -> CheckResult:
    # Standard error of the sample variance from the fourth central moment.
    x = np.asarray(samples, dtype=float)
    d = x - x.mean()
    m2 = float((d**2).mean())
    m4 = float((d**4).mean())
    return CheckResult(name, float(x.var(ddof=1)), expected, math.sqrt(max(m4 - m2**2, 0.0) / x.size))


def _numpy_pareto(rng, alpha, scale, size):
    # numpy's Lomax sampler shifted to a Pareto; independent of synth.sample_pareto.
    return scale * (1.0 + rng.pareto(alpha, size))


def oracle_crosschecks(seed: int = 0, scale: float = 1.0, threads: int = 1) -> list[CheckResult]:
    """Brute-force Monte Carlo against every closed-form oracle.

    ``scale`` shrinks every sample count for quick runs.
    """
    def n(count: int) -> int:
        return max(int(count * scale), 1000)

    checks: list[CheckResult] = []
    rng = substream(seed, 1)
    x = _numpy_pareto(rng, 3.0, 1.0, n(1_000_000))
    checks.append(_mean_check("pareto mean (3, 1)", x, oracle.pareto_mean(3.0, 1.0)))
    x = _numpy_pareto(rng, 2.0, 1.0, n(1_000_000))
    checks.append(_mean_check("pareto survival P(X>2) (2, 1)", x > 2.0, 0.25))

    rng = substream(seed, 2)
    size = n(1_000_000)
    c = _numpy_pareto(rng, 5.0, 1.0, size)
    ltv = rng.uniform(0.5, 0.9, size)
    loan = rng.uniform(0.0, 1.0, size) * ltv * c
    e_l, e_l2 = oracle.loan_moments(5.0, 1.0, 0.5, 0.9)
    checks.append(_mean_check("loan E[L] (5, 1, 0.5, 0.9)", loan, e_l))
    checks.append(_mean_check("loan E[L^2] (5, 1, 0.5, 0.9)", loan**2, e_l2))

    rng = substream(seed, 3)
    size = n(10_000_000)
    lar = _numpy_pareto(rng, 2.0, 1.0, size)
    hold = _numpy_pareto(rng, 3.0, 1.0, size)
    checks.append(_mean_check("LaR exceedance (2, 1, 3, 1)", lar > hold, oracle.lar_exceedance_oracle(2.0, 1.0, 3.0, 1.0)))

    rng = substream(seed, 4)
    trials = n(1_000_000)
    amounts = _numpy_pareto(rng, 2.0, 1.0, (trials, 2))
    gaps = spacing_min_gaps(np.sort(rng.random((trials, 2)), axis=1))
    per_trial = ((amounts >= 2.0) & (gaps <= 0.25)).mean(axis=1)
    checks.append(_mean_check("new credit P (1, 2, 2, 0.25, n=2)", per_trial,
                              oracle.newcredit_prob_oracle(1.0, 2.0, 2.0, 0.25, 2)))

    reps = n(4000)
    studies = [
        ("transaction", StudySpec(Subscore.TRANSACTION, TxnGenParams(0.6, 4.0, 100, 0), reps, 1000)),
        ("utilization", StudySpec(Subscore.UTILIZATION, LoanGenParams(5.0, 100, 0.5, 0.9, 0), reps, 200)),
        ("historical", StudySpec(Subscore.HISTORICAL, LoanGenParams(5.0, 1.0, 0.5, 0.9, 0, s_h=0.3), reps, 200)),
        ("current", StudySpec(Subscore.CURRENT, ExceedanceParams(2.0, 1.0, 3.0, 1.0), reps, 500)),
        ("newcredit", StudySpec(Subscore.NEWCREDIT, NewCreditParams(1.0, 2.0, 2.0, 0.25), reps, 50)),
    ]
    for i, (name, spec) in enumerate(studies):
        spec = replace(spec, rng_seed=seed + 100 + i, threads=threads)
        est = study_estimates(spec)
        theory = theoretical_moments(spec.subscore, spec.gen_params, spec.per_rep_n)
        checks.append(_mean_check(f"{name} mean (n={spec.per_rep_n})", est, theory.mean))
        checks.append(_var_check(f"{name} variance (n={spec.per_rep_n})", est, theory.variance))
    return checks


# -- OCCR distribution -----------------------------------------------------------

@dataclass(frozen=True)
class OccrStudyParams:
    """Generating parameters for every component of one synthetic wallet.

    The loan book feeds both the historical and utilization subscores.
    """

    loans: LoanGenParams = LoanGenParams(5.0, 100.0, 0.5, 0.9, 200, s_h=0.5)
    txns: TxnGenParams = TxnGenParams(0.6, 4.0, 100.0, 500)
    exceedance: ExceedanceParams = ExceedanceParams(2.0, 1.0, 3.0, 1.0)
    sim_paths: int = 2000
    newcredit: NewCreditParams = NewCreditParams(1.0, 2.0, 2.0, 0.25)
    newcredit_n: int = 50


@dataclass(frozen=True)
class OccrStudyResult:
    theory: OccrMoments
    mean: float
    variance: float
    skewness: float
    replications: int


def occr_component_moments(params: OccrStudyParams) -> list[MomentPair]:
    lp = params.loans
    e_l, e_l2 = oracle.loan_moments(lp.alpha, lp.x_min, lp.l_min, lp.l_max)
    mu_w, mu_w2 = oracle.weight_moments(1.0, e_l, e_l2)
    hist = MomentPair(oracle.historical_bias_oracle(lp.s_h, lp.n, mu_w, mu_w2),
                      oracle.historical_var_oracle(lp.s_h, lp.n, e_l, e_l2))
    cur = theoretical_moments(Subscore.CURRENT, params.exceedance, params.sim_paths)
    cu = oracle.utilization_moments_oracle(lp.alpha, lp.x_min, lp.l_min, lp.l_max, lp.n)
    ct = theoretical_moments(Subscore.TRANSACTION, params.txns, params.txns.n)
    nc = theoretical_moments(Subscore.NEWCREDIT, params.newcredit, params.newcredit_n)
    return [hist, cur, MomentPair(1.0 - cu.mean, cu.variance), ct, nc]


def occr_distribution_study(
    params: OccrStudyParams = OccrStudyParams(),
    replications: int = 2000,
    rng_seed: int = 0,
    cfg: ScoreConfig = ScoreConfig(),
    threads: int = 1,
) -> OccrStudyResult:
    """Empirical moments of the raw OCCR score over synthetic wallets."""
    w = cfg.weights

    def one(r: int) -> float:
        rng = substream(rng_seed, r)
        n = params.loans.n
        collateral, ltv, loan, liquidated = loan_arrays(params.loans, rng)
        s_h = subscores.historical_subscore(subscores.HistoricalInputs.from_arrays(
            liquidated, loan, rng.random(n), 1.0, rng.random(n)))
        s_cu = subscores.utilization_from_arrays(loan, collateral * ltv)
        s_c = _estimate_current(params.exceedance, params.sim_paths, rng)
        s_ct = _estimate_transaction(params.txns, params.txns.n, rng)
        s_nc = _estimate_newcredit(params.newcredit, params.newcredit_n, rng)
        return w[0] * s_h + w[1] * s_c + w[2] * (1.0 - s_cu) + w[3] * s_ct + w[4] * s_nc

    raw = np.asarray(ordered_map(one, range(replications), threads))
    d = raw - raw.mean()
    skew = float((d**3).mean() / (d**2).mean() ** 1.5)
    return OccrStudyResult(
        theory=occr_moments(occr_component_moments(params), cfg),
        mean=float(raw.mean()),
        variance=float(raw.var(ddof=1)),
        skewness=skew,
        replications=replications,
    )
