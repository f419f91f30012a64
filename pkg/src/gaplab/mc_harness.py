"""Monte Carlo experiment engine: trials, failure estimates, sample-size search.

Every trial derives its own RNG from (seed, trial index), so aggregate counts
are identical whether trials run serially or split across workers.  Inside a
trial the draw order is fixed: target first (when the target is random), then
the sample; the learner itself is deterministic.  Errors are computed by
exact oracles, never by an inner Monte Carlo loop.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import bdtr

from .concepts import (
    ConceptClass,
    ConceptId,
    ProjectionClass,
    TableClass,
    all_functions_class,
    class_from_json_dict,
)
from .distributions import (
    Distribution,
    FiniteSupportDistribution,
    PneFamily,
    ProductDistribution,
    RngSeed,
    distribution_from_json_dict,
    missing_mass_fraction,
    sample_bit_matrix,
    sample_coordinate_columns,
    sample_support_indices,
)
from .errors import (
    InvalidParameterError,
    OracleUnavailableError,
    SearchBracketError,
)
from .learners import (
    LabeledSample,
    consistent_memorizer,
    cover_learner,
    erm,
    posterior_mean_label,
)
from .metric_cover import (
    CoverResult,
    EstimateWithCI,
    disagreement_enumerate,
    disagreement_exact_projections,
    greedy_packing_cover,
    hoeffding_radius,
    pne_small_cover,
)

LEARNER_NAMES = ("erm", "cover", "bayes-posterior", "memorizer")

FAILURE_THRESHOLD_ONE_SIXTEENTH = 1.0 / 16.0


@dataclass(frozen=True)
class FixedTarget:
    """Learn a fixed concept of the class (1-based index)."""

    index: int

    def to_json_dict(self) -> dict:
        return {"kind": "fixed", "i": self.index}


@dataclass(frozen=True)
class RandomPair:
    """Draw I uniformly and learn c_I under P_I (the matched-pair construction)."""

    def to_json_dict(self) -> dict:
        return {"kind": "random-pair"}


@dataclass(frozen=True)
class RandomConcept:
    """Draw a uniform target from the class; the distribution stays fixed."""

    def to_json_dict(self) -> dict:
        return {"kind": "random-concept"}


TargetSpec = FixedTarget | RandomPair | RandomConcept


def target_from_json_dict(obj: dict) -> TargetSpec:
    kind = obj.get("kind")
    if kind == "fixed":
        return FixedTarget(int(obj["i"]))
    if kind == "random-pair":
        return RandomPair()
    if kind == "random-concept":
        return RandomConcept()
    raise InvalidParameterError(f"unknown target kind {kind!r}")


@dataclass(frozen=True)
class TrialConfig:
    """Everything one trial needs; eps_acc is the PAC accuracy, not the
    distribution parameter."""

    concept_class: ConceptClass
    dist: Distribution | PneFamily
    target: TargetSpec
    learner: str
    m: int
    eps_acc: float
    trials: int
    seed: RngSeed
    gamma: float = 0.01
    cover_level: float | None = None
    learner_eps: float | None = None
    memorizer_default: int = 0

    def __post_init__(self):
        validate_config(self)

    def to_json_dict(self) -> dict:
        return {
            "class": self.concept_class.to_json_dict(),
            "dist": self.dist.to_json_dict(),
            "target": self.target.to_json_dict(),
            "learner": self.learner,
            "m": self.m,
            "eps_acc": self.eps_acc,
            "trials": self.trials,
            "gamma": self.gamma,
            "seed": self.seed.to_json_dict(),
            "cover_level": self.cover_level,
            "learner_eps": self.learner_eps,
            "memorizer_default": self.memorizer_default,
        }


def config_from_json_dict(obj: dict) -> TrialConfig:
    seed = obj.get("seed", {})
    return TrialConfig(
        concept_class=class_from_json_dict(obj["class"]),
        dist=distribution_from_json_dict(obj["dist"]),
        target=target_from_json_dict(obj["target"]),
        learner=obj["learner"],
        m=int(obj["m"]),
        eps_acc=float(obj["eps_acc"]),
        trials=int(obj["trials"]),
        seed=RngSeed(int(seed.get("master", 0)), int(seed.get("stream", 0))),
        gamma=float(obj.get("gamma", 0.01)),
        cover_level=obj.get("cover_level"),
        learner_eps=obj.get("learner_eps"),
        memorizer_default=int(obj.get("memorizer_default", 0)),
    )


def validate_config(cfg: TrialConfig) -> None:
    if cfg.learner not in LEARNER_NAMES:
        raise InvalidParameterError(f"unknown learner {cfg.learner!r}")
    if cfg.m < 0:
        raise InvalidParameterError("m must be non-negative")
    if cfg.trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    if cfg.eps_acc <= 0.0:
        raise InvalidParameterError("eps_acc must be positive")
    if not 0.0 < cfg.gamma < 1.0:
        raise InvalidParameterError("gamma must lie in (0, 1)")
    if cfg.memorizer_default not in (0, 1):
        raise InvalidParameterError("memorizer default must be a bit")

    cls, dist = cfg.concept_class, cfg.dist
    if isinstance(cfg.target, RandomPair):
        if not isinstance(dist, PneFamily) or not isinstance(cls, ProjectionClass):
            raise InvalidParameterError(
                "random-pair targets need the projection class and a pne family"
            )
        if dist.n != cls.n:
            raise InvalidParameterError("family dimension does not match the class")
    elif isinstance(dist, PneFamily):
        raise InvalidParameterError("a pne family distribution needs a random-pair target")
    else:
        if isinstance(cls, ProjectionClass) and not isinstance(dist, ProductDistribution):
            raise OracleUnavailableError("projections need a product distribution")
        if isinstance(cls, TableClass):
            if not isinstance(dist, FiniteSupportDistribution):
                raise OracleUnavailableError("table classes need a finite-support distribution")
            for p in dist.support:
                cls.domain_position(p)
        if isinstance(dist, (ProductDistribution,)) and isinstance(cls, ProjectionClass):
            if dist.n != cls.n:
                raise InvalidParameterError("distribution dimension does not match the class")
    if isinstance(cfg.target, FixedTarget):
        cls.concept(cfg.target.index)

    if cfg.learner == "bayes-posterior":
        if not isinstance(cls, ProjectionClass):
            raise OracleUnavailableError("the posterior rule is defined for projections")
        eps = _posterior_eps(cfg)
        if eps is None:
            raise InvalidParameterError(
                "bayes-posterior needs learner_eps or a pne distribution"
            )
    if cfg.learner == "memorizer" and not isinstance(cls, TableClass):
        raise OracleUnavailableError(
            "the memorizer's exact error needs an enumerable domain"
        )
    if cfg.learner == "cover" and isinstance(cls, TableClass) and cfg.cover_level is None:
        raise InvalidParameterError("cover learning over a table class needs cover_level")
    if cfg.cover_level is not None and cfg.cover_level < 0:
        raise InvalidParameterError("cover_level must be non-negative")


def _posterior_eps(cfg: TrialConfig) -> float | None:
    if cfg.learner_eps is not None:
        return float(cfg.learner_eps)
    if isinstance(cfg.dist, PneFamily):
        return cfg.dist.eps
    if isinstance(cfg.dist, ProductDistribution) and cfg.dist.pne is not None:
        return cfg.dist.pne[1]
    return None


def _packed_column(words: np.ndarray, j: int) -> np.ndarray:
    """Bits of 1-based coordinate j across packed rows."""
    j -= 1
    return ((words[:, j // 64] >> np.uint64(j % 64)) & np.uint64(1)).astype(np.uint8)


def _popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


def _binom_cdf(k: int, trials: int, p: float) -> float:
    if k < 0:
        return 0.0
    if k >= trials:
        return 1.0
    return float(bdtr(float(k), trials, p))


def posterior_rule_error(k_size: int, threshold: int, eps: float) -> float:
    """Exact disagreement of the posterior rule with the target under P_i.

    The rule depends on the test point only through S = Z[i] + B with
    B ~ Binomial(K - 1, eps), so
    error = (Pr[1 + B < S*] + Pr[B >= S*]) / 2.
    """
    nb = k_size - 1
    wrong_if_one = _binom_cdf(threshold - 2, nb, eps)
    wrong_if_zero = 1.0 - _binom_cdf(threshold - 1, nb, eps)
    return 0.5 * (wrong_if_one + wrong_if_zero)


def _posterior_threshold_for(k_size: int, eps: float) -> int:
    """Smallest S with posterior mean >= 1/2, or k_size + 1 if none."""
    if posterior_mean_label(k_size, k_size, eps) < 0.5:
        return k_size + 1
    lo, hi = 1, k_size
    while lo < hi:
        mid = (lo + hi) // 2
        if posterior_mean_label(k_size, mid, eps) >= 0.5:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _resolve_cover(
    cls: ConceptClass, dist: Distribution, cfg: TrialConfig
) -> CoverResult:
    if isinstance(dist, ProductDistribution) and dist.pne is not None:
        n, eps, i = dist.pne
        level = cfg.cover_level if cfg.cover_level is not None else 2.0 * eps
        if level == 2.0 * eps:
            return pne_small_cover(n, eps, i)
        return greedy_packing_cover(cls, dist, level)
    if cfg.cover_level is None:
        raise InvalidParameterError("cover_level is required for this distribution")
    return greedy_packing_cover(cls, dist, cfg.cover_level)


class TrialResult(NamedTuple):
    error: float
    failed: int


def _resolve_target(
    cfg: TrialConfig, gen: np.random.Generator
) -> tuple[Distribution, ConceptId]:
    cls = cfg.concept_class
    if isinstance(cfg.target, RandomPair):
        i = int(gen.integers(1, cfg.dist.n + 1))
        return cfg.dist.member(i), cls.concept(i)
    if isinstance(cfg.target, RandomConcept):
        idx = int(gen.integers(1, cls.num_concepts + 1))
        return cfg.dist, cls.concept(idx)
    return cfg.dist, cls.concept(cfg.target.index)


def run_trial(cfg: TrialConfig, index: int) -> TrialResult:
    """One end-to-end trial: draw, train, score with the exact oracle.

    Deterministic given (cfg.seed, index).  failed = 1 iff the exact
    disagreement exceeds eps_acc strictly.
    """
    gen = cfg.seed.generator(index)
    dist, target = _resolve_target(cfg, gen)
    cls = cfg.concept_class

    if isinstance(cls, ProjectionClass):
        error = _projection_trial_error(cfg, cls, dist, target, gen)
    else:
        error = _table_trial_error(cfg, cls, dist, target, gen)
    return TrialResult(error, int(error > cfg.eps_acc))


def _projection_trial_error(
    cfg: TrialConfig,
    cls: ProjectionClass,
    dist: ProductDistribution,
    target: ConceptId,
    gen: np.random.Generator,
) -> float:
    if cfg.learner == "cover":
        cover = _resolve_cover(cls, dist, cfg)
        member_idx = list(cover.member_indices())
        cols = sorted(set(member_idx) | {target.index})
        bits = sample_coordinate_columns(dist, cols, cfg.m, gen)
        y = bits[:, cols.index(target.index)]
        best, best_mistakes = None, -1
        for j in member_idx:
            mk = int(np.count_nonzero(bits[:, cols.index(j)] != y))
            if best is None or mk < best_mistakes:
                best, best_mistakes = j, mk
        return disagreement_exact_projections(dist, best, target.index)

    words = sample_bit_matrix(dist, cfg.m, gen)
    y = _packed_column(words, target.index)
    sample = LabeledSample(words, y, cls.n)

    if cfg.learner == "erm":
        chosen = erm(cls, sample)
        return disagreement_exact_projections(dist, chosen.index, target.index)

    if cfg.learner == "bayes-posterior":
        if dist.pne is None:
            raise OracleUnavailableError(
                "the posterior rule's exact error needs a pne distribution"
            )
        k = _popcount(sample.column_match_mask())
        if k == 0:
            raise OracleUnavailableError("empty candidate set in a realizable trial")
        eps_learner = _posterior_eps(cfg)
        threshold = _posterior_threshold_for(k, eps_learner)
        return posterior_rule_error(k, threshold, dist.pne[1])

    raise OracleUnavailableError(f"learner {cfg.learner!r} is not defined for projections")


def _table_trial_error(
    cfg: TrialConfig,
    cls: TableClass,
    dist: FiniteSupportDistribution,
    target: ConceptId,
    gen: np.random.Generator,
) -> float:
    idx = sample_support_indices(dist, cfg.m, gen)
    target_mask = cls.table_mask(target)
    positions = np.array(
        [cls.domain_position(p) for p in dist.support], dtype=np.int64
    )[idx]
    labels = ((target_mask >> positions) & 1).astype(np.uint8)
    points = [dist.support[int(t)] for t in idx]
    sample = (
        LabeledSample.from_points(points, labels)
        if points
        else LabeledSample.empty(dist.n)
    )

    if cfg.learner == "memorizer":
        predictor = consistent_memorizer(sample, cfg.memorizer_default)
        error = 0.0
        for t, p in enumerate(dist.support):
            truth = (target_mask >> cls.domain_position(p)) & 1
            if predictor.predict(p) != truth:
                error += float(dist.probs[t])
        return error

    if cfg.learner == "erm":
        chosen = erm(cls, sample)
    elif cfg.learner == "cover":
        cover = _resolve_cover(cls, dist, cfg)
        chosen = cover_learner(cls, cover, sample)
    else:
        raise OracleUnavailableError(f"learner {cfg.learner!r} is not defined for tables")
    return disagreement_enumerate(cls, dist, chosen, target)


def _run_chunk(cfg: TrialConfig, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    errors = np.empty(hi - lo, dtype=np.float64)
    fails = np.empty(hi - lo, dtype=np.uint8)
    for t in range(lo, hi):
        res = run_trial(cfg, t)
        errors[t - lo] = res.error
        fails[t - lo] = res.failed
    return errors, fails


def resolve_workers(threads: int) -> int:
    if threads < 0:
        raise InvalidParameterError("threads must be >= 0")
    return threads if threads else (os.cpu_count() or 1)


def run_trials(cfg: TrialConfig, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial exact errors and failure indicators, in trial-index order.

    The result is bit-identical for any worker count: trial t depends only
    on (seed, t), and chunks are reassembled by position.
    """
    workers = resolve_workers(threads)
    if workers <= 1 or cfg.trials < 2 * workers:
        return _run_chunk(cfg, 0, cfg.trials)
    bounds = np.linspace(0, cfg.trials, 4 * workers + 1, dtype=int)
    spans = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if a < b]
    errors = np.empty(cfg.trials, dtype=np.float64)
    fails = np.empty(cfg.trials, dtype=np.uint8)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for (lo, hi), (err, fl) in zip(
            spans, pool.map(_run_chunk, [cfg] * len(spans), *zip(*spans))
        ):
            errors[lo:hi] = err
            fails[lo:hi] = fl
    return errors, fails


def estimate_failure_prob(cfg: TrialConfig, threads: int = 1) -> EstimateWithCI:
    """Fraction of trials whose exact error exceeds eps_acc, with Hoeffding CI."""
    _, fails = run_trials(cfg, threads)
    return EstimateWithCI.from_count(int(fails.sum()), cfg.trials, cfg.gamma)


@dataclass(frozen=True)
class MEstimate:
    m: int
    estimate: EstimateWithCI
    status: str  # "success" | "fail" | "unresolved"


@dataclass(frozen=True)
class SampleComplexityResult:
    """Outcome of the empirical sample-size search.

    m_star is the smallest tested m whose failure CI upper bound fell at or
    below the delta target; bracket[0] is the largest tested m whose CI
    lower bound exceeded delta (0 if none).  Points whose CI straddles delta
    are reported as unresolved, never guessed.
    """

    m_star: int
    bracket: tuple[int, int]
    per_m: tuple[MEstimate, ...]
    delta: float

    @property
    def unresolved_ms(self) -> tuple[int, ...]:
        return tuple(e.m for e in self.per_m if e.status == "unresolved")

    def estimate_at(self, m: int) -> EstimateWithCI | None:
        for e in self.per_m:
            if e.m == m:
                return e.estimate
        return None


def sample_complexity_search(
    cfg: TrialConfig, delta: float, m_max: int, threads: int = 1
) -> SampleComplexityResult:
    """Geometric doubling to bracket, then bisection on m.

    Each tested m gets its own seed substream.  Success at m means the
    failure CI upper bound is <= delta; failure means the lower bound is
    > delta; anything else is recorded as unresolved and the bisection
    moves right without confirming a bracket edge.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError("delta must lie in (0, 1)")
    if m_max < 1:
        raise InvalidParameterError("m_max must be >= 1")
    radius = hoeffding_radius(cfg.trials, cfg.gamma)
    if radius >= delta:
        raise InvalidParameterError(
            f"CI radius {radius:.4f} at {cfg.trials} trials can never certify "
            f"failure <= {delta}; increase trials or delta"
        )

    evaluated: dict[int, MEstimate] = {}

    def evaluate(m: int) -> MEstimate:
        if m not in evaluated:
            sub = replace(cfg, m=m, seed=cfg.seed.substream(m))
            est = estimate_failure_prob(sub, threads)
            if est.upper <= delta:
                status = "success"
            elif est.lower > delta:
                status = "fail"
            else:
                status = "unresolved"
            evaluated[m] = MEstimate(m, est, status)
        return evaluated[m]

    confirmed_lo = 0
    hi: int | None = None
    m = 1
    while m <= m_max:
        e = evaluate(m)
        if e.status == "success":
            hi = m
            break
        if e.status == "fail":
            confirmed_lo = m
        m *= 2
    if hi is None:
        raise SearchBracketError(
            f"no m <= {m_max} reached a failure CI upper bound <= {delta}"
        )

    if hi == 1 and evaluate(0).status == "success":
        hi = 0
    soft_lo = min(confirmed_lo, hi - 1) if hi > 0 else -1
    while hi - soft_lo > 1:
        mid = (soft_lo + hi) // 2
        e = evaluate(mid)
        if e.status == "success":
            hi = mid
        else:
            if e.status == "fail":
                confirmed_lo = mid
            soft_lo = mid
    per_m = tuple(evaluated[k] for k in sorted(evaluated))
    return SampleComplexityResult(hi, (confirmed_lo, hi), per_m, delta)


def lower_bound_m(n: int, eps: float) -> int:
    """The labeled-sample budget floor(ln n / (3 ln(1/eps)))."""
    if n < 2:
        raise InvalidParameterError("n must be >= 2")
    if not 0.0 < eps < 1.0:
        raise InvalidParameterError("eps must lie in (0, 1)")
    return int(math.floor(math.log(n) / (3.0 * math.log(1.0 / eps))))


def in_theorem_regime(n: int, eps: float) -> bool:
    """Whether n >= 600 / eps^3, the regime the separation theorem assumes."""
    return n >= 600.0 / eps**3


def lower_bound_experiment(
    n: int,
    eps: float,
    learner: str,
    trials: int,
    seed: RngSeed,
    gamma: float = 0.01,
    threads: int = 1,
) -> EstimateWithCI:
    """Failure probability of a learner in the matched-pair setting.

    Draws (I, c_I, P_I) at random, gives the learner m = floor(ln n /
    (3 ln(1/eps))) examples, and scores Pr[d > 1/16] with the exact oracle.
    """
    if not 0.0 < eps < 0.25:
        raise InvalidParameterError(f"eps must lie in (0, 1/4), got {eps}")
    if not in_theorem_regime(n, eps):
        warnings.warn(
            f"n={n} is below 600/eps^3 = {600.0 / eps**3:.0f}; "
            "outside the regime the bound assumes",
            stacklevel=2,
        )
    cfg = TrialConfig(
        concept_class=ProjectionClass(n),
        dist=PneFamily(n, eps),
        target=RandomPair(),
        learner=learner,
        m=lower_bound_m(n, eps),
        eps_acc=FAILURE_THRESHOLD_ONE_SIXTEENTH,
        trials=trials,
        seed=seed,
        gamma=gamma,
    )
    return estimate_failure_prob(cfg, threads)


@dataclass(frozen=True)
class KsSummary:
    """Concentration statistics of the candidate-set size K and the count S."""

    n: int
    eps: float
    m: int
    trials: int
    ratio_band: tuple[float, float]
    ratio_in_band: EstimateWithCI
    k_threshold: float
    k_tail: EstimateWithCI
    k_quantiles: tuple[float, float, float, float, float]
    sk_hist_edges: tuple[float, ...]
    sk_hist_counts: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "eps": self.eps,
            "m": self.m,
            "trials": self.trials,
            "ratio_band": list(self.ratio_band),
            "ratio_in_band": self.ratio_in_band.to_json_dict(),
            "k_threshold": self.k_threshold,
            "k_tail": self.k_tail.to_json_dict(),
            "k_quantiles": list(self.k_quantiles),
            "sk_hist_edges": list(self.sk_hist_edges),
            "sk_hist_counts": list(self.sk_hist_counts),
        }


def _ks_chunk(
    n: int, eps: float, m: int, seed: RngSeed, lo: int, hi: int
) -> tuple[np.ndarray, np.ndarray]:
    family = PneFamily(n, eps)
    ks = np.empty(hi - lo, dtype=np.int64)
    ss = np.empty(hi - lo, dtype=np.int64)
    for t in range(lo, hi):
        gen = seed.generator(t)
        i = int(gen.integers(1, n + 1))
        dist = family.member(i)
        words = sample_bit_matrix(dist, m, gen)
        y = _packed_column(words, i)
        sample = LabeledSample(words, y, n)
        mask = sample.column_match_mask()
        z = sample_bit_matrix(dist, 1, gen)[0]
        ks[t - lo] = _popcount(mask)
        ss[t - lo] = _popcount(mask & z)
    return ks, ss


def ks_statistics_experiment(
    n: int,
    eps: float,
    m: int,
    trials: int,
    seed: RngSeed,
    gamma: float = 0.01,
    threads: int = 1,
) -> KsSummary:
    """Simulate (I, X, Y, Z) and summarize K, S and the ratio condition.

    Draw order per trial: I, then the m x n sample, then the test point.
    The band is [eps/2, 6 eps/5] for S/K, and the K tail is measured
    against n^(2/3) / 2.
    """
    if not 0.0 < eps < 0.5:
        raise InvalidParameterError(f"eps must lie in (0, 1/2), got {eps}")
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    workers = resolve_workers(threads)
    if workers <= 1 or trials < 2 * workers:
        ks, ss = _ks_chunk(n, eps, m, seed, 0, trials)
    else:
        bounds = np.linspace(0, trials, 4 * workers + 1, dtype=int)
        spans = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if a < b]
        ks = np.empty(trials, dtype=np.int64)
        ss = np.empty(trials, dtype=np.int64)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            args = list(zip(*spans))
            for (lo, hi), (k_arr, s_arr) in zip(
                spans,
                pool.map(
                    _ks_chunk,
                    [n] * len(spans),
                    [eps] * len(spans),
                    [m] * len(spans),
                    [seed] * len(spans),
                    args[0],
                    args[1],
                ),
            ):
                ks[lo:hi] = k_arr
                ss[lo:hi] = s_arr

    ratio = ss / ks
    band = (eps / 2.0, 6.0 * eps / 5.0)
    in_band = int(np.count_nonzero((ratio >= band[0]) & (ratio <= band[1])))
    k_threshold = n ** (2.0 / 3.0) / 2.0
    k_tail = int(np.count_nonzero(ks >= k_threshold))
    quantiles = tuple(
        float(q) for q in np.quantile(ks, [0.0, 0.25, 0.5, 0.75, 1.0])
    )
    edges = np.linspace(0.0, 1.0, 41)
    counts, _ = np.histogram(ratio, bins=edges)
    return KsSummary(
        n=n,
        eps=eps,
        m=m,
        trials=trials,
        ratio_band=band,
        ratio_in_band=EstimateWithCI.from_count(in_band, trials, gamma),
        k_threshold=k_threshold,
        k_tail=EstimateWithCI.from_count(k_tail, trials, gamma),
        k_quantiles=quantiles,
        sk_hist_edges=tuple(float(e) for e in edges),
        sk_hist_counts=tuple(int(c) for c in counts),
    )


@dataclass(frozen=True)
class NoGapRow:
    """Per-m outcome of the missing-mass experiment on the all-functions class."""

    m: int
    trials: int
    violations: int
    threshold: float
    z_ge_rate: EstimateWithCI
    fail_rate: EstimateWithCI
    mean_missing_mass: float

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "trials": self.trials,
            "violations": self.violations,
            "threshold": self.threshold,
            "z_ge_rate": self.z_ge_rate.to_json_dict(),
            "fail_rate": self.fail_rate.to_json_dict(),
            "mean_missing_mass": self.mean_missing_mass,
        }


def no_gap_experiment(
    dist: FiniteSupportDistribution,
    m_grid: Sequence[int],
    trials: int,
    eps_acc: float,
    seed: RngSeed,
    gamma: float = 0.01,
    default_bit: int = 0,
) -> tuple[NoGapRow, ...]:
    """Memorizer vs missing mass over random all-functions targets.

    For every trial the exact rational comparison d_P(memorizer, target)
    <= Z is checked (Z is the missing mass of the drawn sample), and the
    failure rate at threshold 2 * eps_acc is reported next to Pr[Z >=
    2 * eps_acc], which bounds it.
    """
    d = len(dist.support)
    if d > 12:
        raise InvalidParameterError("exact enumeration is capped at 12 domain points")
    if eps_acc <= 0.0:
        raise InvalidParameterError("eps_acc must be positive")
    cls = all_functions_class(dist.support)
    threshold = 2.0 * eps_acc
    threshold_frac = Fraction(threshold)
    prob_fracs = [Fraction(float(p)) for p in dist.probs]
    rows = []
    for m in m_grid:
        if m < 0:
            raise InvalidParameterError("m must be non-negative")
        sub = seed.substream(m)
        violations = 0
        z_ge = 0
        failures = 0
        z_total = 0.0
        for t in range(trials):
            gen = sub.generator(t)
            target_mask = int(gen.integers(0, 1 << d))
            idx = sample_support_indices(dist, m, gen)
            points = [dist.support[int(u)] for u in idx]
            labels = [(target_mask >> cls.domain_position(p)) & 1 for p in points]
            sample = (
                LabeledSample.from_points(points, labels)
                if points
                else LabeledSample.empty(dist.n)
            )
            predictor = consistent_memorizer(sample, default_bit)
            d_frac = Fraction(0)
            for u, p in enumerate(dist.support):
                truth = (target_mask >> cls.domain_position(p)) & 1
                if predictor.predict(p) != truth:
                    d_frac += prob_fracs[u]
            z_frac = missing_mass_fraction(dist, points)
            if d_frac > z_frac:
                violations += 1
            if z_frac >= threshold_frac:
                z_ge += 1
            if d_frac > threshold_frac:
                failures += 1
            z_total += float(z_frac)
        rows.append(
            NoGapRow(
                m=m,
                trials=trials,
                violations=violations,
                threshold=threshold,
                z_ge_rate=EstimateWithCI.from_count(z_ge, trials, gamma),
                fail_rate=EstimateWithCI.from_count(failures, trials, gamma),
                mean_missing_mass=z_total / trials,
            )
        )
    return tuple(rows)


def tail_inequality_check(values: Sequence[float], t: float) -> bool:
    """Verify Pr[V > t] >= (E[V] - t) / (1 - t) on the empirical distribution.

    Holds for any distribution supported on (-inf, 1]; evaluated in exact
    rational arithmetic so the check is tolerance-free.
    """
    if not 0.0 <= t < 1.0:
        raise InvalidParameterError("t must lie in [0, 1)")
    vals = list(values)
    if not vals:
        raise InvalidParameterError("need at least one value")
    for v in vals:
        if v > 1.0:
            raise InvalidParameterError(f"value {v} exceeds 1")
    n = len(vals)
    t_frac = Fraction(float(t))
    mean = sum((Fraction(float(v)) for v in vals), Fraction(0)) / n
    prob_gt = Fraction(sum(1 for v in vals if Fraction(float(v)) > t_frac), n)
    return prob_gt >= (mean - t_frac) / (1 - t_frac)
