"""Disagreement pseudo-metric, greedy packing covers, and the cover/sample-size formulas."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .concepts import (
    ConceptClass,
    ConceptId,
    ProjectionClass,
    TableClass,
    eval_concept,
)
from .distributions import (
    Distribution,
    FiniteSupportDistribution,
    ProductDistribution,
    RngSeed,
    sample_bit_matrix,
    sample_support_indices,
)
from .errors import (
    InvalidParameterError,
    OracleUnavailableError,
    PointNotInDomainError,
)


def hoeffding_radius(trials: int, gamma: float) -> float:
    """Two-sided Hoeffding deviation at confidence 1 - gamma for a [0,1] mean."""
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    if not 0.0 < gamma < 1.0:
        raise InvalidParameterError("gamma must lie in (0, 1)")
    return math.sqrt(math.log(2.0 / gamma) / (2.0 * trials))


@dataclass(frozen=True)
class EstimateWithCI:
    """A Monte Carlo probability estimate with a two-sided Hoeffding radius."""

    estimate: float
    radius: float
    trials: int
    gamma: float

    @classmethod
    def from_count(cls, count: int, trials: int, gamma: float) -> "EstimateWithCI":
        return cls(count / trials, hoeffding_radius(trials, gamma), trials, gamma)

    @property
    def lower(self) -> float:
        return max(0.0, self.estimate - self.radius)

    @property
    def upper(self) -> float:
        return min(1.0, self.estimate + self.radius)

    def to_json_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "radius": self.radius,
            "trials": self.trials,
            "gamma": self.gamma,
        }


@dataclass(frozen=True)
class CoverResult:
    """A greedy packing (hence cover) at a given level, with a verification certificate.

    certificate is the maximum over all concepts of the distance to the
    nearest member; it is at most `level` whenever the exact verification
    pass ran.
    """

    members: tuple[ConceptId, ...]
    level: float
    certificate: float | None = None

    @property
    def size(self) -> int:
        return len(self.members)

    def member_indices(self) -> tuple[int, ...]:
        return tuple(c.index for c in self.members)

    def to_json_dict(self) -> dict:
        return {
            "members": [{"kind": c.kind, "index": c.index} for c in self.members],
            "level": self.level,
            "certificate": self.certificate,
        }


def disagreement_exact_projections(dist: ProductDistribution, a: int, b: int) -> float:
    """Pr[X[a] != X[b]] under a product distribution: p_a(1-p_b) + (1-p_a)p_b.

    The product form needs independent coordinates, so a == b is handled
    separately (identical concepts never disagree).
    """
    pa = dist.marginal(a)
    pb = dist.marginal(b)
    if a == b:
        return 0.0
    return pa + pb - 2.0 * pa * pb


def disagreement_enumerate(
    cls: TableClass,
    dist: FiniteSupportDistribution,
    a: ConceptId,
    b: ConceptId,
) -> float:
    """Exact disagreement mass, summed over the distribution's support."""
    ta = cls.table_mask(a)
    tb = cls.table_mask(b)
    total = 0.0
    for t, p in enumerate(dist.support):
        pos = cls.domain_position(p)
        if ((ta >> pos) ^ (tb >> pos)) & 1:
            total += float(dist.probs[t])
    return total


def exact_distance_fn(
    cls: ConceptClass, dist: Distribution
) -> Callable[[ConceptId, ConceptId], float]:
    """The exact disagreement oracle for a class/distribution pairing."""
    if isinstance(cls, ProjectionClass) and isinstance(dist, ProductDistribution):
        return lambda a, b: disagreement_exact_projections(dist, a.index, b.index)
    if isinstance(cls, TableClass) and isinstance(dist, FiniteSupportDistribution):
        for p in dist.support:
            cls.domain_position(p)  # raises PointNotInDomainError if absent
        return lambda a, b: disagreement_enumerate(cls, dist, a, b)
    raise OracleUnavailableError(
        f"no exact oracle for {type(cls).__name__} under {type(dist).__name__}"
    )


def disagreement_mc(
    cls: ConceptClass,
    dist: Distribution,
    a: ConceptId,
    b: ConceptId,
    trials: int,
    gamma: float,
    seed: RngSeed,
) -> EstimateWithCI:
    """Unbiased Monte Carlo estimate of the disagreement, for cross-validation only."""
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    gen = seed.generator(0)
    if isinstance(cls, ProjectionClass) and isinstance(dist, ProductDistribution):
        words = sample_bit_matrix(dist, trials, gen)
        ja, jb = a.index - 1, b.index - 1
        ba = (words[:, ja // 64] >> np.uint64(ja % 64)) & np.uint64(1)
        bb = (words[:, jb // 64] >> np.uint64(jb % 64)) & np.uint64(1)
        count = int(np.count_nonzero(ba != bb))
    elif isinstance(cls, TableClass) and isinstance(dist, FiniteSupportDistribution):
        idx = sample_support_indices(dist, trials, gen)
        pos = np.array(
            [cls.domain_position(p) for p in dist.support], dtype=np.uint64
        )[idx]
        ta = np.uint64(cls.table_mask(a))
        tb = np.uint64(cls.table_mask(b))
        count = int(np.count_nonzero(((ta >> pos) ^ (tb >> pos)) & np.uint64(1)))
    else:
        raise OracleUnavailableError(
            f"cannot sample {type(cls).__name__} under {type(dist).__name__}"
        )
    return EstimateWithCI.from_count(count, trials, gamma)


def _distance_rows_projections(
    dist: ProductDistribution, member: int
) -> np.ndarray:
    p = dist.marginals
    pm = dist.marginal(member)
    out = p + pm - 2.0 * p * pm
    out[member - 1] = 0.0
    return out


def _distance_rows_tables(
    cls: TableClass, dist: FiniteSupportDistribution, member: ConceptId
) -> np.ndarray:
    tables = np.fromiter(
        (int(t) for t in cls.tables), dtype=np.uint64, count=cls.num_concepts
    )
    tm = np.uint64(cls.table_mask(member))
    weights = np.zeros(cls.domain_size, dtype=np.float64)
    for t, p in enumerate(dist.support):
        weights[cls.domain_position(p)] += float(dist.probs[t])
    diff = tables ^ tm
    dist_vec = np.zeros(cls.num_concepts, dtype=np.float64)
    for pos in range(cls.domain_size):
        if weights[pos]:
            dist_vec += weights[pos] * ((diff >> np.uint64(pos)) & np.uint64(1))
    return dist_vec


def _all_member_distances(
    cls: ConceptClass, dist: Distribution, member: ConceptId
) -> np.ndarray:
    """Distances from one member to every concept of the class, vectorized."""
    if isinstance(cls, ProjectionClass):
        return _distance_rows_projections(dist, member.index)
    return _distance_rows_tables(cls, dist, member)


def greedy_packing_cover(
    cls: ConceptClass,
    dist: Distribution,
    eps: float,
    distance: Callable[[ConceptId, ConceptId], float] | None = None,
) -> CoverResult:
    """Maximal packing by an ascending-index greedy scan; it is also an eps-cover.

    A concept is admitted iff its distance to every member so far is
    strictly above eps.  A second pass computes the cover certificate
    max_c min_member d(c, member).
    """
    if eps < 0:
        raise InvalidParameterError("cover level must be non-negative")
    n = cls.num_concepts
    if n == 0:
        raise InvalidParameterError("cannot cover an empty class")
    kind = "projection" if isinstance(cls, ProjectionClass) else "table"
    if distance is None:
        exact_distance_fn(cls, dist)  # validate the pairing up front
        # Sequential-scan semantics, vectorized: min_dist[j] tracks the
        # distance from concept j+1 to the members admitted so far.
        min_dist = np.full(n, np.inf)
        members: list[ConceptId] = []
        j = 0
        while j < n:
            if min_dist[j] > eps:
                cid = ConceptId(kind, j + 1)
                members.append(cid)
                min_dist = np.minimum(min_dist, _all_member_distances(cls, dist, cid))
            j += 1
        certificate = float(min_dist.max())
        return CoverResult(tuple(members), float(eps), certificate)
    members = []
    for j in range(1, n + 1):
        cid = ConceptId(kind, j)
        if all(distance(cid, m) > eps for m in members):
            members.append(cid)
    certificate = 0.0
    for j in range(1, n + 1):
        cid = ConceptId(kind, j)
        certificate = max(certificate, min(distance(cid, m) for m in members))
    return CoverResult(tuple(members), float(eps), float(certificate))


def pne_small_cover(n: int, eps: float, i: int) -> CoverResult:
    """The greedy 2eps-level cover of the projections under P_i, in closed form.

    Matches greedy_packing_cover(C_n, P_i, 2*eps) exactly: {c_1, c_i} for
    i >= 2, {c_1, c_2} for i = 1, collapsing to {c_1} when 2*eps >= 1/2.
    """
    if n < 2:
        raise InvalidParameterError("the family needs n >= 2")
    if not 0.0 < eps < 0.5:
        raise InvalidParameterError(f"eps must lie in (0, 1/2), got {eps}")
    if not 1 <= i <= n:
        raise InvalidParameterError(f"special index {i} out of range 1..{n}")
    level = 2.0 * eps
    off_diag = 2.0 * eps * (1.0 - eps)
    if level < 0.5:
        second = i if i >= 2 else 2
        members = (ConceptId("projection", 1), ConceptId("projection", second))
        certificate = 0.0 if n == 2 else off_diag
    else:
        members = (ConceptId("projection", 1),)
        certificate = 0.5
    return CoverResult(members, level, certificate)


def sauer_bound(sample_size: int, d: int) -> int:
    """Sum of binomial coefficients C(K, 0) + ... + C(K, d), exactly."""
    if sample_size < 0 or d < 0:
        raise InvalidParameterError("arguments must be non-negative")
    return sum(math.comb(sample_size, i) for i in range(min(d, sample_size) + 1))


def sauer_estimate(sample_size: int, d: int) -> float:
    """The (Ke/d)^d upper estimate for the binomial sum; needs K >= d >= 1."""
    if d < 1:
        raise InvalidParameterError("the estimate needs d >= 1")
    if sample_size < d:
        raise InvalidParameterError("the estimate needs sample_size >= d")
    return math.exp(d * (1.0 + math.log(sample_size) - math.log(d)))


class DudleyBound(NamedTuple):
    value: float
    log_value: float


def dudley_cover_bound(eps: float, d: int) -> DudleyBound:
    """(4e/eps)^(d/(1-1/e)) cover-size bound, with its natural log alongside."""
    if not 0.0 < eps <= 1.0:
        raise InvalidParameterError(f"eps must lie in (0, 1], got {eps}")
    if d < 0:
        raise InvalidParameterError("VC dimension must be non-negative")
    exponent = d / (1.0 - 1.0 / math.e)
    log_value = exponent * math.log(4.0 * math.e / eps)
    try:
        value = math.exp(log_value)
    except OverflowError:
        value = math.inf
    return DudleyBound(value, log_value)


def benedek_itai_m(cover_size: int, eps: float, delta: float) -> int:
    """Labeled examples sufficient for the cover learner: ceil(48(ln N + ln(1/delta))/eps)."""
    if cover_size < 1:
        raise InvalidParameterError("cover size must be >= 1")
    if not 0.0 < eps <= 1.0:
        raise InvalidParameterError(f"eps must lie in (0, 1], got {eps}")
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(48.0 * (math.log(cover_size) + math.log(1.0 / delta)) / eps)


def corollary_m(eps: float, delta: float) -> int:
    """ceil(12 ln(2/delta)/eps): the size-2-cover specialisation at accuracy 4*eps."""
    if not 0.0 < eps < 0.5:
        raise InvalidParameterError(f"eps must lie in (0, 1/2), got {eps}")
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil(12.0 * math.log(2.0 / delta) / eps)


def kl_bernoulli(x: float, y: float) -> float:
    """KL(x || y) between Bernoulli parameters, with the 0 log 0 = 0 convention."""
    if not 0.0 <= x <= 1.0 or not 0.0 <= y <= 1.0:
        raise InvalidParameterError("KL arguments must lie in [0, 1]")
    if x == y:
        return 0.0
    total = 0.0
    if x > 0.0:
        if y == 0.0:
            return math.inf
        total += x * math.log(x / y)
    if x < 1.0:
        if y == 1.0:
            return math.inf
        total += (1.0 - x) * math.log((1.0 - x) / (1.0 - y))
    return total


def kl_lower_bound_check(x: float, y: float) -> bool:
    """Whether KL(x || y) >= (x - y)^2 / (2 max{x, y})."""
    if x == y:
        return True
    return kl_bernoulli(x, y) >= (x - y) ** 2 / (2.0 * max(x, y))
