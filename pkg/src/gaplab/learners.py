"""Learners: ERM, the cover learner, the posterior rule for projections, the memorizer.

A labeled sample is held as a bit-packed m x n matrix plus an m-vector of
labels, matching the matrix view of the hypercube experiments: row r is the
r-th unlabeled example, column j collects coordinate j across the sample.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .concepts import (
    ConceptClass,
    ConceptId,
    Point,
    ProjectionClass,
    TableClass,
    eval_concept,
    full_mask_words,
    pack_bit_rows,
    unpack_bit_rows,
    words_needed,
)
from .errors import (
    DimensionMismatchError,
    InconsistentSampleError,
    InvalidParameterError,
)
from .metric_cover import CoverResult

# Row-block budget for the dense mistake-count fallback.
_DENSE_CELL_BUDGET = 1 << 26


class LabeledSample:
    """m labeled points: packed point matrix X (m rows) and label vector Y."""

    __slots__ = ("n", "words", "labels")

    def __init__(self, words: np.ndarray, labels: np.ndarray, n: int):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        labels = np.ascontiguousarray(labels, dtype=np.uint8)
        if words.ndim != 2 or words.shape[1] != words_needed(n):
            raise InvalidParameterError("packed matrix shape does not match n")
        if labels.shape != (words.shape[0],):
            raise InvalidParameterError("labels must align with the points")
        if labels.size and labels.max() > 1:
            raise InvalidParameterError("labels must be bits")
        words.setflags(write=False)
        labels.setflags(write=False)
        self.n = n
        self.words = words
        self.labels = labels

    @classmethod
    def from_points(cls, points: Sequence[Point], labels: Sequence[int]) -> "LabeledSample":
        if len(points) != len(labels):
            raise InvalidParameterError("points and labels must have equal length")
        if not points:
            raise InvalidParameterError("dimension is ambiguous for an empty sample; use empty(n)")
        n = points[0].n
        if any(p.n != n for p in points):
            raise DimensionMismatchError("sample points must share a dimension")
        words = np.stack([p.words for p in points])
        return cls(words, np.asarray(labels, dtype=np.uint8), n)

    @classmethod
    def empty(cls, n: int) -> "LabeledSample":
        return cls(np.zeros((0, words_needed(n)), dtype=np.uint64), np.zeros(0, dtype=np.uint8), n)

    @property
    def m(self) -> int:
        return int(self.words.shape[0])

    def point(self, r: int) -> Point:
        return Point(self.words[r].copy(), self.n)

    def points(self) -> list[Point]:
        return [self.point(r) for r in range(self.m)]

    def is_self_consistent(self) -> bool:
        seen: dict[bytes, int] = {}
        for r in range(self.m):
            key = self.words[r].tobytes()
            y = int(self.labels[r])
            if seen.setdefault(key, y) != y:
                return False
        return True

    def column(self, j: int) -> np.ndarray:
        """Bits of coordinate j (1-based) across the sample rows."""
        if not 1 <= j <= self.n:
            raise InvalidParameterError(f"coordinate {j} out of range 1..{self.n}")
        j -= 1
        return ((self.words[:, j // 64] >> np.uint64(j % 64)) & np.uint64(1)).astype(np.uint8)

    def column_match_mask(self) -> np.ndarray:
        """Packed mask over coordinates whose column equals the label vector.

        This is the candidate-index set of the posterior analysis: coordinate
        j survives iff bit j of every row r equals label r.  O(m * n / 64).
        """
        acc = full_mask_words(self.n).copy()
        for r in range(self.m):
            row = self.words[r]
            acc &= row if self.labels[r] else ~row
        return acc


def k_set_indices(sample: LabeledSample) -> np.ndarray:
    """Sorted 1-based coordinates whose column equals the labels."""
    mask = sample.column_match_mask()
    bits = unpack_bit_rows(mask, sample.n)[0]
    return np.flatnonzero(bits).astype(np.int64) + 1


def _first_set_index(mask: np.ndarray) -> int | None:
    """1-based position of the lowest set bit of a packed mask, or None."""
    nz = np.flatnonzero(mask)
    if nz.size == 0:
        return None
    w = int(nz[0])
    word = int(mask[w])
    return w * 64 + (word & -word).bit_length()


def mistake_count(cls: ConceptClass, cid: ConceptId, sample: LabeledSample) -> int:
    """Number of sample rows the concept labels differently from Y."""
    if isinstance(cls, ProjectionClass):
        if sample.n != cls.n:
            raise DimensionMismatchError("sample dimension does not match the class")
        if not 1 <= cid.index <= cls.n or cid.kind != "projection":
            raise InvalidParameterError(f"bad projection id {cid}")
        col = sample.column(cid.index)
        return int(np.count_nonzero(col != sample.labels))
    mask = cls.table_mask(cid)
    mistakes = 0
    for r in range(sample.m):
        pos = cls.domain_position(sample.point(r))
        if ((mask >> pos) & 1) != int(sample.labels[r]):
            mistakes += 1
    return mistakes


def empirical_error(cls: ConceptClass, cid: ConceptId, sample: LabeledSample) -> Fraction:
    """err_T(c): the fraction of sample labels the concept gets wrong; 0 on empty samples."""
    if sample.m == 0:
        return Fraction(0)
    return Fraction(mistake_count(cls, cid, sample), sample.m)


def _projection_mistake_counts(sample: LabeledSample) -> np.ndarray:
    """Mistake count of every projection, blocked to bound the dense buffer."""
    n = sample.n
    counts = np.zeros(n, dtype=np.int64)
    block = max(1, _DENSE_CELL_BUDGET // max(n, 1))
    for lo in range(0, sample.m, block):
        hi = min(sample.m, lo + block)
        bits = unpack_bit_rows(sample.words[lo:hi], n)
        counts += (bits != sample.labels[lo:hi, None]).sum(axis=0)
    return counts


def erm(cls: ConceptClass, sample: LabeledSample) -> ConceptId:
    """Concept of minimal empirical error, ties broken by lowest index.

    For projections the realizable case is resolved in O(m n / 64) by the
    column-match mask; the dense count fallback only runs when no column
    matches the labels exactly.
    """
    if cls.num_concepts == 0:
        raise InvalidParameterError("cannot run ERM over an empty class")
    if isinstance(cls, ProjectionClass):
        if sample.n != cls.n:
            raise DimensionMismatchError("sample dimension does not match the class")
        first = _first_set_index(sample.column_match_mask())
        if first is not None:
            return ConceptId("projection", first)
        counts = _projection_mistake_counts(sample)
        return ConceptId("projection", int(np.argmin(counts)) + 1)
    ones = np.zeros(cls.domain_size, dtype=np.int64)
    zeros = np.zeros(cls.domain_size, dtype=np.int64)
    for r in range(sample.m):
        pos = cls.domain_position(sample.point(r))
        if sample.labels[r]:
            ones[pos] += 1
        else:
            zeros[pos] += 1
    tables = np.fromiter(
        (int(t) for t in cls.tables), dtype=np.uint64, count=cls.num_concepts
    )
    mistakes = np.zeros(cls.num_concepts, dtype=np.int64)
    for pos in range(cls.domain_size):
        bit = (tables >> np.uint64(pos)) & np.uint64(1)
        mistakes += np.where(bit == 1, zeros[pos], ones[pos])
    return ConceptId("table", int(np.argmin(mistakes)) + 1)


def cover_learner(cls: ConceptClass, cover: CoverResult, sample: LabeledSample) -> ConceptId:
    """argmin of empirical error over the cover members, ties to the lowest index."""
    if not cover.members:
        raise InvalidParameterError("cover must be non-empty")
    best: ConceptId | None = None
    best_mistakes = -1
    for cid in sorted(cover.members, key=lambda c: c.index):
        mk = mistake_count(cls, cid, sample)
        if best is None or mk < best_mistakes:
            best, best_mistakes = cid, mk
    return best


@dataclass(frozen=True)
class PosteriorState:
    """What the posterior rule retains from a sample: the candidate index set.

    k_set holds the 1-based coordinates whose sample column equals the label
    vector; eps is the off-coordinate marginal of the distribution family;
    m is the sample size and n the ambient dimension.
    """

    k_set: tuple[int, ...]
    eps: float
    m: int
    n: int

    def __post_init__(self):
        if not self.k_set:
            raise InconsistentSampleError("no column matches the labels")
        if list(self.k_set) != sorted(set(self.k_set)):
            raise InvalidParameterError("k_set must be sorted and duplicate-free")
        if not 0.0 < self.eps < 0.5:
            raise InvalidParameterError(f"eps must lie in (0, 1/2), got {self.eps}")

    @property
    def k_size(self) -> int:
        return len(self.k_set)


def posterior_state(sample: LabeledSample, eps: float) -> PosteriorState:
    idx = k_set_indices(sample)
    if idx.size == 0:
        raise InconsistentSampleError(
            "sample is inconsistent with every projection (empty candidate set)"
        )
    return PosteriorState(tuple(int(i) for i in idx), eps, sample.m, sample.n)


def posterior_over_index(sample: LabeledSample) -> list[tuple[int, float]]:
    """Posterior of the hidden index given (X, Y): uniform on the matching columns."""
    idx = k_set_indices(sample)
    if idx.size == 0:
        raise InconsistentSampleError(
            "sample is inconsistent with every projection (empty candidate set)"
        )
    w = 1.0 / idx.size
    return [(int(i), w) for i in idx]


def posterior_mean_label(k_size: int, s: int, eps: float) -> float:
    """E[target label | sample, test point] as a function of K = |k_set| and S.

    S counts the candidate coordinates that are 1 at the test point; when no
    candidate fires the conditional mean is 0 by direct computation.
    """
    if s == 0:
        return 0.0
    return (1.0 - eps) / (1.0 - 2.0 * eps + k_size * eps / s)


def bayes_posterior_predict(state: PosteriorState, z: Point) -> int:
    """Threshold the posterior mean at 1/2 (ties predict 1)."""
    if z.n != state.n:
        raise DimensionMismatchError(f"point has n={z.n}, state has n={state.n}")
    s = sum(z.bit(i) for i in state.k_set)
    return 1 if posterior_mean_label(state.k_size, s, state.eps) >= 0.5 else 0


def posterior_threshold(state: PosteriorState) -> int:
    """Smallest S for which the rule predicts 1, or K + 1 if it never does.

    The posterior mean is nondecreasing in S, so binary search against the
    same decision used by bayes_posterior_predict is exact.
    """
    k = state.k_size
    if posterior_mean_label(k, k, state.eps) < 0.5:
        return k + 1
    lo, hi = 1, k
    while lo < hi:
        mid = (lo + hi) // 2
        if posterior_mean_label(k, mid, state.eps) >= 0.5:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True)
class ConceptPredictor:
    """A predictor that is just a concept of the class."""

    cls: ConceptClass
    cid: ConceptId

    def predict(self, x: Point) -> int:
        return eval_concept(self.cls, self.cid, x)

    __call__ = predict


class MemorizerPredictor:
    """Memorized sample labels with a default bit elsewhere."""

    __slots__ = ("mapping", "default", "n")

    def __init__(self, mapping: dict[Point, int], default: int, n: int):
        self.mapping = mapping
        self.default = default
        self.n = n

    def predict(self, x: Point) -> int:
        if x.n != self.n:
            raise DimensionMismatchError(f"point has n={x.n}, predictor has n={self.n}")
        return self.mapping.get(x, self.default)

    __call__ = predict


@dataclass(frozen=True)
class PosteriorPredictor:
    """The distribution-independent posterior rule as a total predictor."""

    state: PosteriorState

    def predict(self, x: Point) -> int:
        return bayes_posterior_predict(self.state, x)

    __call__ = predict


Predictor = ConceptPredictor | MemorizerPredictor | PosteriorPredictor


def consistent_memorizer(sample: LabeledSample, default: int = 0) -> MemorizerPredictor:
    """Predictor that repeats the sample labels and answers `default` elsewhere."""
    if default not in (0, 1):
        raise InvalidParameterError("default must be a bit")
    mapping: dict[Point, int] = {}
    for r in range(sample.m):
        p = sample.point(r)
        y = int(sample.labels[r])
        if mapping.setdefault(p, y) != y:
            raise InconsistentSampleError(f"conflicting labels for {p!r}")
    return MemorizerPredictor(mapping, default, sample.n)


def bayes_bit_predictor(joint: np.ndarray) -> tuple[np.ndarray, float]:
    """Best deterministic bit predictor from a finite joint table Pr[U=u, V=v].

    joint has shape (|U|, 2).  Returns the per-u majority predictions (ties
    predict 1) and the resulting error, which equals
    sum_u min(Pr[u, 0], Pr[u, 1]) and lower-bounds every predictor.
    """
    joint = np.ascontiguousarray(joint, dtype=np.float64)
    if joint.ndim != 2 or joint.shape[1] != 2 or joint.shape[0] < 1:
        raise InvalidParameterError("joint table must have shape (|U|, 2)")
    if np.any(joint < 0.0) or abs(float(joint.sum()) - 1.0) > 1e-9:
        raise InvalidParameterError("joint table must be non-negative and sum to 1")
    predictions = (joint[:, 1] >= joint[:, 0]).astype(np.uint8)
    error = float(np.minimum(joint[:, 0], joint[:, 1]).sum())
    return predictions, error
