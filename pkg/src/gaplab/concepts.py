"""Hypercube points, projection and truth-table concept classes, shattering, VC dimension.

Concept and coordinate indices are 1-based on the public surface (c_1 .. c_n,
x[1] .. x[n]); everything is 0-based internally.  Points are bit-packed into
64-bit words, little-endian within each word, so that coordinate j (1-based)
lives at bit (j-1) % 64 of word (j-1) // 64.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidParameterError,
    PointNotInDomainError,
)

WORD_BITS = 64

# Fixed seed for the default random padding of the VC search universe.  The
# op takes no RNG argument, so the default universe must be a pure function
# of the class.
_VC_UNIVERSE_SEED = 0x5EED_C0DE
_VC_UNIVERSE_RANDOM_POINTS = 64

# Guard for the label matrix materialized by the VC search.
_VC_LABEL_CELL_LIMIT = 1 << 28


def words_needed(n: int) -> int:
    return (n + WORD_BITS - 1) // WORD_BITS


def full_mask_words(n: int) -> np.ndarray:
    """All-ones mask for n bits: trailing bits of the last word are zero."""
    w = words_needed(n)
    mask = np.full(w, ~np.uint64(0), dtype=np.uint64)
    rem = n % WORD_BITS
    if w and rem:
        mask[-1] = np.uint64((1 << rem) - 1)
    return mask


def pack_bit_rows(bits: np.ndarray) -> np.ndarray:
    """Pack a (rows, n) array of 0/1 values into (rows, words) uint64.

    Bit (j % 64) of word (j // 64) holds column j; padding bits are zero.
    """
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    if bits.ndim != 2:
        raise InvalidParameterError("expected a 2-d bit array")
    rows, n = bits.shape
    w = words_needed(n)
    packed = np.packbits(bits, axis=1, bitorder="little")
    if packed.shape[1] < w * 8:
        pad = np.zeros((rows, w * 8 - packed.shape[1]), dtype=np.uint8)
        packed = np.concatenate([packed, pad], axis=1)
    return packed.view("<u8")


def unpack_bit_rows(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of pack_bit_rows: (rows, words) uint64 -> (rows, n) uint8."""
    words = np.ascontiguousarray(words, dtype=np.uint64)
    if words.ndim == 1:
        words = words[None, :]
    raw = words.view(np.uint8)
    bits = np.unpackbits(raw, axis=1, bitorder="little")
    return bits[:, :n]


class Point:
    """An immutable point of the Boolean hypercube {0,1}^n, bit-packed."""

    __slots__ = ("n", "words", "_key")

    def __init__(self, words: np.ndarray, n: int):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if n < 0 or words.shape != (words_needed(n),):
            raise InvalidParameterError(
                f"word buffer shape {words.shape} does not match n={n}"
            )
        rem = n % WORD_BITS
        if n and rem and int(words[-1]) >> rem:
            raise InvalidParameterError("bits beyond n must be zero")
        words.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "_key", (n, words.tobytes()))

    def __setattr__(self, *_):
        raise AttributeError("Point is immutable")

    def __reduce__(self):
        # Required because the immutability guard breaks slot-state pickling.
        return (Point, (np.asarray(self.words), self.n))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Point":
        arr = np.fromiter((1 if b else 0 for b in bits), dtype=np.uint8)
        return cls(pack_bit_rows(arr[None, :])[0], arr.size)

    @classmethod
    def from_string(cls, s: str) -> "Point":
        if set(s) - {"0", "1"}:
            raise InvalidParameterError(f"not a 0/1 string: {s!r}")
        return cls.from_bits(int(ch) for ch in s)

    @classmethod
    def from_int(cls, value: int, n: int) -> "Point":
        """Point whose coordinate j (1-based) is bit j-1 of `value`."""
        if value < 0 or value >> n:
            raise InvalidParameterError(f"value {value} does not fit in {n} bits")
        w = words_needed(n)
        words = np.array(
            [(value >> (WORD_BITS * k)) & 0xFFFFFFFFFFFFFFFF for k in range(w)],
            dtype=np.uint64,
        )
        return cls(words, n)

    @classmethod
    def zeros(cls, n: int) -> "Point":
        return cls(np.zeros(words_needed(n), dtype=np.uint64), n)

    def bit(self, j: int) -> int:
        """Coordinate x[j], 1-based."""
        if not 1 <= j <= self.n:
            raise DimensionMismatchError(f"coordinate {j} out of range 1..{self.n}")
        j -= 1
        return (int(self.words[j // WORD_BITS]) >> (j % WORD_BITS)) & 1

    def weight(self) -> int:
        """Number of ones (the norm of the point)."""
        return int(np.bitwise_count(self.words).sum())

    def to_string(self) -> str:
        return "".join(str(b) for b in unpack_bit_rows(self.words, self.n)[0])

    def __eq__(self, other) -> bool:
        return isinstance(other, Point) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        if self.n <= 32:
            return f"Point({self.to_string()!r})"
        return f"Point(n={self.n}, weight={self.weight()})"


@dataclass(frozen=True)
class ConceptId:
    """A concept inside a class: kind tag plus 1-based index."""

    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in ("projection", "table"):
            raise InvalidParameterError(f"unknown concept kind {self.kind!r}")
        if self.index < 1:
            raise InvalidParameterError("concept index is 1-based")


@dataclass(frozen=True)
class ProjectionClass:
    """The class C_n of the n coordinate projections over {0,1}^n."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError("projection class needs n >= 1")

    @property
    def num_concepts(self) -> int:
        return self.n

    def concept(self, i: int) -> ConceptId:
        if not 1 <= i <= self.n:
            raise InvalidParameterError(f"projection index {i} out of range 1..{self.n}")
        return ConceptId("projection", i)

    def concept_ids(self) -> Iterable[ConceptId]:
        return (ConceptId("projection", i) for i in range(1, self.n + 1))

    def to_json_dict(self) -> dict:
        return {"kind": "projections", "n": self.n}


class TableClass:
    """A finite concept class given by explicit truth tables over a fixed domain.

    Each table is an integer mask: bit t (LSB = 0) is the concept's value on
    domain[t].  `tables` may be a lazy range (used for the all-functions
    class) or an explicit list.
    """

    __slots__ = ("domain", "tables", "_index")

    def __init__(self, domain: Sequence[Point], tables: Sequence[int]):
        domain = tuple(domain)
        if domain:
            n = domain[0].n
            if any(p.n != n for p in domain):
                raise DimensionMismatchError("domain points must share a dimension")
        index = {p: t for t, p in enumerate(domain)}
        if len(index) != len(domain):
            raise InvalidParameterError("domain points must be pairwise distinct")
        d = len(domain)
        limit = 1 << d
        if isinstance(tables, range):
            if len(tables) and not (
                tables.step > 0 and 0 <= tables[0] and tables[-1] < limit
            ):
                raise InvalidParameterError(f"table range does not fit {d} domain bits")
        else:
            tables = tuple(int(t) for t in tables)
            for tbl in tables:
                if not 0 <= tbl < limit:
                    raise InvalidParameterError(f"table {tbl} does not fit {d} domain bits")
        self.domain = domain
        self.tables = tables
        self._index = index

    @property
    def domain_size(self) -> int:
        return len(self.domain)

    @property
    def num_concepts(self) -> int:
        return len(self.tables)

    def concept(self, i: int) -> ConceptId:
        if not 1 <= i <= self.num_concepts:
            raise InvalidParameterError(
                f"table index {i} out of range 1..{self.num_concepts}"
            )
        return ConceptId("table", i)

    def concept_ids(self) -> Iterable[ConceptId]:
        return (ConceptId("table", i) for i in range(1, self.num_concepts + 1))

    def table_mask(self, cid: ConceptId) -> int:
        if cid.kind != "table":
            raise InvalidParameterError(f"expected a table concept, got {cid.kind}")
        if not 1 <= cid.index <= self.num_concepts:
            raise InvalidParameterError(f"table index {cid.index} out of range")
        return int(self.tables[cid.index - 1])

    def domain_position(self, x: Point) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise PointNotInDomainError(f"{x!r} is not in the table domain") from None

    def table_from_string(self, s: str) -> int:
        """Mask for a table written as a 0/1 string over the domain in order."""
        if len(s) != self.domain_size or set(s) - {"0", "1"}:
            raise InvalidParameterError(f"table string must be 0/1 of length {self.domain_size}")
        return sum(1 << t for t, ch in enumerate(s) if ch == "1")

    def table_to_string(self, mask: int) -> str:
        return "".join(str((mask >> t) & 1) for t in range(self.domain_size))

    def to_json_dict(self) -> dict:
        return {
            "kind": "table",
            "domain": [p.to_string() for p in self.domain],
            "tables": [self.table_to_string(int(t)) for t in self.tables],
        }


ConceptClass = ProjectionClass | TableClass


def class_from_json_dict(obj: dict) -> ConceptClass:
    kind = obj.get("kind")
    if kind == "projections":
        return ProjectionClass(int(obj["n"]))
    if kind == "table":
        domain = [Point.from_string(s) for s in obj["domain"]]
        cls = TableClass(domain, [])
        tables = [cls.table_from_string(s) for s in obj["tables"]]
        return TableClass(domain, tables)
    raise InvalidParameterError(f"unknown class kind {kind!r}")


def eval_concept(cls: ConceptClass, cid: ConceptId, x: Point) -> int:
    """Value of the concept on a point: x[i] for projections, table lookup otherwise."""
    if isinstance(cls, ProjectionClass):
        if cid.kind != "projection":
            raise InvalidParameterError(f"expected a projection concept, got {cid.kind}")
        if not 1 <= cid.index <= cls.n:
            raise InvalidParameterError(f"projection index {cid.index} out of range 1..{cls.n}")
        if x.n != cls.n:
            raise DimensionMismatchError(f"point has n={x.n}, class has n={cls.n}")
        return x.bit(cid.index)
    mask = cls.table_mask(cid)
    return (mask >> cls.domain_position(x)) & 1


def all_functions_class(domain: Sequence[Point]) -> TableClass:
    """The class of all 2^D functions on a finite domain (tables held lazily)."""
    domain = tuple(domain)
    d = len(domain)
    if d > 20:
        raise InvalidParameterError(f"all-functions domain capped at 20 points, got {d}")
    return TableClass(domain, range(1 << d))


def build_shattered_set(n: int) -> list[Point]:
    """Points x_1 .. x_d, d = floor(log2 n), shattered by the projection class.

    Coordinate j of x_i is bit i of the binary expansion of j-1 (bit 1 being
    the least significant), so the n coordinate-columns run through all
    length-d patterns.
    """
    if n < 2:
        raise InvalidParameterError("shattered-set construction needs n >= 2")
    d = n.bit_length() - 1
    j = np.arange(n, dtype=np.uint64)
    points = []
    for i in range(1, d + 1):
        bits = ((j >> np.uint64(i - 1)) & np.uint64(1)).astype(np.uint8)
        points.append(Point(pack_bit_rows(bits[None, :])[0], n))
    return points


def is_shattered(cls: ConceptClass, points: Sequence[Point]) -> bool:
    """Whether every one of the 2^|points| label patterns is realized by some concept."""
    k = len(points)
    if k > 30:
        raise InvalidParameterError("shatter check is exhaustive; at most 30 points")
    if k == 0:
        return True
    target = 1 << k
    realized: set[int] = set()
    for cid in cls.concept_ids():
        pattern = 0
        for t, p in enumerate(points):
            if eval_concept(cls, cid, p):
                pattern |= 1 << t
        realized.add(pattern)
        if len(realized) == target:
            return True
    return False


def _label_matrix(cls: ConceptClass, universe: Sequence[Point]) -> np.ndarray:
    """(|universe|, |concepts|) uint8 matrix of concept values."""
    nu = len(universe)
    nc = cls.num_concepts
    if nu * nc > _VC_LABEL_CELL_LIMIT:
        raise InvalidParameterError(
            f"universe x class too large for the exhaustive search ({nu} x {nc})"
        )
    if isinstance(cls, ProjectionClass):
        words = np.stack([p.words for p in universe])
        return unpack_bit_rows(words, cls.n)
    pos = np.array([cls.domain_position(p) for p in universe], dtype=np.uint64)
    tables = np.fromiter((int(t) for t in cls.tables), dtype=np.uint64, count=nc)
    return ((tables[None, :] >> pos[:, None]) & np.uint64(1)).astype(np.uint8)


def _find_shattered(labels: np.ndarray, k: int) -> bool:
    """DFS for k universe rows whose label columns realize all 2^k patterns.

    A partial choice of depth d splits the concepts into 2^d cells; every
    cell must keep at least 2^(k-d) concepts for an extension to exist,
    which prunes hard.
    """
    nu = labels.shape[0]

    def recurse(cells: list[np.ndarray], start: int, depth: int) -> bool:
        if depth == k:
            return True
        need = 1 << (k - depth - 1)
        viable = np.ones(nu, dtype=bool)
        viable[:start] = False
        for cell in cells:
            ones = labels[:, cell].sum(axis=1)
            viable &= (ones >= need) & (cell.size - ones >= need)
            if not viable.any():
                return False
        for u in np.flatnonzero(viable):
            row = labels[int(u)]
            children = []
            for cell in cells:
                hits = row[cell] == 1
                children.append(cell[hits])
                children.append(cell[~hits])
            if recurse(children, int(u) + 1, depth + 1):
                return True
        return False

    all_concepts = np.arange(labels.shape[1])
    return recurse([all_concepts], 0, 0)


def _default_universe(cls: ConceptClass) -> list[Point]:
    if isinstance(cls, TableClass):
        return list(cls.domain)
    points: list[Point] = []
    if cls.n >= 2:
        points.extend(build_shattered_set(cls.n))
    gen = np.random.Generator(np.random.PCG64(_VC_UNIVERSE_SEED))
    bits = (gen.random((_VC_UNIVERSE_RANDOM_POINTS, cls.n)) < 0.5).astype(np.uint8)
    words = pack_bit_rows(bits)
    seen = set(points)
    for r in range(words.shape[0]):
        p = Point(words[r].copy(), cls.n)
        if p not in seen:
            seen.add(p)
            points.append(p)
    return points


def vc_dimension_bruteforce(
    cls: ConceptClass,
    universe: Sequence[Point] | None = None,
    d_max: int | None = None,
) -> int:
    """Size of the largest shattered subset of `universe` found by exhaustive search.

    The search is capped a priori at floor(log2 |C|): a shattered set of size
    d needs 2^d distinct concept restrictions.  With the full 2^n universe
    this makes the result exact for the projection class.
    """
    if universe is None:
        universe = _default_universe(cls)
    universe = list(universe)
    if not universe:
        raise InvalidParameterError("universe must be non-empty")
    nc = cls.num_concepts
    if nc == 0:
        return 0
    cap = min(len(universe), nc.bit_length() - 1)
    if d_max is not None:
        cap = min(cap, d_max)
    labels = _label_matrix(cls, universe)
    for k in range(cap, 0, -1):
        if _find_shattered(labels, k):
            return k
    return 0


def full_hypercube(n: int) -> list[Point]:
    """All 2^n points; only sensible for small n."""
    if n > 20:
        raise InvalidParameterError("full hypercube enumeration capped at n = 20")
    return [Point.from_int(v, n) for v in range(1 << n)]


def enumerated_domain(size: int, n_bits: int | None = None) -> list[Point]:
    """`size` distinct points: the binary encodings of 0 .. size-1."""
    if size < 1:
        raise InvalidParameterError("domain size must be >= 1")
    need = max(1, (size - 1).bit_length())
    n = need if n_bits is None else n_bits
    if n < need:
        raise InvalidParameterError(f"{size} points need at least {need} bits")
    return [Point.from_int(v, n) for v in range(size)]
