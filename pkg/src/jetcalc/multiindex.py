"""Exact arithmetic on multi-indices in Z^m_+ and their binomial coefficients.

Multi-indices are the exponents of iterated total derivatives; every formula
in the jet-space layer reduces to componentwise sums, differences that may
leave Z^m_+, and products of binomial coefficients.
"""

from __future__ import annotations

from math import comb
from typing import Iterable, Iterator, Optional

from .errors import DimensionError


class MultiIndex(tuple):
    """An element of I = Z^m_+.

    Immutable (a tuple subclass); arithmetic methods return new instances.
    Note that ``+`` keeps tuple concatenation semantics; use :meth:`add`.
    """

    __slots__ = ()

    def __new__(cls, entries: Iterable[int]):
        t = tuple(int(e) for e in entries)
        if any(e < 0 for e in t):
            raise ValueError(f"multi-index entries must be non-negative, got {t}")
        return super().__new__(cls, t)

    @classmethod
    def zero(cls, m: int) -> "MultiIndex":
        return cls((0,) * m)

    @classmethod
    def unit(cls, mu: int, m: int) -> "MultiIndex":
        """The index (mu): a single 1 in slot mu (1-based)."""
        if not 1 <= mu <= m:
            raise DimensionError(f"direction {mu} out of range 1..{m}")
        return cls(tuple(1 if k == mu - 1 else 0 for k in range(m)))

    @property
    def norm(self) -> int:
        """|i| = i^1 + ... + i^m."""
        return sum(self)

    def _check_len(self, other: "MultiIndex") -> None:
        if len(self) != len(other):
            raise DimensionError(
                f"multi-index length mismatch: {len(self)} vs {len(other)}"
            )

    def add(self, other: "MultiIndex") -> "MultiIndex":
        """Componentwise sum i + j."""
        self._check_len(other)
        return MultiIndex(a + b for a, b in zip(self, other))

    def bump(self, mu: int) -> "MultiIndex":
        """i + (mu), raising the mu-th slot by one (1-based)."""
        if not 1 <= mu <= len(self):
            raise DimensionError(f"direction {mu} out of range 1..{len(self)}")
        return MultiIndex(
            e + 1 if k == mu - 1 else e for k, e in enumerate(self)
        )

    def sub(self, other: "MultiIndex") -> Optional["MultiIndex"]:
        """Componentwise difference i - j, or None when it leaves Z^m_+."""
        self._check_len(other)
        if any(a < b for a, b in zip(self, other)):
            return None
        return MultiIndex(a - b for a, b in zip(self, other))

    def binom(self, k: "MultiIndex") -> int:
        """prod_mu C(i^mu, k^mu); zero when any k^mu exceeds i^mu."""
        self._check_len(k)
        result = 1
        for a, b in zip(self, k):
            if b > a:
                return 0
            result *= comb(a, b)
        return result

    def leq(self, other: "MultiIndex") -> bool:
        """Componentwise k <= i (the partial order of the grading)."""
        self._check_len(other)
        return all(a <= b for a, b in zip(self, other))

    def grlex_key(self):
        """Sort key for the graded-lexicographic canonical order.

        Grades by |i| first; within a grade, indices with larger early
        entries come first, so (1,0) precedes (0,1).
        """
        return (self.norm, tuple(-e for e in self))

    def __str__(self) -> str:
        return "(" + ",".join(str(e) for e in self) + ")"

    def __repr__(self) -> str:
        return f"MultiIndex({tuple(self)})"

    def to_json_obj(self) -> list:
        return list(self)

    @classmethod
    def from_json_obj(cls, obj) -> "MultiIndex":
        return cls(obj)


def iter_upto(norm_bound: int, m: int) -> Iterator[MultiIndex]:
    """Yield all i in Z^m_+ with |i| <= norm_bound in graded-lex order."""
    if norm_bound < 0:
        raise ValueError("norm_bound must be >= 0")
    if m < 1:
        raise ValueError("m must be >= 1")

    def compositions(total: int, slots: int):
        # First slot descending realizes the within-grade order of grlex_key.
        if slots == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, slots - 1):
                yield (first,) + rest

    for s in range(norm_bound + 1):
        for c in compositions(s, m):
            yield MultiIndex(c)


def enumerate_upto(norm_bound: int, m: int) -> list[MultiIndex]:
    """All i with |i| <= norm_bound, graded-lexicographically ordered."""
    return list(iter_upto(norm_bound, m))


def exact_norm(norm: int, m: int) -> list[MultiIndex]:
    """All i with |i| = norm, in graded-lex order."""
    return [i for i in iter_upto(norm, m) if i.norm == norm]


def parse_multiindex(text: str, m: int | None = None) -> MultiIndex:
    """Parse the text form "(i1,...,im)"; bare integers allowed for m=1."""
    s = text.strip()
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    parts = [p for p in s.split(",") if p.strip() != ""]
    try:
        idx = MultiIndex(int(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"cannot parse multi-index from {text!r}: {exc}") from exc
    if m is not None and len(idx) != m:
        raise DimensionError(f"multi-index {text!r} has length {len(idx)}, expected {m}")
    return idx
