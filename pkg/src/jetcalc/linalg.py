"""Exact rational linear algebra for the spectral-sequence engine.

Everything is over Fraction (arbitrary-precision integers underneath);
subspaces are kept as reduced row-echelon bases so that equality,
membership, sums, intersections (Zassenhaus) and quotient representatives
are all textbook-verifiable primitives.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

Vec = tuple[Fraction, ...]
Matrix = tuple[tuple[Fraction, ...], ...]  # shape (out_dim, in_dim)


def to_vec(values: Iterable) -> Vec:
    return tuple(Fraction(v) for v in values)


def to_matrix(rows: Iterable[Iterable], out_dim: int, in_dim: int) -> Matrix:
    mat = tuple(tuple(Fraction(v) for v in row) for row in rows)
    if len(mat) != out_dim or any(len(row) != in_dim for row in mat):
        raise ValueError(f"matrix is not {out_dim}x{in_dim}")
    return mat


def zero_matrix(out_dim: int, in_dim: int) -> Matrix:
    return tuple((Fraction(0),) * in_dim for _ in range(out_dim))


def mat_vec(mat: Matrix, vec: Vec) -> Vec:
    return tuple(sum((row[j] * vec[j] for j in range(len(vec))), Fraction(0)) for row in mat)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if a and b and len(a[0]) != len(b):
        raise ValueError("matrix shapes do not compose")
    inner = len(b)
    cols = len(b[0]) if b else 0
    return tuple(
        tuple(
            sum((a[i][k] * b[k][j] for k in range(inner)), Fraction(0))
            for j in range(cols)
        )
        for i in range(len(a))
    )


def mat_is_zero(mat: Matrix) -> bool:
    return all(v == 0 for row in mat for v in row)


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    mat = [list(row) for row in rows]
    if not mat:
        return [], []
    n_cols = len(mat[0])
    pivots: list[int] = []
    row_at = 0
    for col in range(n_cols):
        pivot_row = None
        for r in range(row_at, len(mat)):
            if mat[r][col] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        mat[row_at], mat[pivot_row] = mat[pivot_row], mat[row_at]
        scale = mat[row_at][col]
        mat[row_at] = [v / scale for v in mat[row_at]]
        for r in range(len(mat)):
            if r != row_at and mat[r][col] != 0:
                factor = mat[r][col]
                mat[r] = [a - factor * b for a, b in zip(mat[r], mat[row_at])]
        pivots.append(col)
        row_at += 1
        if row_at == len(mat):
            break
    return mat[:row_at], pivots


def kernel_basis(mat: Matrix, in_dim: int) -> list[Vec]:
    """Basis of the null space of a matrix acting on column vectors."""
    reduced, pivots = rref(mat)
    free = [c for c in range(in_dim) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * in_dim
        vec[f] = Fraction(1)
        for r, p in enumerate(pivots):
            vec[p] = -reduced[r][f]
        basis.append(tuple(vec))
    return basis


class Subspace:
    """A subspace of Q^n held as a canonical RREF row basis."""

    __slots__ = ("n", "basis", "pivots")

    def __init__(self, n: int, spanning: Iterable[Iterable] = ()):
        rows = [to_vec(v) for v in spanning]
        for v in rows:
            if len(v) != n:
                raise ValueError(f"vector of length {len(v)} in ambient dimension {n}")
        reduced, pivots = rref(rows)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "basis", tuple(tuple(r) for r in reduced))
        object.__setattr__(self, "pivots", tuple(pivots))

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, ())

    @classmethod
    def full(cls, n: int) -> "Subspace":
        eye = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
        return cls(n, eye)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, vec: Vec) -> Vec:
        """Canonical residue of vec modulo this subspace."""
        v = list(to_vec(vec))
        for row, p in zip(self.basis, self.pivots):
            if v[p] != 0:
                factor = v[p]
                v = [a - factor * b for a, b in zip(v, row)]
        return tuple(v)

    def contains(self, vec: Vec) -> bool:
        return all(c == 0 for c in self.reduce(vec))

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.n == other.n
            and self.basis == other.basis
        )

    def __repr__(self):
        return f"<Subspace dim {self.dim} of Q^{self.n}>"

    def add(self, other: "Subspace") -> "Subspace":
        if self.n != other.n:
            raise ValueError("ambient dimensions differ")
        return Subspace(self.n, list(self.basis) + list(other.basis))

    def intersect(self, other: "Subspace") -> "Subspace":
        """Zassenhaus: rows [u|u] and [w|0]; zero left halves span the
        intersection in the right halves."""
        if self.n != other.n:
            raise ValueError("ambient dimensions differ")
        n = self.n
        rows = [list(u) + list(u) for u in self.basis] + [
            list(w) + [Fraction(0)] * n for w in other.basis
        ]
        reduced, _ = rref(rows)
        out = []
        for row in reduced:
            if all(c == 0 for c in row[:n]):
                out.append(tuple(row[n:]))
        return Subspace(n, out)

    def quotient_representatives(self, sub: "Subspace") -> list[Vec]:
        """Vectors of this space extending a basis of sub to one of self.

        Requires sub to be contained in self; deterministic (greedy over the
        canonical basis).
        """
        if not self.contains_subspace(sub):
            raise ValueError("denominator is not contained in the space")
        chosen: list[Vec] = []
        span = sub
        for v in self.basis:
            if not span.contains(v):
                chosen.append(v)
                span = span.add(Subspace(self.n, [v]))
        return chosen


def image_subspace(mat: Matrix, source: Subspace, out_dim: int) -> Subspace:
    """The image of a subspace under a linear map (column-vector action)."""
    return Subspace(out_dim, [mat_vec(mat, v) for v in source.basis])


def solve_in_terms_of(vectors: Sequence[Vec], target: Vec) -> Optional[list[Fraction]]:
    """Coefficients expressing target as a combination of the vectors, or
    None when target lies outside their span."""
    n = len(target)
    k = len(vectors)
    if k == 0:
        return [] if all(c == 0 for c in target) else None
    # augmented system: columns are the vectors
    rows = [[vectors[j][i] for j in range(k)] + [target[i]] for i in range(n)]
    reduced, pivots = rref(rows)
    coeffs = [Fraction(0)] * k
    for row, p in zip(reduced, pivots):
        if p == k:
            return None  # inconsistent: pivot in the augmented column
        coeffs[p] = row[k]
    return coeffs
