"""Spectral sequence of a finite filtered cochain complex, exactly.

The complex carries a descending filtration compatible with the
differential.  With F_p clamped to the full space below p_min and to zero
above p_max, the pages are

    Z^pq_r   = { w in F_p C^{p+q} | dw in F_{p+r} C^{p+q+1} }
    B^pq_r   = { w = d chi in F_p C^{p+q} | chi in F_{p-r} C^{p+q-1} }
    E^pq_r   = Z^pq_r / (B^pq_{r-1} + Z^{p+1,q-1}_{r-1})
    d^pq_r [w] = [dw]   o n   E^{p+r, q-r+1}_r

computed by exact rational row reduction.  Finite complexes always
stabilize; e_infinity also reports the radius from which every later page
equals the limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import InputValidationError, InvariantViolation
from .linalg import (
    Matrix,
    Subspace,
    Vec,
    image_subspace,
    kernel_basis,
    mat_is_zero,
    mat_mul,
    mat_vec,
    rref,
    solve_in_terms_of,
    to_matrix,
    zero_matrix,
)


class FilteredComplex:
    """A finite cochain complex over Q with a descending filtration.

    dims maps each degree in [n_min, n_max] to its dimension; diff[n] is the
    matrix of C^n -> C^{n+1} (column-vector action); filt[n][p] spans
    F_p C^n for p in [p_min, p_max].  Validation enforces d d = 0, the
    nesting F_p >= F_{p+1}, fullness of F_{p_min}, and d F_p <= F_p.
    """

    def __init__(
        self,
        n_min: int,
        n_max: int,
        dims: Mapping[int, int],
        diff: Mapping[int, Matrix],
        p_min: int,
        p_max: int,
        filt: Mapping[int, Mapping[int, Sequence[Vec]]],
    ):
        if n_max < n_min:
            raise InputValidationError("empty degree range")
        if p_max < p_min:
            raise InputValidationError("empty filtration range")
        self.n_min = n_min
        self.n_max = n_max
        self.p_min = p_min
        self.p_max = p_max
        self.dims = {n: int(dims.get(n, 0)) for n in range(n_min, n_max + 1)}
        if any(v < 0 for v in self.dims.values()):
            raise InputValidationError("negative dimension")
        self.diff: dict[int, Matrix] = {}
        for n in range(n_min, n_max):
            mat = diff.get(n)
            if mat is None:
                mat = zero_matrix(self.dims[n + 1], self.dims[n])
            self.diff[n] = to_matrix(mat, self.dims[n + 1], self.dims[n])
        self.filt: dict[int, dict[int, Subspace]] = {}
        for n in range(n_min, n_max + 1):
            per_degree = dict(filt.get(n, {}))
            levels = {}
            for p in range(p_min, p_max + 1):
                spanning = per_degree.get(p)
                if spanning is None:
                    raise InputValidationError(
                        f"missing filtration level p={p} at degree n={n}"
                    )
                levels[p] = Subspace(self.dims[n], spanning)
            self.filt[n] = levels
        self._validate()

    # --- access with clamping conventions --------------------------------

    def dim(self, n: int) -> int:
        return self.dims.get(n, 0)

    def differential(self, n: int) -> Matrix:
        if n in self.diff:
            return self.diff[n]
        return zero_matrix(self.dim(n + 1), self.dim(n))

    def filtration(self, n: int, p: int) -> Subspace:
        ambient = self.dim(n)
        if ambient == 0:
            return Subspace.zero(0)
        if p <= self.p_min:
            return Subspace.full(ambient)
        if p > self.p_max:
            return Subspace.zero(ambient)
        return self.filt[n][p]

    def _validate(self) -> None:
        for n in range(self.n_min, self.n_max - 1):
            square = mat_mul(self.differential(n + 1), self.differential(n))
            if not mat_is_zero(square):
                raise InputValidationError(f"d o d != 0 at degree {n}")
        for n in range(self.n_min, self.n_max + 1):
            full = Subspace.full(self.dim(n))
            if not self.filtration(n, self.p_min).contains_subspace(full):
                raise InputValidationError(
                    f"F_{self.p_min} C^{n} must be the whole space"
                )
            for p in range(self.p_min, self.p_max):
                if not self.filtration(n, p).contains_subspace(self.filtration(n, p + 1)):
                    raise InputValidationError(
                        f"filtration not descending at degree {n}, level {p}"
                    )
            for p in range(self.p_min, self.p_max + 1):
                image = image_subspace(
                    self.differential(n), self.filtration(n, p), self.dim(n + 1)
                )
                if not self.filtration(n + 1, p).contains_subspace(image):
                    raise InputValidationError(
                        f"differential does not preserve F_{p} at degree {n}"
                    )

    # --- JSON ----------------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "degrees": [self.n_min, self.n_max],
            "dims": {str(n): self.dims[n] for n in range(self.n_min, self.n_max + 1)},
            "differentials": {
                str(n): [[str(v) for v in row] for row in self.diff[n]]
                for n in range(self.n_min, self.n_max)
            },
            "filtration_levels": [self.p_min, self.p_max],
            "filtration": {
                str(n): {
                    str(p): [[str(v) for v in vec] for vec in self.filt[n][p].basis]
                    for p in range(self.p_min, self.p_max + 1)
                }
                for n in range(self.n_min, self.n_max + 1)
            },
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "FilteredComplex":
        try:
            n_min, n_max = (int(v) for v in obj["degrees"])
            p_min, p_max = (int(v) for v in obj["filtration_levels"])
            dims = {int(k): int(v) for k, v in obj["dims"].items()}
            diff = {
                int(k): tuple(tuple(Fraction(v) for v in row) for row in mat)
                for k, mat in obj.get("differentials", {}).items()
            }
            filt = {
                int(k): {
                    int(p): [tuple(Fraction(v) for v in vec) for vec in vecs]
                    for p, vecs in levels.items()
                }
                for k, levels in obj.get("filtration", {}).items()
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise InputValidationError(f"malformed complex description: {exc}") from exc
        return cls(n_min, n_max, dims, diff, p_min, p_max, filt)


@dataclass(frozen=True)
class Page:
    """E^{pq}_r with its exact dimension and canonical representatives
    (coordinates in C^{p+q}).  r None means the limit page; stable_from is
    reported on limit pages only."""

    p: int
    q: int
    r: Optional[int]
    dimension: int
    representatives: tuple[Vec, ...]
    stable_from: Optional[int] = None


def z_space(K: FilteredComplex, p: int, q: int, r: int) -> Subspace:
    """Z^{pq}_r = { w in F_p C^{p+q} | dw in F_{p+r} C^{p+q+1} }."""
    n = p + q
    V = K.filtration(n, p)
    W = K.filtration(n + 1, p + r)
    d = K.differential(n)
    reduced_rows = [W.reduce(mat_vec(d, v)) for v in V.basis]
    k = len(V.basis)
    # coefficient vectors a with sum a_i reduced_i = 0
    cols = len(reduced_rows[0]) if reduced_rows else 0
    mat = tuple(
        tuple(reduced_rows[i][c] for i in range(k)) for c in range(cols)
    )
    coeff_vectors = kernel_basis(mat, k)
    vectors = []
    for a in coeff_vectors:
        vec = tuple(
            sum((a[i] * V.basis[i][j] for i in range(k)), Fraction(0))
            for j in range(K.dim(n))
        )
        vectors.append(vec)
    return Subspace(K.dim(n), vectors)


def z_space_infinity(K: FilteredComplex, p: int, q: int) -> Subspace:
    n = p + q
    V = K.filtration(n, p)
    return z_space(K, p, q, K.p_max - p + 1) if V.dim else Subspace.zero(K.dim(n))


def b_space(K: FilteredComplex, p: int, q: int, r: int) -> Subspace:
    """B^{pq}_r = { d chi in F_p C^{p+q} | chi in F_{p-r} C^{p+q-1} }."""
    n = p + q
    source = K.filtration(n - 1, p - r)
    image = image_subspace(K.differential(n - 1), source, K.dim(n))
    return image.intersect(K.filtration(n, p))


def b_space_infinity(K: FilteredComplex, p: int, q: int) -> Subspace:
    return b_space(K, p, q, p - K.p_min)


def _denominator(K: FilteredComplex, p: int, q: int, r: int) -> Subspace:
    return b_space(K, p, q, r - 1).add(z_space(K, p + 1, q - 1, r - 1))


def _denominator_infinity(K: FilteredComplex, p: int, q: int) -> Subspace:
    return b_space_infinity(K, p, q).add(z_space_infinity(K, p + 1, q - 1))


def e_page(K: FilteredComplex, p: int, q: int, r: int) -> Page:
    """E^{pq}_r as a Page with canonical representatives."""
    Z = z_space(K, p, q, r)
    den = _denominator(K, p, q, r)
    if not Z.contains_subspace(den):
        raise InvariantViolation(
            f"denominator of E^({p},{q})_{r} escapes the numerator"
        )
    reps = Z.quotient_representatives(den)
    return Page(p=p, q=q, r=r, dimension=Z.dim - den.dim, representatives=tuple(reps))


def e_infinity(K: FilteredComplex, p: int, q: int) -> Page:
    """The limit page, with the stabilization radius reported."""
    Z = z_space_infinity(K, p, q)
    den = _denominator_infinity(K, p, q)
    if not Z.contains_subspace(den):
        raise InvariantViolation(f"denominator of E^({p},{q})_inf escapes the numerator")
    reps = Z.quotient_representatives(den)
    return Page(
        p=p,
        q=q,
        r=None,
        dimension=Z.dim - den.dim,
        representatives=tuple(reps),
        stable_from=stabilization_radius(K, p, q),
    )


def stabilization_radius(K: FilteredComplex, p: int, q: int) -> int:
    """Least r0 with E^{pq}_r literally equal to the limit for all r >= r0
    (numerator and denominator agree as subspaces, not only in dimension)."""
    z_inf = z_space_infinity(K, p, q)
    b_inf = b_space_infinity(K, p, q)
    zp_inf = z_space_infinity(K, p + 1, q - 1)
    hard_bound = (K.p_max - K.p_min + 2)
    for r in range(0, hard_bound + 1):
        if (
            z_space(K, p, q, r) == z_inf
            and b_space(K, p, q, r - 1) == b_inf
            and z_space(K, p + 1, q - 1, r - 1) == zp_inf
        ):
            return r
    return hard_bound + 1


def d_r_map(K: FilteredComplex, p: int, q: int, r: int) -> tuple[tuple[Fraction, ...], ...]:
    """Matrix of d^{pq}_r from E^{pq}_r to E^{p+r,q-r+1}_r in the canonical
    representative bases; well-definedness is verified on the denominator."""
    source = e_page(K, p, q, r)
    target = e_page(K, p + r, q - r + 1, r)
    d = K.differential(p + q)
    target_den = _denominator(K, p + r, q - r + 1, r)
    # representatives of the source denominator must map to zero classes
    for v in _denominator(K, p, q, r).basis:
        if not target_den.contains(mat_vec(d, v)):
            raise InvariantViolation(
                f"d_{r} is not well defined on E^({p},{q})_{r}: denominator "
                "does not map into the target denominator"
            )
    columns = []
    basis_vectors = list(target.representatives) + list(target_den.basis)
    for rep in source.representatives:
        image = mat_vec(d, rep)
        coeffs = solve_in_terms_of(basis_vectors, image)
        if coeffs is None:
            raise InvariantViolation(
                f"d_{r} image escapes Z^({p + r},{q - r + 1})_{r}"
            )
        columns.append(coeffs[: target.dimension])
    return tuple(
        tuple(columns[j][i] for j in range(source.dimension))
        for i in range(target.dimension)
    )


def total_cohomology_dim(K: FilteredComplex, n: int) -> int:
    """dim H^n of the underlying complex by independent row reduction."""
    d_n = K.differential(n)
    d_prev = K.differential(n - 1)
    _, pivots_n = rref(d_n)
    rank_n = len(pivots_n)
    _, pivots_prev = rref(d_prev)
    rank_prev = len(pivots_prev)
    return K.dim(n) - rank_n - rank_prev


# --- bicomplex totalization -------------------------------------------------


class Bicomplex:
    """A first-quadrant array with anticommuting differentials.

    dims[p][q] for 0 <= p < rows, 0 <= q < cols; d_v raises p, d_h raises q;
    validation requires d_v d_v = d_h d_h = d_v d_h + d_h d_v = 0.
    """

    def __init__(
        self,
        dims: Sequence[Sequence[int]],
        d_v: Mapping[tuple[int, int], Matrix],
        d_h: Mapping[tuple[int, int], Matrix],
    ):
        self.rows = len(dims)
        if self.rows == 0 or len(dims[0]) == 0:
            raise InputValidationError("empty bicomplex")
        self.cols = len(dims[0])
        if any(len(row) != self.cols for row in dims):
            raise InputValidationError("ragged dimension array")
        self.dims = [[int(v) for v in row] for row in dims]
        if any(v < 0 for row in self.dims for v in row):
            raise InputValidationError("negative dimension")
        self.d_v: dict[tuple[int, int], Matrix] = {}
        self.d_h: dict[tuple[int, int], Matrix] = {}
        for p in range(self.rows):
            for q in range(self.cols):
                self.d_v[(p, q)] = to_matrix(
                    d_v.get((p, q), zero_matrix(self.dim(p + 1, q), self.dim(p, q))),
                    self.dim(p + 1, q),
                    self.dim(p, q),
                )
                self.d_h[(p, q)] = to_matrix(
                    d_h.get((p, q), zero_matrix(self.dim(p, q + 1), self.dim(p, q))),
                    self.dim(p, q + 1),
                    self.dim(p, q),
                )
        self._validate()

    def dim(self, p: int, q: int) -> int:
        if 0 <= p < self.rows and 0 <= q < self.cols:
            return self.dims[p][q]
        return 0

    def vertical(self, p: int, q: int) -> Matrix:
        return self.d_v.get((p, q), zero_matrix(self.dim(p + 1, q), self.dim(p, q)))

    def horizontal(self, p: int, q: int) -> Matrix:
        return self.d_h.get((p, q), zero_matrix(self.dim(p, q + 1), self.dim(p, q)))

    def _validate(self) -> None:
        for p in range(self.rows):
            for q in range(self.cols):
                vv = mat_mul(self.vertical(p + 1, q), self.vertical(p, q))
                if not mat_is_zero(vv):
                    raise InputValidationError(f"d_V o d_V != 0 at ({p},{q})")
                hh = mat_mul(self.horizontal(p, q + 1), self.horizontal(p, q))
                if not mat_is_zero(hh):
                    raise InputValidationError(f"d_H o d_H != 0 at ({p},{q})")
                anti_a = mat_mul(self.vertical(p, q + 1), self.horizontal(p, q))
                anti_b = mat_mul(self.horizontal(p + 1, q), self.vertical(p, q))
                anti = tuple(
                    tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(anti_a, anti_b)
                )
                if not mat_is_zero(anti):
                    raise InputValidationError(
                        f"d_V d_H + d_H d_V != 0 at ({p},{q})"
                    )

    def block_offset(self, p: int, q: int) -> int:
        """Offset of block (p, q) inside total degree p + q (p ascending)."""
        n = p + q
        offset = 0
        for pp in range(0, p):
            offset += self.dim(pp, n - pp)
        return offset

    def totalize(self) -> FilteredComplex:
        """Total complex with the vertical-degree filtration
        F_k C^n = direct sum of blocks with p >= k."""
        n_max = (self.rows - 1) + (self.cols - 1)
        dims = {
            n: sum(self.dim(p, n - p) for p in range(self.rows))
            for n in range(0, n_max + 1)
        }
        diff: dict[int, Matrix] = {}
        for n in range(0, n_max):
            rows_out = dims[n + 1]
            cols_in = dims[n]
            mat = [[Fraction(0)] * cols_in for _ in range(rows_out)]
            for p in range(self.rows):
                q = n - p
                if not (0 <= q < self.cols) or self.dim(p, q) == 0:
                    continue
                src = self.block_offset(p, q)
                # vertical part into block (p+1, q)
                if self.dim(p + 1, q):
                    dst = self.block_offset(p + 1, q)
                    block = self.vertical(p, q)
                    for i in range(self.dim(p + 1, q)):
                        for j in range(self.dim(p, q)):
                            mat[dst + i][src + j] += block[i][j]
                # horizontal part into block (p, q+1)
                if self.dim(p, q + 1):
                    dst = self.block_offset(p, q + 1)
                    block = self.horizontal(p, q)
                    for i in range(self.dim(p, q + 1)):
                        for j in range(self.dim(p, q)):
                            mat[dst + i][src + j] += block[i][j]
            diff[n] = tuple(tuple(row) for row in mat)
        p_max = self.rows - 1
        filt: dict[int, dict[int, list[Vec]]] = {}
        for n in range(0, n_max + 1):
            levels: dict[int, list[Vec]] = {}
            for k in range(0, p_max + 1):
                vectors = []
                for p in range(k, self.rows):
                    q = n - p
                    if not (0 <= q < self.cols):
                        continue
                    base = self.block_offset(p, q)
                    for j in range(self.dim(p, q)):
                        vec = [Fraction(0)] * dims[n]
                        vec[base + j] = Fraction(1)
                        vectors.append(tuple(vec))
                levels[k] = vectors
            filt[n] = levels
        return FilteredComplex(
            n_min=0,
            n_max=n_max,
            dims=dims,
            diff=diff,
            p_min=0,
            p_max=p_max,
            filt=filt,
        )

    def to_json_obj(self) -> dict:
        return {
            "dims": self.dims,
            "d_v": {
                f"{p},{q}": [[str(v) for v in row] for row in self.d_v[(p, q)]]
                for p in range(self.rows)
                for q in range(self.cols)
                if not mat_is_zero(self.d_v[(p, q)])
            },
            "d_h": {
                f"{p},{q}": [[str(v) for v in row] for row in self.d_h[(p, q)]]
                for p in range(self.rows)
                for q in range(self.cols)
                if not mat_is_zero(self.d_h[(p, q)])
            },
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Bicomplex":
        def parse_maps(raw):
            out = {}
            for key, mat in raw.items():
                p_txt, q_txt = key.split(",")
                out[(int(p_txt), int(q_txt))] = tuple(
                    tuple(Fraction(v) for v in row) for row in mat
                )
            return out

        try:
            return cls(
                obj["dims"],
                parse_maps(obj.get("d_v", {})),
                parse_maps(obj.get("d_h", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputValidationError(f"malformed bicomplex description: {exc}") from exc


def from_bicomplex(
    dims: Sequence[Sequence[int]],
    d_v: Mapping[tuple[int, int], Matrix],
    d_h: Mapping[tuple[int, int], Matrix],
) -> FilteredComplex:
    """Validate and totalize a bicomplex with the column filtration."""
    return Bicomplex(dims, d_v, d_h).totalize()
