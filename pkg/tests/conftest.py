"""Seeded random generators shared across the suite.

Everything takes an explicit random.Random so corpora are reproducible;
tests freeze their seeds.
"""

from __future__ import annotations

import random
from fractions import Fraction

from jetcalc import BiForm, Context, DiffExpr, MultiIndex, VerticalField
from jetcalc.multiindex import enumerate_upto


def rand_fraction(rng: random.Random, num: int = 6, den: int = 3) -> Fraction:
    value = Fraction(rng.randint(-num, num), rng.randint(1, den))
    return value


def nonzero_fraction(rng: random.Random, num: int = 6, den: int = 3) -> Fraction:
    while True:
        value = rand_fraction(rng, num, den)
        if value != 0:
            return value


def rand_index(rng: random.Random, m: int, max_norm: int) -> MultiIndex:
    entries = [0] * m
    for _ in range(rng.randint(0, max_norm)):
        entries[rng.randrange(m)] += 1
    return MultiIndex(entries)


def rand_poly(
    rng: random.Random,
    ctx: Context,
    max_jet_norm: int = 2,
    max_degree: int = 2,
    terms: int = 3,
    with_x: bool = True,
) -> DiffExpr:
    """Random polynomial in x-variables and jets of bounded norm."""
    result = ctx.zero
    for _ in range(rng.randint(1, terms)):
        mono = ctx.one
        for _ in range(rng.randint(0, max_degree)):
            if with_x and rng.random() < 0.4:
                mono = mono * ctx.x(rng.randint(1, ctx.m))
            else:
                name = rng.choice(ctx.dep_names)
                mono = mono * ctx.u(name, rand_index(rng, ctx.m, max_jet_norm))
        result = result + ctx.const(nonzero_fraction(rng)) * mono
    return result


def rand_x_poly(rng: random.Random, ctx: Context, max_degree: int = 3) -> DiffExpr:
    result = ctx.zero
    for _ in range(rng.randint(1, 3)):
        mono = ctx.one
        for _ in range(rng.randint(0, max_degree)):
            mono = mono * ctx.x(rng.randint(1, ctx.m))
        result = result + ctx.const(nonzero_fraction(rng)) * mono
    return result


def rand_field(
    rng: random.Random,
    ctx: Context,
    max_norm: int = 2,
    components: int = 3,
    coeff_kwargs: dict | None = None,
) -> VerticalField:
    comps = {}
    for _ in range(rng.randint(1, components)):
        key = (rng.choice(ctx.dep_names), rand_index(rng, ctx.m, max_norm))
        comps[key] = rand_poly(rng, ctx, **(coeff_kwargs or {}))
    return VerticalField(ctx, comps)


def rand_biform(
    rng: random.Random,
    ctx: Context,
    p: int,
    q: int,
    terms: int = 2,
    gen_norm: int = 2,
    coeff_kwargs: dict | None = None,
) -> BiForm:
    """Random homogeneous (p, q)-form; may come out with fewer terms when
    random generator lists collide."""
    total = BiForm.zero(ctx)
    candidates = [
        (name, idx)
        for name in ctx.dep_names
        for idx in enumerate_upto(gen_norm, ctx.m)
    ]
    for _ in range(terms):
        if p > len(candidates) or q > ctx.m:
            break
        vlist = tuple(
            sorted(rng.sample(candidates, p), key=lambda g: (g[0], g[1].grlex_key()))
        )
        hlist = tuple(sorted(rng.sample(range(1, ctx.m + 1), q)))
        coeff = rand_poly(rng, ctx, **(coeff_kwargs or {}))
        total = total + BiForm(ctx, {(vlist, hlist): coeff})
    return total


# --- random bicomplexes -----------------------------------------------------


def _identity(n: int) -> list[list[Fraction]]:
    return [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]


def _mat_mul(a, b):
    if not a or not b:
        return [[Fraction(0)] * (len(b[0]) if b else 0) for _ in range(len(a))]
    return [
        [sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0]))]
        for i in range(len(a))
    ]


def invertible_pair(rng: random.Random, n: int):
    """A random invertible rational matrix together with its exact inverse,
    built from elementary row operations."""
    T = _identity(n)
    T_inv = _identity(n)
    for _ in range(2 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        lam = Fraction(rng.randint(-2, 2))
        if lam == 0:
            continue
        # T <- E T with E = I + lam e_ij ; T_inv <- T_inv E^{-1}
        for c in range(n):
            T[i][c] += lam * T[j][c]
        for r in range(n):
            T_inv[r][j] -= lam * T_inv[r][i]
    return T, T_inv


def rand_exact_rows_bicomplex(rng: random.Random):
    """A random first-quadrant bicomplex whose rows are exact away from the
    last column, disguised by a random change of basis in every spot.

    Construction: each row is a sum of horizontal identity pairs; the last
    column additionally holds surviving generators ("dots") and vertical
    identity pairs.  Returns (dims, d_v, d_h, expected) where expected maps
    (p, q) to the known E_2 = E_inf dimension.
    """
    rows = rng.randint(2, 4)
    cols = rng.randint(2, 4)
    last = cols - 1
    # horizontal pair multiplicities r[p][q]: block between columns q, q+1
    r = [[rng.randint(0, 1) for _ in range(max(cols - 1, 0))] for _ in range(rows)]
    v = [rng.randint(0, 1) for _ in range(rows - 1)] + [0]  # vertical pairs p -> p+1
    e = []
    for p in range(rows):
        cap = 3 - (r[p][last - 1] if last >= 1 else 0)
        cap -= (v[p - 1] if p >= 1 else 0) + v[p]
        e.append(rng.randint(0, max(cap, 0)))

    def block_sizes(p: int, q: int) -> list[int]:
        # ordered blocks inside the spot
        if q < last:
            incoming = r[p][q - 1] if q >= 1 else 0
            return [incoming, r[p][q]]
        incoming = r[p][last - 1] if last >= 1 else 0
        v_in = v[p - 1] if p >= 1 else 0
        return [incoming, e[p], v_in, v[p]]

    dims = [[sum(block_sizes(p, q)) for q in range(cols)] for p in range(rows)]

    def zeros(out_dim, in_dim):
        return [[Fraction(0)] * in_dim for _ in range(out_dim)]

    d_h = {}
    d_v = {}
    for p in range(rows):
        for q in range(cols):
            if q + 1 < cols:
                mat = zeros(dims[p][q + 1], dims[p][q])
                # outgoing pair block maps identically onto the incoming
                # block of the next column (both have size r[p][q])
                src_off = block_sizes(p, q)[0]
                for t in range(r[p][q]):
                    mat[t][src_off + t] = Fraction(1)
                d_h[(p, q)] = mat
            if p + 1 < rows and q == last:
                mat = zeros(dims[p + 1][q], dims[p][q])
                sizes_src = block_sizes(p, q)
                sizes_dst = block_sizes(p + 1, q)
                src_off = sizes_src[0] + sizes_src[1] + sizes_src[2]
                dst_off = sizes_dst[0] + sizes_dst[1]
                for t in range(v[p]):
                    mat[dst_off + t][src_off + t] = Fraction(1)
                d_v[(p, q)] = mat

    # disguise by conjugation
    transforms = {}
    for p in range(rows):
        for q in range(cols):
            transforms[(p, q)] = invertible_pair(rng, dims[p][q])
    new_dh = {}
    new_dv = {}
    for p in range(rows):
        for q in range(cols):
            if (p, q) in d_h:
                T_target, _ = transforms[(p, q + 1)]
                _, T_inv = transforms[(p, q)]
                new_dh[(p, q)] = _mat_mul(_mat_mul(T_target, d_h[(p, q)]), T_inv)
            if (p, q) in d_v:
                T_target, _ = transforms[(p + 1, q)]
                _, T_inv = transforms[(p, q)]
                new_dv[(p, q)] = _mat_mul(_mat_mul(T_target, d_v[(p, q)]), T_inv)

    expected = {}
    for p in range(rows):
        for q in range(cols):
            expected[(p, q)] = e[p] if q == last else 0
    return dims, new_dv, new_dh, expected
