import random
from fractions import Fraction

import pytest

from jetcalc import (
    FilteredComplex,
    InputValidationError,
    d_r_map,
    e_infinity,
    e_page,
    from_bicomplex,
    stabilization_radius,
    total_cohomology_dim,
    z_space,
)
from jetcalc.linalg import Subspace, rref

from conftest import rand_exact_rows_bicomplex

F = Fraction


def two_step_three_dim():
    """C^0 = Q^2 --(a,b)->a+b--> C^1 = Q with F_1 C^0 = span(e1 - e2)."""
    return FilteredComplex(
        n_min=0,
        n_max=1,
        dims={0: 2, 1: 1},
        diff={0: ((F(1), F(1)),)},
        p_min=0,
        p_max=1,
        filt={
            0: {0: [(F(1), F(0)), (F(0), F(1))], 1: [(F(1), F(-1))]},
            1: {0: [(F(1),)], 1: []},
        },
    )


def staircase():
    """Four-dimensional bicomplex with exactly one surviving d_2."""
    dims = [[0, 1], [1, 1], [1, 0]]
    d_v = {(0, 1): ((F(1),),), (1, 0): ((F(1),),)}
    d_h = {(1, 0): ((F(-1),),)}
    return from_bicomplex(dims, d_v, d_h)


def test_z_space_hand_example():
    K = two_step_three_dim()
    z = z_space(K, 0, 0, 1)
    assert z.dim == 1 and z.contains((F(1), F(-1)))
    assert e_page(K, 0, 0, 1).dimension == 0
    assert e_page(K, 1, -1, 1).dimension == 1
    assert e_page(K, 0, 1, 1).dimension == 0
    assert e_infinity(K, 1, -1).dimension == 1
    assert total_cohomology_dim(K, 0) == 1
    assert total_cohomology_dim(K, 1) == 0


def test_zero_differential_pages_never_move():
    K = FilteredComplex(
        n_min=0,
        n_max=1,
        dims={0: 2, 1: 1},
        diff={},
        p_min=0,
        p_max=1,
        filt={
            0: {0: [(F(1), F(0)), (F(0), F(1))], 1: [(F(1), F(1))]},
            1: {0: [(F(1),)], 1: []},
        },
    )
    for p, q in [(0, 0), (1, -1), (0, 1)]:
        base = e_page(K, p, q, 0).dimension
        for r in (1, 2, 3, 7):
            assert e_page(K, p, q, r).dimension == base
        assert e_infinity(K, p, q).dimension == base
    # r <= 0 reproduces the associated graded of the filtration
    assert z_space(K, 0, 0, 0) == K.filtration(0, 0)
    assert z_space(K, 0, 0, -2) == K.filtration(0, 0)


def test_identity_complex_collapses():
    K = FilteredComplex(
        n_min=0,
        n_max=1,
        dims={0: 1, 1: 1},
        diff={0: ((F(1),),)},
        p_min=0,
        p_max=0,
        filt={0: {0: [(F(1),)]}, 1: {0: [(F(1),)]}},
    )
    assert e_page(K, 0, 0, 0).dimension == 1
    for r in (1, 2, 3):
        assert e_page(K, 0, 0, r).dimension == 0
        assert e_page(K, 0, 1, r).dimension == 0
    assert e_infinity(K, 0, 0).dimension == 0
    assert e_infinity(K, 0, 1).dimension == 0


def test_first_quadrant_boundary_conventions():
    K = staircase()
    for r in (0, 1, 2, 5):
        assert e_page(K, -1, 2, r).dimension == 0
        assert e_page(K, 1, -2, r).dimension == 0


def test_staircase_has_one_surviving_d2():
    K = staircase()
    assert e_page(K, 0, 1, 2).dimension == 1
    assert e_page(K, 2, 0, 2).dimension == 1
    matrix = d_r_map(K, 0, 1, 2)
    assert len(matrix) == 1 and len(matrix[0]) == 1 and matrix[0][0] != 0
    for pq in [(0, 1), (2, 0), (1, 0), (1, 1)]:
        assert e_page(K, pq[0], pq[1], 3).dimension == 0
        assert e_infinity(K, *pq).dimension == 0
    # d_1 on the staircase: E_1^{1,0} -> E_1^{2,0} is trivial (source dies at E_1)
    assert e_page(K, 1, 0, 1).dimension == 0


def test_d1_is_row_cohomology_differential():
    # two-column bicomplex where d_1 acts by the induced vertical map
    dims = [[1, 0], [1, 0]]
    d_v = {(0, 0): ((F(3),),)}
    K = from_bicomplex(dims, d_v, {})
    assert e_page(K, 0, 0, 1).dimension == 1
    assert e_page(K, 1, 0, 1).dimension == 1
    matrix = d_r_map(K, 0, 0, 1)
    assert matrix == ((F(3),),)
    assert e_page(K, 0, 0, 2).dimension == 0
    assert e_page(K, 1, 0, 2).dimension == 0


def test_dr_composition_vanishes():
    K = staircase()
    for r in (1, 2):
        for p in range(0, 3):
            for q in range(0, 3):
                first = d_r_map(K, p, q, r)
                second = d_r_map(K, p + r, q - r + 1, r)
                if first and second and first[0] and second[0]:
                    product = [
                        [
                            sum(
                                (second[i][k] * first[k][j] for k in range(len(first))),
                                F(0),
                            )
                            for j in range(len(first[0]))
                        ]
                        for i in range(len(second))
                    ]
                    assert all(v == 0 for row in product for v in row)


def _derived_page_identity(K, p, q, r):
    """dim E_{r+1} = dim ker d_r - rank of the incoming d_r."""
    page_next = e_page(K, p, q, r + 1)
    out = d_r_map(K, p, q, r)
    incoming = d_r_map(K, p - r, q + r - 1, r)
    dim_source = e_page(K, p, q, r).dimension
    rank_out = len(rref(out)[1]) if out else 0
    rank_in = len(rref(incoming)[1]) if incoming else 0
    assert page_next.dimension == (dim_source - rank_out) - rank_in


def test_derived_page_identity_on_staircase():
    K = staircase()
    for r in (0, 1, 2, 3):
        for p in range(0, 3):
            for q in range(0, 3):
                _derived_page_identity(K, p, q, r)


def test_exact_rows_bicomplexes_collapse_at_e2():
    rng = random.Random(20240817)
    for _ in range(6):
        dims, d_v, d_h, expected = rand_exact_rows_bicomplex(rng)
        K = from_bicomplex(dims, d_v, d_h)
        for (p, q), dim_expected in expected.items():
            assert e_page(K, p, q, 2).dimension == dim_expected
            limit = e_infinity(K, p, q)
            assert limit.dimension == dim_expected
            for r in (2, 3, 4):
                assert e_page(K, p, q, r).dimension == dim_expected
        for n in range(0, len(dims) + len(dims[0]) - 1):
            total = sum(
                e_infinity(K, p, n - p).dimension for p in range(0, len(dims))
            )
            assert total == total_cohomology_dim(K, n)


def test_euler_characteristic_preserved_across_pages():
    rng = random.Random(99)
    dims, d_v, d_h, _ = rand_exact_rows_bicomplex(rng)
    K = from_bicomplex(dims, d_v, d_h)
    spots = [(p, q) for p in range(-1, len(dims) + 1) for q in range(-1, len(dims[0]) + 1)]

    def chi(r):
        total = 0
        for p, q in spots:
            dim = (
                e_infinity(K, p, q).dimension
                if r is None
                else e_page(K, p, q, r).dimension
            )
            total += (-1) ** (p + q) * dim
        return total

    values = [chi(r) for r in (0, 1, 2, 3, None)]
    assert len(set(values)) == 1


def test_stabilization_radius_reported():
    K = staircase()
    limit = e_infinity(K, 0, 1)
    assert limit.stable_from == 3
    assert stabilization_radius(K, 1, 0) <= 3
    for pq in [(0, 1), (2, 0)]:
        r0 = stabilization_radius(K, *pq)
        for r in range(r0, r0 + 3):
            assert e_page(K, pq[0], pq[1], r).dimension == e_infinity(K, *pq).dimension


def test_bicomplex_validation():
    with pytest.raises(InputValidationError):
        # d_V o d_V != 0
        from_bicomplex(
            [[1, 0], [1, 0], [1, 0]],
            {(0, 0): ((F(1),),), (1, 0): ((F(1),),)},
            {},
        )
    with pytest.raises(InputValidationError):
        # anticommutation failure: square of identities without the sign twist
        from_bicomplex(
            [[1, 1], [1, 1]],
            {(0, 0): ((F(1),),), (0, 1): ((F(1),),)},
            {(0, 0): ((F(1),),), (1, 0): ((F(1),),)},
        )


def test_single_cell_bicomplex():
    K = from_bicomplex([[2]], {}, {})
    assert K.dim(0) == 2
    assert e_page(K, 0, 0, 1).dimension == 2
    assert e_infinity(K, 0, 0).dimension == 2


def test_random_bicomplex_totalization_squares_to_zero():
    rng = random.Random(7)
    for _ in range(5):
        dims, d_v, d_h, _ = rand_exact_rows_bicomplex(rng)
        K = from_bicomplex(dims, d_v, d_h)  # validation inside
        for n in range(K.n_min, K.n_max - 1):
            composed = [
                [
                    sum(
                        (K.differential(n + 1)[i][k] * K.differential(n)[k][j]
                         for k in range(K.dim(n + 1))),
                        F(0),
                    )
                    for j in range(K.dim(n))
                ]
                for i in range(K.dim(n + 2))
            ]
            assert all(v == 0 for row in composed for v in row)


def test_filtration_validation():
    with pytest.raises(InputValidationError):
        # filtration not preserved: d(F_1) escapes F_1
        FilteredComplex(
            n_min=0,
            n_max=1,
            dims={0: 1, 1: 1},
            diff={0: ((F(1),),)},
            p_min=0,
            p_max=1,
            filt={0: {0: [(F(1),)], 1: [(F(1),)]}, 1: {0: [(F(1),)], 1: []}},
        )


def test_complex_json_roundtrip():
    K = staircase()
    obj = K.to_json_obj()
    K2 = FilteredComplex.from_json_obj(obj)
    assert K2.to_json_obj() == obj
    assert e_page(K2, 0, 1, 2).dimension == 1


def test_subspace_primitives():
    a = Subspace(3, [(F(1), F(0), F(0)), (F(0), F(1), F(0))])
    b = Subspace(3, [(F(0), F(1), F(0)), (F(0), F(0), F(1))])
    meet = a.intersect(b)
    assert meet.dim == 1 and meet.contains((F(0), F(1), F(0)))
    join = a.add(b)
    assert join.dim == 3
    reps = join.quotient_representatives(meet)
    assert len(reps) == 2
