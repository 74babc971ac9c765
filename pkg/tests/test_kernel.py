import random
from itertools import combinations_with_replacement

import pytest
from hypothesis import given, settings, strategies as st

from wdvvlab.kernel import (KernelError, MultipleFactor, NotDivisible,
                            NotHomogeneous, Poly, PolyMatrix, RatFrac, Ring,
                            Squarefree, WeightVector, as_mpq, det, gcd_in,
                            is_squarefree_in, jacobian, matrix_invert,
                            poly_gcd, resultant, to_univar, weighted_degree)
from wdvvlab.exprio import parse, parse_poly, render

from conftest import random_nonzero, random_poly


# ---------------------------------------------------------------------------
# arithmetic


def test_difference_of_squares(xy):
    assert parse("(x+y)*(x-y)", xy) == parse("x^2-y^2", xy)


def test_potential_assembles_from_pieces():
    # the rank-3 polynomial potential with weights (1/2, 3/4, 1),
    # assembled term by term from parsed pieces
    R = Ring(["x1", "x2", "x3"])
    pieces = ["1/2*x1*x3^2", "1/2*x2^2*x3", "1/4*x1^2*x2^2", "1/60*x1^5"]
    acc = R.zero()
    for s in pieces:
        acc = acc + parse_poly(s, R)
    whole = parse_poly("(x1*x3^2+x2^2*x3)/2 + x1^2*x2^2/4 + x1^5/60", R)
    assert acc == whole
    assert len(acc) == 4


def test_additive_inverse_seeded(xyz, rng):
    for _ in range(50):
        p = random_poly(xyz, rng)
        assert (p + (-p)).is_zero()


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 10**6))
def test_ring_axioms_seeded(seed):
    rng = random.Random(seed)
    R = Ring(["x", "y", "z"])
    a, b, c = (random_poly(R, rng, nterms=4, maxdeg=3) for _ in range(3))
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert a * R.one() == a
    assert (a * R.zero()).is_zero()


def test_pow_matches_repeated_product(xy, rng):
    p = random_poly(xy, rng, nterms=3, maxdeg=2)
    q = xy.one()
    for k in range(5):
        assert p ** k == q
        q = q * p


# ---------------------------------------------------------------------------
# differentiation


def test_partial_of_f0_three_vars():
    R = Ring(["x1", "x2", "x3"])
    f = parse_poly("1/2*x1*x3^2 + 1/2*x2^2*x3", R)
    assert f.diff(2) == parse_poly("x1*x3 + 1/2*x2^2", R)


def test_derivative_of_constant(xy):
    assert xy.const(7).diff(0).is_zero()


def test_leibniz_and_mixed_partials(xyz, rng):
    for _ in range(20):
        f = random_poly(xyz, rng)
        g = random_poly(xyz, rng)
        for v in range(3):
            assert (f * g).diff(v) == f.diff(v) * g + g.diff(v) * f
        assert f.diff(0).diff(1) == f.diff(1).diff(0)


def test_euler_identity_weighted_homogeneous():
    R = Ring(["x1", "x2", "x3"])
    w = WeightVector(["1/2", "3/4", 1])
    p = parse_poly("x1^2*x2^2 + 3*x1*x3^2", R)  # weighted degree 5/2
    d = weighted_degree(p, w)
    euler = R.zero()
    for j, name in enumerate(R.vars):
        euler = euler + R.var(name) * p.diff(j) * w[j]
    assert euler == p * d


# ---------------------------------------------------------------------------
# substitution


def test_binomial_substitution(xy):
    R2 = Ring(["u", "v"])
    p = parse_poly("x^2", xy)
    out = p.subs({"x": R2.var("u") + R2.var("v"), "y": R2.zero()}, R2)
    assert out == parse_poly("u^2+2*u*v+v^2", R2)


def test_identity_substitution(xyz, rng):
    p = random_poly(xyz, rng)
    assert p.subs({}) == p


def test_substitute_commutes_with_arithmetic(xy, rng):
    R2 = Ring(["u", "v"])
    bind = {"x": parse_poly("u+v", R2), "y": parse_poly("u*v-1", R2)}
    for _ in range(10):
        a = random_poly(xy, rng, nterms=3, maxdeg=3)
        b = random_poly(xy, rng, nterms=3, maxdeg=3)
        assert (a * b).subs(bind, R2) == a.subs(bind, R2) * b.subs(bind, R2)
        assert (a + b).subs(bind, R2) == a.subs(bind, R2) + b.subs(bind, R2)


def test_substitute_with_fraction_gives_ratfrac(xy):
    p = parse_poly("x^2+y", xy)
    half = RatFrac(xy.one(), parse_poly("y", xy))
    out = p.subs({"x": half})
    assert isinstance(out, RatFrac)
    assert out == RatFrac(parse_poly("1+y^3", xy), parse_poly("y^2", xy))


# ---------------------------------------------------------------------------
# exact division


def test_exact_divide_basic(xy):
    a = parse_poly("x^2-y^2", xy)
    b = parse_poly("x-y", xy)
    assert a.exact_div(b) == parse_poly("x+y", xy)


def test_exact_divide_remainder_detected():
    R = Ring(["x"])
    with pytest.raises(NotDivisible):
        parse_poly("x^2+1", R).exact_div(parse_poly("x-1", R))


def test_exact_divide_roundtrip_seeded(xyz, rng):
    for _ in range(25):
        a = random_nonzero(xyz, rng, nterms=4, maxdeg=3)
        b = random_nonzero(xyz, rng, nterms=3, maxdeg=3)
        assert (a * b).exact_div(b) == a


# ---------------------------------------------------------------------------
# weighted degree


def test_weighted_degree_of_rank3_potential():
    R = Ring(["x1", "x2", "x3"])
    w = WeightVector(["1/2", "3/4", 1])
    f = parse_poly(
        "(x1*x3^2+x2^2*x3)/2 + x1^2*x2^2/4 + x1^5/60", R)
    assert weighted_degree(f, w) == as_mpq(5, 2)


def test_weighted_degree_witness():
    R = Ring(["x1", "x2", "x3"])
    w = WeightVector(["1/2", "3/4", 1])
    r = weighted_degree(parse_poly("x1*x3^2 + x2^3", R), w)
    assert isinstance(r, NotHomogeneous)
    degs = {d for _, d in r.witness}
    assert degs == {as_mpq(5, 2), as_mpq(9, 4)}


def test_weighted_degree_single_monomial(xyz):
    # 1/2 + 2*(1/3) + 3*1 = 25/6
    assert weighted_degree(parse_poly("x*y^2*z^3", xyz),
                           ["1/2", "1/3", 1]) == as_mpq(25, 6)


# ---------------------------------------------------------------------------
# resultants: oracle = Sylvester determinant (independent route)


def sylvester_resultant(a, b, var):
    ca = to_univar(a, var)
    cb = to_univar(b, var)
    n, m = len(ca) - 1, len(cb) - 1
    ring = a.ring
    size = n + m
    rows = []
    for i in range(m):
        row = [ring.zero()] * size
        for j, c in enumerate(reversed(ca)):
            row[i + j] = c
        rows.append(row)
    for i in range(n):
        row = [ring.zero()] * size
        for j, c in enumerate(reversed(cb)):
            row[i + j] = c
        rows.append(row)
    return det(PolyMatrix(ring, rows), strategy="cofactor")


def test_resultant_linear_case(xy):
    # res_y(y^2 - x, y) via the 3x3 Sylvester determinant is -x
    a = parse_poly("y^2-x", xy)
    b = parse_poly("y", xy)
    assert sylvester_resultant(a, b, 1) == parse_poly("-x", xy)
    assert resultant(a, b, 1) == parse_poly("-x", xy)


def test_resultant_common_root(xy):
    f = parse_poly("x*y^2 + x + y", xy)
    assert resultant(f, f, 1).is_zero()


def test_resultant_matches_sylvester_seeded(xy, rng):
    for _ in range(20):
        a = random_nonzero(xy, rng, nterms=3, maxdeg=3)
        b = random_nonzero(xy, rng, nterms=3, maxdeg=3)
        if a.degree(1) < 1 or b.degree(1) < 1:
            continue
        assert resultant(a, b, 1) == sylvester_resultant(a, b, 1)


def test_resultant_both_constant_rejected(xy):
    with pytest.raises(KernelError):
        resultant(parse_poly("x", xy), parse_poly("x+1", xy), 1)


# ---------------------------------------------------------------------------
# gcd


def test_gcd_in_simple():
    R = Ring(["x"])
    a = parse_poly("(x-1)^2*(x+2)", R)
    b = parse_poly("(x-1)*(x+5)", R)
    g = gcd_in(a, b, 0)
    assert g == parse_poly("x-1", R)


def test_gcd_of_coprime_seeded(xy, rng):
    hits = 0
    for _ in range(12):
        a = random_nonzero(xy, rng, nterms=3, maxdeg=2)
        b = random_nonzero(xy, rng, nterms=3, maxdeg=2)
        if a.degree(1) < 1 or b.degree(1) < 1:
            continue
        r = resultant(a, b, 1)
        if r.is_zero():
            continue
        # nonzero resultant certifies coprimality in y
        assert gcd_in(a, b, 1).degree(1) == 0
        hits += 1
    assert hits >= 5


def test_gcd_with_zero(xy):
    p = parse_poly("x*y+1", xy)
    assert gcd_in(p, xy.zero(), 1) == p


def test_poly_gcd_recovers_common_factor(xy):
    g = parse_poly("x+y+1", xy)
    a = g * parse_poly("x-y", xy)
    b = g * parse_poly("x^2+3", xy)
    assert poly_gcd(a, b) == g


# ---------------------------------------------------------------------------
# squarefreeness


def test_multiple_factor_detected():
    R = Ring(["x"])
    r = is_squarefree_in(parse_poly("(x-1)^2*(x+2)", R), 0, seed=3)
    assert isinstance(r, MultipleFactor)
    assert r.witness == parse_poly("x-1", R)


def test_linear_is_squarefree():
    R = Ring(["x"])
    assert isinstance(is_squarefree_in(parse_poly("x+1", R), 0),
                      Squarefree)


def test_squarefree_multivariate(xy):
    p = parse_poly("x^2*y + y + 1", xy)
    assert isinstance(is_squarefree_in(p, 0, seed=11), Squarefree)


# ---------------------------------------------------------------------------
# determinants


def test_det_upper_triangular(xy):
    x = parse_poly("x", xy)
    M = PolyMatrix(xy, [[x, xy.one()], [xy.zero(), x]])
    assert det(M) == parse_poly("x^2", xy)


def test_det_bareiss_equals_cofactor_seeded(xyz, rng):
    for n in range(1, 6):
        for _ in range(4):
            M = PolyMatrix(xyz, [[random_poly(xyz, rng, nterms=2, maxdeg=2)
                                  for _ in range(n)] for _ in range(n)])
            assert det(M, "bareiss") == det(M, "cofactor")


def test_det_multiplicative_seeded(xyz, rng):
    n = 3
    A = PolyMatrix(xyz, [[random_poly(xyz, rng, nterms=2, maxdeg=1)
                          for _ in range(n)] for _ in range(n)])
    B = PolyMatrix(xyz, [[random_poly(xyz, rng, nterms=2, maxdeg=1)
                          for _ in range(n)] for _ in range(n)])
    assert det(A * B) == det(A) * det(B)


def test_det_with_ratfrac_entries(xy):
    x, y = parse_poly("x", xy), parse_poly("y", xy)
    M = PolyMatrix(xy, [[RatFrac(xy.one(), x), y],
                        [y, RatFrac(x, y)]])
    d = det(M)
    # 1/x * x/y - y^2 = 1/y - y^2
    assert d == RatFrac(xy.one() - y ** 3, y)


def test_det_nonsquare_rejected(xy):
    with pytest.raises(KernelError):
        det(PolyMatrix(xy, [[xy.one(), xy.zero()]]))


# ---------------------------------------------------------------------------
# inversion and jacobians


def test_invert_identity(xy):
    I = PolyMatrix.identity(xy, 3)
    assert matrix_invert(I) == I.map(RatFrac)


def test_invert_2x2_closed_form():
    R = Ring(["a", "b", "c", "d"])
    a, b, c, d = (parse_poly(v, R) for v in "abcd")
    M = PolyMatrix(R, [[a, b], [c, d]])
    inv = matrix_invert(M)
    dt = a * d - b * c
    assert inv[0, 0] == RatFrac(d, dt)
    assert inv[0, 1] == RatFrac(-b, dt)
    assert inv[1, 0] == RatFrac(-c, dt)
    assert inv[1, 1] == RatFrac(a, dt)
    prod = M * inv
    assert prod[0, 0] == 1 and prod[1, 1] == 1
    assert prod[0, 1].is_zero() and prod[1, 0].is_zero()


def test_jacobian_orientation(xy):
    J = jacobian([parse_poly("x^2", xy), parse_poly("y^3", xy)], [0, 1], xy)
    assert J[0, 0] == parse_poly("2*x", xy)
    assert J[0, 1].is_zero()
    assert J[1, 0].is_zero()
    assert J[1, 1] == parse_poly("3*y^2", xy)


def test_jacobian_chain_rule():
    # two maps u = (x+y, x*y), w = (u1^2, u1+u2); J_w/x = J_u/x * J_w/u
    Rx = Ring(["x", "y"])
    Ru = Ring(["u1", "u2"])
    u1, u2 = parse_poly("x+y", Rx), parse_poly("x*y", Rx)
    w1, w2 = parse_poly("u1^2", Ru), parse_poly("u1+u2", Ru)
    Ju = jacobian([u1, u2], [0, 1], Rx)
    bind = {"u1": u1, "u2": u2}
    Jw_u = jacobian([w1, w2], [0, 1], Ru).map(lambda p: p.subs(bind, Rx))
    composed = [w1.subs(bind, Rx), w2.subs(bind, Rx)]
    assert jacobian(composed, [0, 1], Rx) == Ju * Jw_u


# ---------------------------------------------------------------------------
# resultant/gcd correspondence


def test_resultant_zero_iff_gcd_positive_degree(xy, rng):
    checked = 0
    for k in range(14):
        a = random_nonzero(xy, rng, nterms=2, maxdeg=2)
        b = random_nonzero(xy, rng, nterms=2, maxdeg=2)
        if rng.random() < 0.5:
            common = random_nonzero(xy, rng, nterms=2, maxdeg=1)
            if common.degree(1) > 0:
                a, b = a * common, b * common
        if a.degree(1) < 1 or b.degree(1) < 1:
            continue
        r = resultant(a, b, 1)
        g = gcd_in(a, b, 1)
        assert r.is_zero() == (g.degree(1) > 0)
        checked += 1
    assert checked >= 8
