import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairsource import opcount
from pairsource.curve import (
    INFINITY,
    CurveParams,
    Point,
    is_on_curve,
    lift,
    neg,
    point_add,
    point_double,
    reduce_point,
    scalar_multi,
    sqrt_mod,
)
from pairsource.errors import NonResidue, NotInvertible

TOY_CURVES = [(83, 1, 0), (97, 2, 3), (67, 5, 7)]


def points_of(p, a, b):
    pts = [Point(x, y) for x in range(p) for y in range(p) if (y * y - x**3 - a * x - b) % p == 0]
    return [INFINITY] + pts


def chord_oracle(P, Q, p, a, b):
    """P + Q for P != +-Q, from the roots of x^3 + ax + b - L(x)^2 found by search."""
    m = (Q.y - P.y) * pow(Q.x - P.x, -1, p) % p

    def L(x):
        return (m * (x - P.x) + P.y) % p

    def g(x):
        return (x**3 + a * x + b - L(x) ** 2) % p

    roots = [x for x in range(p) if g(x) == 0]
    others = [x for x in roots if x not in (P.x, Q.x)]
    if others:
        (x3,) = others
    else:
        # a double root at P or Q: find it with the derivative
        def dg(x):
            return (3 * x * x + a - 2 * m * L(x)) % p

        (x3,) = [x for x in (P.x, Q.x) if dg(x) == 0]
    return Point(x3, -L(x3) % p)


def add_oracle(P, Q, p, a, b):
    if P is INFINITY:
        return Q
    if Q is INFINITY:
        return P
    if P.x == Q.x and (P.y + Q.y) % p == 0:
        return INFINITY
    return chord_oracle(P, Q, p, a, b)


def double_oracle(P, pts, p, a, b):
    if P is INFINITY or P.y == 0:
        return INFINITY
    # 2P = ((P + Q) + P) - Q using only chords
    for Q in pts[1:]:
        if Q.x == P.x:
            continue
        S = add_oracle(P, Q, p, a, b)
        if S is INFINITY or S.x == P.x:
            continue
        T = add_oracle(S, P, p, a, b)
        mQ = Point(Q.x, -Q.y % p)
        if T is INFINITY or T.x == Q.x:
            continue
        return add_oracle(T, mQ, p, a, b)
    raise AssertionError("no helper point")


@pytest.mark.parametrize("p,a,b", TOY_CURVES)
def test_addition_table_matches_enumeration(p, a, b):
    E = CurveParams(a, b, p)
    pts = points_of(p, a, b)
    for P, Q in itertools.product(pts, repeat=2):
        if P is not INFINITY and Q is not INFINITY and P == Q:
            expected = double_oracle(P, pts, p, a, b)
        else:
            expected = add_oracle(P, Q, p, a, b)
        assert point_add(P, Q, E) == expected, (P, Q)


@pytest.mark.parametrize("p,a,b", TOY_CURVES)
def test_doubling_matches_enumeration(p, a, b):
    E = CurveParams(a, b, p)
    pts = points_of(p, a, b)
    for P in pts:
        assert point_double(P, E) == double_oracle(P, pts, p, a, b)


@pytest.mark.parametrize("p,a,b", TOY_CURVES)
def test_group_axioms_exhaustive(p, a, b):
    E = CurveParams(a, b, p)
    pts = points_of(p, a, b)
    for P in pts:
        assert point_add(P, INFINITY, E) == P
        assert point_add(P, neg(P, E), E) is INFINITY
        assert scalar_multi(P, len(pts), E) is INFINITY
    sample = random.Random(p).sample(pts, 12)
    for P, Q, R in itertools.product(sample, repeat=3):
        assert point_add(point_add(P, Q, E), R, E) == point_add(P, point_add(Q, R, E), E)
        assert is_on_curve(point_add(P, Q, E), E)


def test_supersingular_order_is_p_plus_one():
    for p in (83, 103, 107, 127, 131, 139):
        assert len(points_of(p, 1, 0)) == p + 1


def test_two_torsion_doubles_to_infinity():
    E = CurveParams(1, 0, 83)
    assert point_double(Point(0, 0), E) is INFINITY


def test_scalar_multi_small_cases(toy):
    E = toy.curve
    P = toy.generator
    assert scalar_multi(P, 0, E) is INFINITY
    assert scalar_multi(P, 1, E) == P
    assert scalar_multi(INFINITY, 5, E) is INFINITY
    assert scalar_multi(P, toy.r, E) is INFINITY
    with pytest.raises(ValueError):
        scalar_multi(P, -1, E)


@given(st.integers(min_value=0, max_value=60))
def test_scalar_multi_matches_repeated_addition(n):
    p, a, b = TOY_CURVES[1]
    E = CurveParams(a, b, p)
    P = points_of(p, a, b)[7]
    acc = INFINITY
    for _ in range(n):
        acc = point_add(acc, P, E)
    assert scalar_multi(P, n, E) == acc


@given(st.integers(min_value=1, max_value=2**64), st.integers(min_value=1, max_value=2**64))
@settings(max_examples=50)
def test_scalar_multi_distributes(toy, m, n):
    E = toy.curve
    G = toy.generator
    lhs = scalar_multi(G, m + n, E)
    rhs = point_add(scalar_multi(G, m, E), scalar_multi(G, n, E), E)
    assert lhs == rhs


def test_scalar_mult_counted_once(toy):
    with opcount.counting() as c:
        scalar_multi(toy.generator, 2**40 + 1, toy.curve)
    assert c.scalar_mult == 1 and c.point_op == 0


# Z_N arena

PQ = (1000003, 1000039)


@given(st.integers(2, 10**6), st.integers(2, 10**6), st.integers(0, 10**12), st.integers(0, 10**12))
def test_zn_ops_reduce_to_fp(x1, x2, k1, k2):
    p, q = PQ
    n = p * q
    a = 5
    # arbitrary residues: over Z_N the points need not lie on any curve
    P = Point((x1 + k1 * p) % n, (x2 + k2 * p) % n)
    Q = Point((x2 + k2 * p) % n, (x1 * 3 + k1 * p) % n)
    EN, Ep = CurveParams.over(n, a, 0), CurveParams.over(p, a, 0)
    for op in (lambda E, U, V: point_add(U, V, E), lambda E, U, V: point_double(U, E)):
        try:
            over_n = op(EN, P, Q)
        except NotInvertible:
            continue
        assert reduce_point(over_n, p) == op(Ep, reduce_point(P, p), reduce_point(Q, p))


def test_zn_denominator_sharing_a_factor_raises():
    p, q = PQ
    n = p * q
    E = CurveParams.over(n, 1, 0)
    P = Point(5, 7)
    Q = Point(5 + p, 11)  # x1 = x2 mod p only
    with pytest.raises(NotInvertible) as info:
        point_add(P, Q, E)
    assert info.value.gcd == p


def test_sqrt_and_lift(toy):
    p = toy.p
    assert sqrt_mod(4, p) ** 2 % p == 4
    non = next(v for v in range(2, 100) if pow(v, (p - 1) // 2, p) == p - 1)
    with pytest.raises(NonResidue):
        sqrt_mod(non, p)
    with pytest.raises(ValueError):
        sqrt_mod(4, 13)
    for x in range(1, 100):
        try:
            Q = lift(x, toy.curve)
            break
        except NonResidue:
            continue
    assert is_on_curve(Q, toy.curve)
    assert scalar_multi(Q, toy.r, toy.curve) is INFINITY


def test_coordinates_must_be_reduced():
    E = CurveParams(1, 0, 83)
    with pytest.raises(ValueError):
        point_add(Point(90, 1), INFINITY, E)
    with pytest.raises(ValueError):
        CurveParams(90, 0, 83)
