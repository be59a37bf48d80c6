"""Exact polynomial engine: arithmetic, resultants, discriminants, wire format."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from timf.polycore import (
    EXACT,
    FLOAT,
    BiPoly,
    DegreeTooLow,
    DegreeZero,
    ExactDivisionError,
    ModeMismatch,
    MPoly,
    Poly,
    QQi,
    content_in,
    det_bareiss,
    discriminant,
    gcd_in_var,
    gcd_univar,
    poly_eval,
    primitive_in,
    resultant,
    sylvester_matrix,
)

fractions_st = st.fractions(min_value=-100, max_value=100, max_denominator=20)


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------

@given(fractions_st, fractions_st, fractions_st, fractions_st)
def test_qqi_field_ops_closed(ar, ai, br, bi):
    a = QQi(ar, ai)
    b = QQi(br, bi)
    assert (a + b) - b == a
    assert a * b == b * a
    if b:
        assert (a * b) / b == a


def test_qqi_mixed_arithmetic():
    assert QQi(1, 2) + 3 == QQi(4, 2)
    assert 2 * QQi(Fraction(1, 2), 0) == QQi(1, 0)
    assert QQi(0, 1) * QQi(0, 1) == QQi(-1, 0)


# ---------------------------------------------------------------------------
# poly_eval
# ---------------------------------------------------------------------------

def test_eval_root_of_x2_plus_1():
    p = Poly("x", [1, 0, 1])
    assert poly_eval(p, QQi(0, 1)) == 0


def test_eval_origin_all_terms_vanish():
    # 2x^3 + 2xz + z at z = 0 collapses to 2x^3; value 0 at x = 0
    p = Poly("x", [0, 0, 0, 2])
    assert poly_eval(p, 0) == 0


def test_eval_triple_root_cubic_at_origin():
    # symmetric amplitude cubic at z = 0:  2D^3 + 12D^2 + 24D + 16 = 2(D+2)^3
    p = Poly("D", [16, 24, 12, 2])
    assert poly_eval(p, -2) == 0


def test_eval_mode_mismatch():
    p = Poly("x", [1, 0, 1])
    with pytest.raises(ModeMismatch):
        poly_eval(p, 0.5 + 0.1j)
    assert poly_eval(p.to_float(), 1j) == pytest.approx(0)


@given(st.lists(st.integers(min_value=-10**6, max_value=10**6), min_size=1, max_size=8),
       fractions_st)
def test_eval_float_matches_exact(coeffs, v):
    p = Poly("x", coeffs)
    if p.is_zero():
        return
    exact = poly_eval(p, v)
    approx = poly_eval(p.to_float(), complex(v))
    scale = max(1.0, abs(complex(exact)))
    assert abs(complex(exact) - approx) <= 1e-10 * scale


# ---------------------------------------------------------------------------
# resultants
# ---------------------------------------------------------------------------

def test_resultant_linear_case():
    r = resultant(Poly("x", [-3, 1]), Poly("x", [-5, 1]), "x")
    assert r.coeffs in ([2], [-2])


def test_resultant_substitutes_value():
    V = ("x", "z")
    x, z = MPoly.var("x", V), MPoly.var("z", V)
    r = resultant(x * x - z, x - MPoly.const(1, V), "x")
    one = MPoly.const(1, V)
    assert r == one - z or r == z - one


def test_resultant_degree_zero_error():
    V = ("x", "z")
    z = MPoly.var("z", V)
    with pytest.raises(DegreeZero):
        resultant(z + MPoly.const(1, V), MPoly.var("x", V), "x")


def _random_poly(rng, deg, var="x"):
    coeffs = [int(c) for c in rng.integers(-9, 10, deg + 1)]
    if coeffs[-1] == 0:
        coeffs[-1] = 1
    return Poly(var, coeffs)


def test_resultant_zero_iff_shared_root(rng):
    for _ in range(20):
        shared = Poly("x", [int(rng.integers(-5, 6)), 1])
        p = _random_poly(rng, int(rng.integers(1, 4))) * shared
        q = _random_poly(rng, int(rng.integers(1, 4))) * shared
        r = resultant(p, q, "x")
        assert r.is_zero() or all(c == 0 for c in r.coeffs)
    for _ in range(20):
        p = _random_poly(rng, int(rng.integers(1, 5)))
        q = _random_poly(rng, int(rng.integers(1, 5)))
        r = resultant(p, q, "x")
        # nonzero unless they actually share a root
        proots = np.roots(p.as_array()[::-1])
        qroots = np.roots(q.as_array()[::-1])
        share = min(abs(pr - qr) for pr in proots for qr in qroots) < 1e-9
        if not share:
            assert not r.is_zero()


def test_resultant_swap_sign(rng):
    for _ in range(10):
        m, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        p = _random_poly(rng, m)
        q = _random_poly(rng, n)
        r1 = resultant(p, q, "x")
        r2 = resultant(q, p, "x")
        sign = -1 if (p.degree * q.degree) % 2 else 1
        assert r1.coeffs == (r2 * sign).coeffs


def test_resultant_float_matches_exact(rng):
    p = _random_poly(rng, 3)
    q = _random_poly(rng, 2)
    r_exact = resultant(p, q, "x")
    r_float = resultant(p.to_float(), q.to_float(), "x")
    a = complex(QQi(r_exact.coeffs[0]) if not isinstance(r_exact.coeffs[0], QQi)
                else r_exact.coeffs[0])
    assert abs(a - r_float.coeffs[0]) <= 1e-10 * max(1.0, abs(a))


def test_resultant_of_system_matches_reference_degree7():
    # elimination of y from the two stationarity polynomials at unit
    # parameters, z fixed at 1, against the reference degree-7 polynomial
    V = ("x", "y")
    x, y = MPoly.var("x", V), MPoly.var("y", V)
    one = MPoly.const(1, V)
    E1 = 2 * x * x * y + x * x - y * y + 2 * y + one
    E2 = 2 * y * y * x + y * y - x * x + 2 * x + one
    r = resultant(E1, E2, "y")
    # reference coefficients at a1=a2=g1=g2=1, z=1 (ascending)
    reference = Poly("x", [-2, -8, -9, -8, -11, 0, -4, 2])
    derived = r.to_poly("x")
    ratio = Fraction(derived.coeffs[-1]) / Fraction(reference.coeffs[-1])
    assert ratio != 0
    assert [Fraction(c) * ratio for c in reference.coeffs] == \
        [Fraction(c) for c in derived.coeffs]


# ---------------------------------------------------------------------------
# discriminants
# ---------------------------------------------------------------------------

def test_discriminant_monic_quadratic():
    V = ("D", "b", "c")
    D, b, c = (MPoly.var(n, V) for n in V)
    disc = discriminant(D * D + b * D + c, "D")
    assert disc.num == b * b - 4 * c
    assert disc.den.is_const()


def test_discriminant_breaking_quadratic():
    # (1+z) D^2 - 4(1+z) D + 4: monic discriminant 16 z/(1+z), a constant
    # multiple of the reference 4z/(1+z)
    V = ("D", "z")
    D, z = MPoly.var("D", V), MPoly.var("z", V)
    one = MPoly.const(1, V)
    disc = discriminant((one + z) * D * D - 4 * (one + z) * D + MPoly.const(4, V), "D")
    vals = []
    for zq in (Fraction(1, 3), Fraction(2), Fraction(-5, 7)):
        num = disc.num.subs({"z": zq}).const_value()
        den = disc.den.subs({"z": zq}).const_value()
        ref = 4 * zq / (1 + zq)
        vals.append(Fraction(num, 1) / Fraction(den, 1) / ref)
    assert vals[0] == vals[1] == vals[2] != 0


def test_discriminant_cubic_zero_at_double_root():
    z = Fraction(-27, 16)
    p = Poly("D", [16, 8 * (3 - 4 * z), 4 * (3 + 10 * z + 4 * z * z), 2 + z])
    disc = discriminant(p, "D")
    assert disc.num.is_zero() or disc.num.const_value() == 0


def test_discriminant_degree_too_low():
    with pytest.raises(DegreeTooLow):
        discriminant(Poly("D", [1, 2]), "D")


# ---------------------------------------------------------------------------
# gcd / content machinery
# ---------------------------------------------------------------------------

def test_gcd_univar_known_factor():
    x = MPoly.var("x")
    one = MPoly.const(1, ("x",))
    a = (x - one) * (x - 2 * one) * (x - 2 * one)
    b = (x - 2 * one) * (x + 3 * one)
    g = gcd_univar(a, b)
    assert g == x - 2 * one


def test_content_and_primitive():
    V = ("D", "z")
    D, z = MPoly.var("D", V), MPoly.var("z", V)
    p = (z * z + z) * D + (z * z * z + z * z)  # content z(z+1)
    c = content_in(p, "D")
    assert c == z * (z + MPoly.const(1, V))
    prim = primitive_in(p, "D")
    assert prim == D + z


def test_gcd_in_var_extracts_square():
    V = ("D", "z")
    D, z = MPoly.var("D", V), MPoly.var("z", V)
    one = MPoly.const(1, V)
    q = (one + z) * D * D - 4 * (one + z) * D + MPoly.const(4, V)
    cubic = (2 * one + z) * D + one
    p = q * q * cubic
    g = gcd_in_var(p, p.derivative("D"), "D")
    # gcd contains the squared factor exactly once
    assert g.div_exact(q).degree_in("D") == 0 or primitive_in(g, "D") == primitive_in(q, "D")


def test_exact_division_error():
    x = MPoly.var("x")
    one = MPoly.const(1, ("x",))
    with pytest.raises(ExactDivisionError):
        (x * x + one).div_exact(x + one)


# ---------------------------------------------------------------------------
# containers and wire format
# ---------------------------------------------------------------------------

def test_poly_trims_and_degree():
    p = Poly("x", [1, 2, 0, 0])
    assert p.degree == 1
    assert Poly("x", [0, 0]).is_zero()
    assert Poly("x", []).degree == -1


def test_poly_json_round_trip_exact():
    p = Poly("x", [Fraction(1, 3), QQi(0, Fraction(2, 7)), 5])
    q = Poly.from_json(p.to_json())
    assert q.mode == EXACT
    assert q == Poly("x", [QQi(Fraction(1, 3)), QQi(0, Fraction(2, 7)), QQi(5)])


def test_poly_json_round_trip_float():
    p = Poly("x", [1.5 + 2j, 0.25])
    q = Poly.from_json(p.to_json())
    assert q.mode == FLOAT
    assert q.coeffs == p.coeffs


def test_bipoly_json_round_trip():
    bp = BiPoly("x", [Poly("z", [1, 2]), Poly("z", [0, 0, 3])])
    back = BiPoly.from_json_dict(bp.to_json_dict())
    assert back == bp


@given(st.lists(st.lists(st.integers(-50, 50), min_size=1, max_size=3),
                min_size=1, max_size=4),
       st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
def test_bipoly_joint_equals_sequential(rows, zv, xv):
    bp = BiPoly("x", [Poly("z", row) for row in rows])
    seq = poly_eval(bp.eval_at_z(zv), xv)
    joint = bp.eval(zv, xv)
    assert abs(seq - joint) <= 1e-9 * max(1.0, abs(joint))


def test_sylvester_and_bareiss_agree_with_numpy(rng):
    # float determinant of the Sylvester matrix matches numpy's
    p = _random_poly(rng, 4)
    q = _random_poly(rng, 3)
    mat = sylvester_matrix(p, q, "x")
    exact = det_bareiss(mat).const_value()
    m = np.array([[complex(QQi(e.const_value()) if not isinstance(e.const_value(), QQi)
                           else e.const_value()) for e in row] for row in mat])
    assert abs(complex(QQi(exact) if not isinstance(exact, QQi) else exact)
               - np.linalg.det(m)) <= 1e-6 * max(1.0, abs(np.linalg.det(m)))


def test_canonical_content_one():
    p = Poly("x", [Fraction(2, 3), Fraction(4, 3), -2]).canonical()
    assert p.coeffs == [-1, -2, 3] or p.coeffs == [1, 2, -3]
    # positive-real leading coefficient
    assert p.coeffs[-1] > 0
