"""Exact kernel: composition, iteration, division, valuations, orbits."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyheights.errors import BadReductionError, DegreeCapError, InputError
from polyheights.polynomials import (
    FpPolynomial,
    Polynomial,
    conjugate_linear,
    convolve_int,
    iterate_taylor_jet,
    leading_coefficient_power,
    orbit_mod_prime_power,
    poly_compose,
    poly_divide,
    poly_iterate,
    reduce_mod_p,
    root_multiplicity,
    valuation,
)

X = Polynomial.x()
P = Polynomial


def test_compose_binomial():
    assert poly_compose(P([0, 0, 1]), P([1, 1])) == P([1, 2, 1])


def test_compose_half_map_self():
    f = P(["0", "1/2", "1"])  # x^2 + x/2
    # Hand expansion of (x^2 + x/2)^2 + (x^2 + x/2)/2.
    assert poly_compose(f, f) == P(["0", "1/4", "3/4", "1", "1"])


def test_compose_identity_left():
    g = P([3, "1/7", 0, 2])
    assert poly_compose(X, g) == g
    assert poly_compose(g, X) == g


def test_iterate_power_map():
    assert poly_iterate(P([0, 0, 1]), 3) == P([0] * 8 + [1])


def test_iterate_worked_quadratic():
    # f = x^2 - (1+a)x with a = 4; second iterate minus x matches the
    # expansion x^4 - (2a+2)x^3 + (a^2+a)x^2 + (a^2+2a)x.
    f = P([0, -5, 1])
    f2 = poly_iterate(f, 2)
    assert f2 - X == P([0, 24, 20, -10, 1])
    assert f2 == P([0, 25, 20, -10, 1])


def test_iterate_zero_is_identity():
    assert poly_iterate(P([1, 2, 3]), 0) == X


def test_iterate_degree_cap():
    with pytest.raises(DegreeCapError):
        poly_iterate(P([0, 0, 1]), 20, degree_cap=1 << 10)


def test_divide_worked_example():
    num = P([0, 24, 20, -10, 1])
    den = P([0, -6, 1])
    q, r = poly_divide(num, den)
    assert q == P([-4, -4, 1])
    assert r.is_zero
    # Constant term -4 = -a for a = 4.
    assert q[0] == -4


def test_divide_by_one_and_x():
    f = P([2, 0, 5])
    q, r = poly_divide(f, P([1]))
    assert (q, r.is_zero) == (f, True)
    q, r = poly_divide(P([1, 0, 1]), X)
    assert q == X and r == P([1])


def test_divide_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        poly_divide(X, P())


def test_root_multiplicity_examples():
    assert root_multiplicity(P([0, -6, 1]), 0) == 1
    assert root_multiplicity(P([0, 24, 20, -10, 1]), 0) == 1
    assert root_multiplicity(P([0, 0, 1, 1]), 0) == 2
    assert root_multiplicity(P([1, 0, 1]), 0) == 0


def test_conjugate_chebyshev_to_monic():
    t2 = P([-1, 0, 2])
    assert conjugate_linear(t2, 2, 0) == P([-2, 0, 1])


def test_conjugate_identity():
    f = P([1, "2/3", 1])
    assert conjugate_linear(f, 1, 0) == f


def test_conjugate_moves_fixed_points():
    f = P(["0", "1/2", 1])  # fixes 0 and 1/2
    g = conjugate_linear(f, 1, Fraction(-1, 2))
    for zeta in (Fraction(0), Fraction(1, 2)):
        sigma = zeta - Fraction(1, 2)
        assert g.evaluate(sigma) == sigma


def test_reduce_mod_p():
    assert reduce_mod_p(P([1, 0, 1]), 3) == FpPolynomial(3, [1, 0, 1])
    assert reduce_mod_p(P([0, -5, 1]), 2) == FpPolynomial(2, [0, 1, 1])
    with pytest.raises(BadReductionError):
        reduce_mod_p(P(["0", "1/2", "1"]), 2)


def test_valuation_examples():
    assert valuation(675, 5) == 2
    assert valuation(Fraction(1, 2), 2) == -1
    assert valuation(0, 7) == math.inf
    assert valuation(Fraction(9, 25), 5) == -2


def test_leading_coefficient_power():
    monic = P([3, 1, 0, 1])
    assert leading_coefficient_power(monic, 5).log_abs == 0.0
    lp = leading_coefficient_power(P([0, 1, 3]), 3)
    assert lp.exponent == 7
    assert lp.log_abs == pytest.approx(7 * math.log(3))
    assert lp.valuation(3) == 7
    # (1/2^n) log|B_n| for T_2 tends to log 2.
    t2 = P([-1, 0, 2])
    vals = [leading_coefficient_power(t2, n).log_abs / 2**n for n in (4, 8, 16)]
    assert vals[-1] == pytest.approx(math.log(2), abs=1e-4)
    assert abs(vals[2] - math.log(2)) < abs(vals[0] - math.log(2))


def test_orbit_mod_prime_power_examples():
    f = P([1, 0, 1])
    orbit = orbit_mod_prime_power(f, 2, 5, 4, 4)
    # f^3(2) = 677 so v_5(675) = 2.
    assert orbit.difference_valuations[3] == 2
    assert orbit.difference_valuations[1] == 0
    assert orbit.residues[3].residue == 677 % 5**4
    # Truncation too small only flags the valuation.
    shallow = orbit_mod_prime_power(f, 2, 5, 4, 2)
    assert shallow.difference_valuations[3] is None


def test_orbit_mod_prime_power_preconditions():
    with pytest.raises(BadReductionError):
        orbit_mod_prime_power(P(["0", "1/2", 1]), 1, 2, 3, 8)
    with pytest.raises(InputError):
        orbit_mod_prime_power(P([1, 0, 1]), Fraction(1, 5), 5, 3, 8)


def test_iterate_taylor_jet_matches_iterate():
    f = P([1, -1, 2])
    q = Fraction(1, 3)
    jet = iterate_taylor_jet(f, q, 4, 3)
    f4 = poly_iterate(f, 4)
    shifted = f4.compose(P([q, 1]))  # f^(4)(q + t)
    for k in range(4):
        assert jet[k] == shifted[k]


def test_iterate_taylor_jet_fixed_point_multiplier():
    # 2 is fixed by x^2 - 2 with multiplier 4: jet c_1 = 4^n.
    f = P([-2, 0, 1])
    jet = iterate_taylor_jet(f, 2, 6, 1)
    assert jet[0] == 2
    assert jet[1] == 4**6


# ----------------------------------------------------------------------
# Invariants
# ----------------------------------------------------------------------

small_rationals = st.fractions(
    min_value=-4, max_value=4, max_denominator=6
)


@st.composite
def polynomials(draw, max_degree=5, nonzero=False, min_degree=0):
    deg = draw(st.integers(min_value=min_degree, max_value=max_degree))
    coeffs = [draw(small_rationals) for _ in range(deg)]
    lead = draw(small_rationals.filter(lambda c: c != 0))
    poly = Polynomial(coeffs + [lead])
    if nonzero and poly.is_zero:
        poly = Polynomial([1])
    return poly


@settings(max_examples=60, deadline=None)
@given(polynomials(max_degree=3, min_degree=2), st.integers(0, 2), st.integers(0, 2))
def test_iterate_semigroup(f, m, n):
    lhs = poly_iterate(f, m + n)
    rhs = poly_compose(poly_iterate(f, m), poly_iterate(f, n))
    assert lhs == rhs


@settings(max_examples=120, deadline=None)
@given(polynomials(max_degree=6), polynomials(max_degree=4, nonzero=True))
def test_divmod_reconstruction(f, g):
    q, r = poly_divide(f, g)
    assert q * g + r == f
    assert r.degree < g.degree


@settings(max_examples=80, deadline=None)
@given(polynomials(max_degree=4, nonzero=True), small_rationals, st.integers(0, 3))
def test_root_multiplicity_shift(f, xi, k):
    factor = Polynomial([-xi, 1]) ** k
    assert root_multiplicity(f * factor, xi) == root_multiplicity(f, xi) + k


@settings(max_examples=80, deadline=None)
@given(
    polynomials(max_degree=4),
    small_rationals.filter(lambda a: a != 0),
    small_rationals,
)
def test_conjugation_roundtrip(f, alpha, beta):
    g = conjugate_linear(f, alpha, beta)
    assert conjugate_linear(g, 1 / alpha, -beta / alpha) == f


@settings(max_examples=150, deadline=None)
@given(small_rationals, small_rationals, st.sampled_from([2, 3, 5, 7]))
def test_valuation_axioms(a, b, p):
    va, vb = valuation(a, p), valuation(b, p)
    if a != 0 and b != 0:
        assert valuation(a * b, p) == va + vb
    v_sum = valuation(a + b, p)
    assert v_sum >= min(va, vb)
    if va != vb:
        assert v_sum == min(va, vb)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(-6, 6),
    st.integers(-6, 6),
    st.integers(0, 40),
    st.sampled_from([2, 3, 5]),
)
def test_orbit_truncation_matches_exact_orbit(b, c, q, p):
    # Monic quadratic with integer coefficients has good reduction at all p.
    f = Polynomial([c, b, 1])
    orbit = orbit_mod_prime_power(f, q, p, 12, 48)
    value = Fraction(q)
    for n in range(1, 13):
        value = f.evaluate(value)
        diff = value - q
        assert orbit.residues[n].residue == int(value) % p**48
        if diff != 0:
            v = valuation(diff, p)
            if v < 48:
                assert orbit.difference_valuations[n] == v
            else:
                assert orbit.difference_valuations[n] is None
        else:
            assert orbit.difference_valuations[n] is None


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.integers(-10**6, 10**6), min_size=1, max_size=80),
    st.lists(st.integers(-10**6, 10**6), min_size=1, max_size=80),
)
def test_convolution_matches_schoolbook(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    assert convolve_int(a, b) == out
