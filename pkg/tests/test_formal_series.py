import random
from collections import defaultdict
from fractions import Fraction

import pytest
from sympy import divisors

from src.core.errors import BadConstantTerm
from src.core.formal_series import (
    UNIT, ClassExponent, FormalSeries, WallAutomorphism, WallFunction, apply_automorphism, extract_omega_tilde,
    is_integral, mobius_invert,
)
from src.core.lattice import IntVec2

X = IntVec2(1, 0)
Y = IntVec2(0, 1)


def term(a, b, grade):
    return ClassExponent(IntVec2(a, b), grade)


def test_log_of_binomial_alternates():
    f = WallFunction.binomial(X, 1, 4)
    log_f = f.series.log()
    assert log_f.coefficient(term(1, 0, 1)) == 1
    assert log_f.coefficient(term(2, 0, 2)) == Fraction(-1, 2)
    assert log_f.coefficient(term(3, 0, 3)) == Fraction(1, 3)
    assert log_f.coefficient(term(4, 0, 4)) == Fraction(-1, 4)


def test_exp_inverts_log_and_inverse_inverts_product():
    f = FormalSeries({UNIT: 1, term(1, 0, 1): 2, term(0, 1, 1): -1, term(1, 1, 2): Fraction(1, 3)}, 4)
    assert f.log().exp() == f
    assert f * f.inverse() == FormalSeries.one(4)


def test_truncation_drops_high_grades():
    f = FormalSeries({UNIT: 1, term(1, 0, 1): 1, term(2, 0, 3): 5}, 2)
    assert f.coefficient(term(2, 0, 3)) == 0
    assert (f * f).coefficient(term(2, 0, 2)) == 1


def test_wall_function_needs_unit_constant():
    with pytest.raises(BadConstantTerm):
        WallFunction(FormalSeries({UNIT: 2, term(1, 0, 1): 1}, 2), X)


def test_automorphism_of_crossing_wall():
    # y -> y * (1 + t x)^-1
    K = WallAutomorphism(WallFunction.binomial(X, 1, 2), X, 1)
    out = apply_automorphism(K, FormalSeries({term(0, 1, 0): 1}, 2))
    assert out.coefficient(term(0, 1, 0)) == 1
    assert out.coefficient(term(1, 1, 1)) == -1
    assert out.coefficient(term(2, 1, 2)) == 1
    # monomials parallel to the wall are fixed
    assert apply_automorphism(K, FormalSeries({term(1, 0, 0): 1}, 2)) == FormalSeries({term(1, 0, 0): 1}, 2)


def test_automorphism_and_inverse_cancel():
    K = WallAutomorphism(WallFunction.binomial(IntVec2(1, 1), 1, 3), IntVec2(1, 1), 1)
    g = FormalSeries({term(1, 0, 0): 1, term(0, 1, 0): 3}, 3)
    assert apply_automorphism(K.inverse(), apply_automorphism(K, g)) == g


def test_initial_disc_multiple_covers():
    omega = extract_omega_tilde(WallFunction.binomial(X, 1, 3), X)
    assert omega == {1: Fraction(1), 2: Fraction(-1, 4), 3: Fraction(1, 9)}
    bps = mobius_invert(omega, -1)
    assert bps == {1: Fraction(1), 2: Fraction(0), 3: Fraction(0)}
    assert is_integral(bps)


def test_mobius_invert_of_degree_two_three_torsion_ray():
    bps = mobius_invert({1: Fraction(3), 2: Fraction(21, 4)}, -1)
    assert bps[1] == 3
    assert bps[2] == -6


# ===== Properties against a naive oracle =====

def random_series(rng, trunc, min_grade=0, size=4):
    terms = {}
    for _ in range(size):
        e = term(rng.randint(-2, 2), rng.randint(-2, 2), rng.randint(min_grade, trunc))
        terms[e] = Fraction(rng.randint(-5, 5), rng.randint(1, 3))
    return FormalSeries(terms, trunc)


def naive_product(f, g, trunc):
    acc = defaultdict(Fraction)
    for e1, c1 in f:
        for e2, c2 in g:
            if e1.grade + e2.grade <= trunc:
                acc[e1 + e2] += c1 * c2
    return {e: c for e, c in acc.items() if c}


def naive_sum(f, g):
    acc = defaultdict(Fraction)
    for e, c in list(f) + list(g):
        acc[e] += c
    return {e: c for e, c in acc.items() if c}


def test_ring_operations_match_oracle():
    rng = random.Random(2016)
    for _ in range(40):
        trunc = rng.randint(1, 5)
        f, g, h = (random_series(rng, trunc) for _ in range(3))
        assert dict(f * g) == naive_product(f, g, trunc)
        assert dict(f + g) == naive_sum(f, g)
        assert f * g == g * f
        assert (f * g) * h == f * (g * h)
        assert f * (g + h) == f * g + f * h
        assert f - f == FormalSeries.zero(trunc)
        assert f * FormalSeries.one(trunc) == f


@pytest.mark.parametrize("trunc", range(1, 9))
def test_exp_and_log_round_trip(trunc):
    rng = random.Random(trunc)
    for _ in range(5):
        h = random_series(rng, trunc, min_grade=1, size=3)
        assert h.exp().log() == h
        f = FormalSeries.one(trunc) + h
        assert f.log().exp() == f


@pytest.mark.parametrize("direction, gamma_dir", [((1, 0), (1, 0)), ((1, 1), (1, 1)), ((1, -2), (1, -2))])
def test_automorphism_is_multiplicative(direction, gamma_dir):
    rng = random.Random(1011)
    d = IntVec2(*direction)
    wall = WallFunction.from_log_terms(d, [(1, 1, 2), (2, 2, Fraction(-1, 3)), (1, 3, 1)], 4)
    for sign in (1, -1):
        K = WallAutomorphism(wall, IntVec2(*gamma_dir), sign)
        for _ in range(10):
            f, g = random_series(rng, 4), random_series(rng, 4)
            assert apply_automorphism(K, f * g) == apply_automorphism(K, f) * apply_automorphism(K, g)
            assert apply_automorphism(K, f + g) == apply_automorphism(K, f) + apply_automorphism(K, g)


def test_parallel_walls_commute():
    rng = random.Random(7)
    K1 = WallAutomorphism(WallFunction.binomial(X, 1, 4), X, 1)
    K2 = WallAutomorphism(WallFunction.from_log_terms(X, [(2, 2, 3), (1, 3, Fraction(1, 2))], 4), X, -1)
    for _ in range(10):
        g = random_series(rng, 4)
        assert apply_automorphism(K1, apply_automorphism(K2, g)) == apply_automorphism(K2, apply_automorphism(K1, g))


def test_initial_disc_multiple_covers_to_degree_ten():
    omega = extract_omega_tilde(WallFunction.binomial(X, 1, 10), X)
    assert omega == {d: Fraction((-1) ** (d - 1), d * d) for d in range(1, 11)}
    assert mobius_invert(omega, -1) == {d: Fraction(int(d == 1)) for d in range(1, 11)}


@pytest.mark.parametrize("c", [-1, 1])
def test_mobius_invert_recovers_integer_counts(c):
    rng = random.Random(13)
    counts = {d: Fraction(rng.randint(-9, 9)) for d in range(1, 11)}
    # omega(d) = -c^(-d) * sum_{k | d} Omega(d / k) / k^2
    omega = {d: -Fraction(c) ** -d * sum(counts[d // int(k)] / (int(k) * int(k)) for k in divisors(d))
             for d in range(1, 11)}
    assert mobius_invert(omega, c) == counts
