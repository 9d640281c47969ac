from math import gcd

import pytest
from hypothesis import given, strategies as st

from galois_index import classpoly as cp
from galois_index import modcurve_count as mc

import oracles


def brute_class_number(D):
    """Primitive forms of discriminant D counted up to SL2(Z) equivalence by
    enumerating reduced representatives with a plain triple loop."""
    h = 0
    lim = int((-D / 3) ** 0.5) + 1
    for a in range(1, lim + 1):
        for b in range(-a, a + 1):
            for c in range(a, -D + 2):
                if b * b - 4 * a * c != D or gcd(gcd(a, abs(b)), c) != 1:
                    continue
                if -a < b <= a and (a < c or (a == c and b >= 0)):
                    h += 1
    return h


@pytest.mark.parametrize("D,poly", [
    (-3, (1, 0)),
    (-4, (1, -1728)),
    (-7, (1, 3375)),
    (-16, (1, -287496)),
])
def test_small_class_polynomials(D, poly):
    assert cp.hilbert_poly(D) == poly


def test_not_a_discriminant():
    assert cp.hilbert_poly(-5) == (1,)
    assert cp.hilbert_poly(-6) == (1,)
    with pytest.raises(cp.DiscriminantError):
        cp.reduced_forms(-5)


@given(st.integers(3, 600))
def test_class_number_against_brute_force(m):
    D = -m
    if not cp.is_discriminant(D):
        return
    assert cp.class_number(D) == brute_class_number(D)


def all_discriminants(bound):
    return [D for D in range(-3, -bound - 1, -1) if cp.is_discriminant(D)]


def test_stable_under_doubled_precision():
    for D in all_discriminants(400):
        coeffs = cp.hilbert_poly(D)
        forms = cp.reduced_forms(D)
        assert len(coeffs) == len(forms) + 1 and coeffs[0] == 1
        doubled = cp.hilbert_poly(D, bits=2 * cp._start_bits(D, forms))
        assert doubled == coeffs, D


def cm_prime(D):
    """Smallest p > 3 with t^2 - 4p = D v^2 for some t, v > 0."""
    for p in range(5, 10 ** 5):
        if not oracles.is_prime(p):
            continue
        for v in (1, 2, 3):
            for t in range(1, 2 * int(p ** 0.5) + 1):
                if t * t - 4 * p == D * v * v:
                    return p, t, v


@pytest.mark.parametrize("D", [-7, -8, -11, -15, -19, -20, -23, -24, -35, -39, -56, -71, -84, -95])
def test_roots_mod_p_are_cm_j_invariants(D):
    # curves over F_p of trace +-t have endomorphism ring an order containing
    # Z[pi], of discriminant D f^2 with f | v; their j are the roots of those P
    p, t, v = cm_prime(D)
    roots = set()
    for f in range(1, v + 1):
        if v % f == 0:
            coeffs = cp.hilbert_poly(D * f * f)
            roots |= {j for j in range(p) if cp.eval_mod(coeffs, j, p) == 0}
    ref = set()
    for j in range(p):
        if j in (0, 1728 % p):
            continue
        A, B = mc.generic_curve(j, p)
        n = oracles.points_naive((0, 0, 0, A, B), p)
        if abs(p + 1 - n) == t:
            ref.add(j)
    assert ref
    assert roots - {0, 1728 % p} == ref


def test_disk_cache_roundtrip(tmp_path):
    try:
        cache = cp.use_cache(tmp_path)
        first = cp.hilbert_poly(-23)
        cache.flush()
        assert (tmp_path / "classpoly.json").exists()
        cp.use_cache(tmp_path)
        assert cp._DISK.get(-23) == first
        assert cp.hilbert_poly(-23) == first
    finally:
        cp.use_cache(None)
