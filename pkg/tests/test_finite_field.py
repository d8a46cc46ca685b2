import random

import pytest
from hypothesis import given, settings, strategies as st

from signcompute.finite_field import (
    ExtFieldSpec,
    FieldError,
    PrimeFieldSpec,
    discrete_log,
    ext_add,
    ext_mul,
    ext_pow,
    find_primitive_extension,
    is_irreducible,
    poly_divmod,
    poly_eval,
    poly_mul,
    roots_in_base_field,
)


def brute_order(fld, e):
    """Multiplicative order by repeated multiplication."""
    one, x, n = fld.one(), e, 1
    while x != one:
        x = ext_mul(fld, x, e)
        n += 1
    return n


def smallest_primitive_root(m):
    for g in range(1, m):
        if len({pow(g, k, m) for k in range(m - 1)}) == m - 1:
            return g


def test_prime_field_rejects_composite():
    with pytest.raises(FieldError):
        PrimeFieldSpec(6)
    with pytest.raises(FieldError):
        find_primitive_extension(9, 2)
    with pytest.raises(FieldError):
        find_primitive_extension(5, 0)


@pytest.mark.parametrize("M", [3, 5, 7, 11, 13, 31])
def test_degree_one_uses_smallest_primitive_root(M):
    fld = find_primitive_extension(M, 1)
    g = smallest_primitive_root(M)
    assert fld.min_poly == ((-g) % M, 1)


def test_known_small_fields():
    assert find_primitive_extension(5, 1).min_poly == (3, 1)  # x - 2
    assert find_primitive_extension(2, 1).min_poly == (1, 1)  # x - 1


@pytest.mark.parametrize("M,K", [(2, 1), (2, 4), (3, 3), (5, 2), (7, 2), (7, 3), (11, 2), (13, 2), (31, 2), (5, 4)])
def test_generator_has_full_order(M, K):
    fld = find_primitive_extension(M, K)
    assert brute_order(fld, fld.generator()) == M**K - 1


def test_order_of_a_in_F25_divisor_check():
    fld = find_primitive_extension(5, 2)
    a = fld.generator()
    for d in (1, 2, 3, 4, 6, 8, 12):
        assert ext_pow(fld, a, d) != fld.one()
    assert ext_pow(fld, a, 24) == fld.one()


def test_larger_field_by_divisor_checks():
    fld = find_primitive_extension(31, 4)
    a = fld.generator()
    n = fld.order
    assert ext_pow(fld, a, n) == fld.one()
    assert n == 2**7 * 3 * 5 * 13 * 37
    for r in (2, 3, 5, 13, 37):
        assert ext_pow(fld, a, n // r) != fld.one()


def test_spec_rejects_non_primitive_poly():
    base = PrimeFieldSpec(5)
    with pytest.raises(FieldError):
        ExtFieldSpec(base, 2, (1, 0, 1))  # x^2 + 1 = (x-2)(x-3)
    with pytest.raises(FieldError):
        ExtFieldSpec(base, 2, (4, 0, 1, 0))


def test_record_round_trip():
    fld = find_primitive_extension(7, 3)
    assert ExtFieldSpec.from_record(fld.to_record()) == fld
    assert fld.to_record() == {"M": 7, "K": 3, "min_poly": list(fld.min_poly)}


def test_irreducibility_matches_trial_division():
    m = 3
    for c0 in range(m):
        for c1 in range(m):
            for c2 in range(m):
                f = (c0, c1, c2, 1)
                has_root = any(poly_eval(f, r, m) == 0 for r in range(m))
                assert is_irreducible(f, m) == (not has_root)  # cubic: reducible iff it has a root


def test_arithmetic_identities():
    fld = find_primitive_extension(5, 2)
    a = fld.generator()
    assert ext_pow(fld, a, 0) == fld.one()
    rng = random.Random(1)
    for _ in range(50):
        e = fld.element((rng.randrange(5), rng.randrange(5)))
        assert ext_mul(fld, e, fld.one()) == e
        assert ext_add(fld, e, fld.zero()) == e
    assert ext_pow(fld, a, fld.order) == fld.one()


def test_mismatched_operands_rejected():
    f1 = find_primitive_extension(5, 2)
    f2 = find_primitive_extension(5, 3)
    with pytest.raises(FieldError):
        ext_mul(f1, f1.generator(), f2.generator())


def test_discrete_log_base_cases():
    fld = find_primitive_extension(5, 2)
    assert discrete_log(fld, fld.generator()) == 1
    assert discrete_log(fld, fld.one()) == 0
    with pytest.raises(FieldError):
        discrete_log(fld, fld.zero())
    target = fld.element((3, 1))  # a + 3
    s = discrete_log(fld, target)
    assert 0 <= s < 24 and ext_pow(fld, fld.generator(), s) == target


@pytest.mark.parametrize("M,K", [(5, 2), (7, 3), (31, 3)])
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_discrete_log_round_trip(M, K, data):
    fld = find_primitive_extension(M, K)
    s = data.draw(st.integers(0, fld.order - 1))
    assert discrete_log(fld, ext_pow(fld, fld.generator(), s)) == s


def test_discrete_log_exhaustive_small():
    fld = find_primitive_extension(7, 2)
    seen = {}
    e = fld.one()
    for s in range(fld.order):
        seen[e] = s
        e = ext_mul(fld, e, fld.generator())
    for elem, s in seen.items():
        assert discrete_log(fld, elem) == s


def test_roots_examples():
    assert roots_in_base_field(5, (2, 1)) == [3]  # x - 3 = x + 2
    f = poly_mul((6, 1), (5, 1), 7)  # (x-1)(x-2)
    assert sorted(roots_in_base_field(7, f)) == [1, 2]
    assert roots_in_base_field(7, (1, 0, 1)) == []
    assert sorted(roots_in_base_field(7, poly_mul((6, 1), (6, 1), 7))) == [1, 1]
    with pytest.raises(FieldError):
        roots_in_base_field(7, (3,))


@settings(max_examples=100, deadline=None)
@given(
    m=st.sampled_from([2, 3, 5, 7, 11]),
    coeffs=st.lists(st.integers(0, 10), min_size=1, max_size=5),
)
def test_roots_match_exhaustive_evaluation(m, coeffs):
    f = tuple(c % m for c in coeffs) + (1,)
    roots = roots_in_base_field(m, f)
    assert set(roots) == {r for r in range(m) if poly_eval(f, r, m) == 0}
    assert len(roots) <= len(f) - 1
    # multiplicity: (x - r)^k divides f exactly k times
    for r in set(roots):
        g, k = f, 0
        while True:
            quo, rem = poly_divmod(g, (-r % m, 1), m)
            if rem:
                break
            g, k = quo, k + 1
        assert roots.count(r) == k
