import random

import pytest
from hypothesis import given, strategies as st

from rmtf.field import (FieldCtx, _BIG_DEFAULT_MODULI, default_modulus,
                        is_irreducible, make_field)


# --- reference multiplication, straight from polynomial arithmetic ---------

def _poly_mul_mod(a, b, mod_digits, q):
    """ Schoolbook product of digit lists, reduced mod the monic modulus. """
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % q
    deg = len(mod_digits) - 1
    while len(prod) > deg:
        top = prod.pop()
        if top:
            for j in range(deg):
                prod[-deg + j] = (prod[-deg + j] - top * mod_digits[j]) % q
    return prod


def _digits(ctx, v):
    return [(v // ctx.q ** i) % ctx.q for i in range(ctx.m)]


def _undigits(ctx, ds):
    return sum(d * ctx.q ** i for i, d in enumerate(ds))


@pytest.mark.parametrize("q,m", [(2, 8), (2, 1), (2, 63), (3, 5), (5, 3)])
def test_mul_matches_schoolbook_reference(q, m):
    ctx = make_field(q, m)
    mod_digits = [(ctx.modulus // q ** i) % q for i in range(m + 1)]
    rng = random.Random(17)
    for _ in range(200):
        a, b = ctx.rand(rng), ctx.rand(rng)
        want = _undigits(ctx, _poly_mul_mod(_digits(ctx, a), _digits(ctx, b),
                                            mod_digits, q))
        assert ctx.mul(a, b) == want


def test_fast_path_used_exactly_for_packed_gf2():
    assert make_field(2, 40).fast
    assert make_field(2, 63).fast
    assert not make_field(2, 64).fast
    assert not make_field(3, 5).fast


@pytest.mark.parametrize("q,m", [(2, 8), (2, 64), (3, 4)])
def test_field_axioms(q, m):
    ctx = make_field(q, m)
    rng = random.Random(5)
    for _ in range(100):
        a, b, c = (ctx.rand(rng) for _ in range(3))
        assert ctx.add(a, b) == ctx.add(b, a)
        assert ctx.mul(a, b) == ctx.mul(b, a)
        assert ctx.add(ctx.add(a, b), c) == ctx.add(a, ctx.add(b, c))
        assert ctx.mul(ctx.mul(a, b), c) == ctx.mul(a, ctx.mul(b, c))
        assert ctx.mul(a, ctx.add(b, c)) == ctx.add(ctx.mul(a, b),
                                                    ctx.mul(a, c))
        assert ctx.add(a, ctx.neg(a)) == 0
        assert ctx.sub(a, b) == ctx.add(a, ctx.neg(b))
        assert ctx.mul(a, 1) == a and ctx.add(a, 0) == a
        if a:
            assert ctx.mul(a, ctx.inv(a)) == 1
        d = rng.randrange(q)
        want = 0
        for _ in range(d):
            want = ctx.add(want, a)
        assert ctx.scale(a, d) == want


@pytest.mark.parametrize("q,m", [(2, 13), (2, 64), (3, 3)])
def test_inverse_and_pow(q, m):
    ctx = make_field(q, m)
    rng = random.Random(7)
    order = ctx.order - 1
    for _ in range(25):
        a = ctx.rand(rng)
        if not a:
            continue
        assert ctx.pow(a, order) == 1  # multiplicative group order
        assert ctx.pow(a, -1) == ctx.inv(a)
        assert ctx.pow(a, 5) == ctx.mul(ctx.pow(a, 2), ctx.pow(a, 3))
    with pytest.raises(ZeroDivisionError):
        ctx.inv(0)
    assert ctx.pow(ctx.alpha, 0) == 1


_CTX2_20 = make_field(2, 20)
_CTX3_4 = make_field(3, 4)


@given(st.integers(min_value=0, max_value=2 ** 20 - 1))
def test_coords_roundtrip_gf2(v):
    ctx = _CTX2_20
    cs = ctx.coords(v)
    assert len(cs) == 20 and all(c in (0, 1) for c in cs)
    assert ctx.from_coords(cs) == v
    assert ctx.from_bytes(ctx.to_bytes(v)) == v


@given(st.integers(min_value=0, max_value=3 ** 4 - 1))
def test_coords_roundtrip_gf3(v):
    ctx = _CTX3_4
    assert ctx.from_coords(ctx.coords(v)) == v
    assert ctx.from_bytes(ctx.to_bytes(v)) == v


def test_element_bytes_and_range_checks():
    ctx = make_field(2, 13)
    assert ctx.element_bytes == 2
    assert len(ctx.to_bytes(1)) == 2
    with pytest.raises(ValueError):
        ctx.check(ctx.order)
    with pytest.raises(ValueError):
        ctx.check(-1)
    with pytest.raises(ValueError):
        ctx.from_bytes(b"\xff\xff")  # 0xffff >= 2**13


def test_m_equals_one_field():
    ctx = make_field(5, 1)
    assert ctx.order == 5
    assert ctx.mul(3, 4) == 2 and ctx.inv(2) == 3
    ctx2 = make_field(2, 1)
    assert ctx2.mul(1, 1) == 1 and ctx2.inv(1) == 1


def test_known_small_default_moduli():
    # constant-term-first ordering puts nonzero middle terms at high degree:
    # x^2+x+1, x^3+x^2+1, x^4+x^3+1 over F_2; x^2+1 over F_3
    assert default_modulus(2, 2) == 0b111
    assert default_modulus(2, 3) == 0b1101
    assert default_modulus(2, 4) == 0b11001
    assert default_modulus(3, 2) == 1 * 9 + 0 * 3 + 1
    assert default_modulus(2, 1) == 2
    assert default_modulus(7, 1) == 7


def test_is_irreducible_examples():
    assert is_irreducible(2, 0b111, 2)          # x^2+x+1
    assert not is_irreducible(2, 0b101, 2)      # x^2+1 = (x+1)^2
    assert not is_irreducible(2, 0b110, 2)      # x^2+x = x(x+1)
    assert is_irreducible(3, 9 + 1, 2)          # x^2+1 over F_3
    assert not is_irreducible(3, 9 + 2 * 3 + 1, 2)  # (x+1)^2


def test_default_moduli_lex_minimal_small():
    # independent check of lex-minimality (constant-term-first order) by
    # scanning every monic polynomial of the degree
    for q, m in [(2, 2), (2, 3), (2, 4), (2, 8), (3, 2), (3, 3), (5, 2)]:
        best = None
        for packed in range(q ** m, 2 * q ** m):
            digits = tuple((packed // q ** i) % q for i in range(m))
            if is_irreducible(q, packed, m):
                if best is None or digits < best[0]:
                    best = (digits, packed)
        assert default_modulus(q, m) == best[1], (q, m)


def test_embedded_big_moduli_are_irreducible():
    # every precomputed default modulus re-verified from scratch
    assert set(_BIG_DEFAULT_MODULI) == {
        (2, 179), (2, 293), (2, 409), (2, 443),
        (2, 499), (2, 907), (2, 1657), (2, 2707)}
    for (q, m), poly in _BIG_DEFAULT_MODULI.items():
        assert poly.bit_length() == m + 1, "monic of the right degree"
        assert is_irreducible(q, poly, m), (q, m)


def test_big_modulus_search_matches_embedded_value():
    # drop the cache entry and redo the actual search for the smallest case
    saved = _BIG_DEFAULT_MODULI.pop((2, 179))
    try:
        assert default_modulus(2, 179) == saved
    finally:
        _BIG_DEFAULT_MODULI[(2, 179)] = saved


def test_make_field_validation():
    with pytest.raises(ValueError):
        make_field(4, 2)  # q must be prime
    with pytest.raises(ValueError):
        make_field(2, 0)
    with pytest.raises(ValueError):
        make_field(2, 3, modulus=0b1010)  # x^3 + x is reducible
    # explicit modulus as digit sequence, low-degree first
    ctx = make_field(2, 3, modulus=[1, 1, 0, 1])
    assert ctx.modulus == 0b1011
    # non-field-default but valid modulus gives a consistent field
    ctx2 = make_field(2, 3, modulus=0b1101)  # x^3+x^2+1
    a = 0b010
    assert ctx2.mul(a, ctx2.inv(a)) == 1


def test_field_equality_and_repr():
    assert make_field(2, 8) == make_field(2, 8)
    assert make_field(2, 8) != make_field(2, 9)
    r = repr(make_field(2, 8))
    assert "q=2" in r and "m=8" in r
