"""Arithmetic in prime fields F_q and their extensions F_{q^m}.

An element of F_{q^m} is a plain Python int: the element whose coordinates
over the polynomial basis 1, alpha, ..., alpha^(m-1) are the digits
(c_0, ..., c_(m-1)) is stored as sum(c_i * q**i).  For q = 2 this is ordinary
bit packing.  Polynomials over F_q (including the defining modulus) use the
same packing, with the degree-m leading term included.

All element operations are methods on a FieldCtx, which fixes (q, m, modulus).
Operations are pure and a context is immutable after construction, so contexts
and elements are safe to share across threads.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence, Tuple, Union

# bit-spread table: byte b -> 16-bit word with bit i of b moved to bit 2i.
# Squaring a GF(2)[x] polynomial is exactly this spreading.
_SPREAD = tuple(
    sum(((b >> i) & 1) << (2 * i) for i in range(8)) for b in range(256)
)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _prime_factors(n: int) -> Tuple[int, ...]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return tuple(out)


# ---------------------------------------------------------------------------
# packed polynomials over F_2 (ints, bit i = coefficient of x^i)

def _sq2(a: int) -> int:
    """ Square of a GF(2)[x] polynomial (spread every bit to an even slot). """
    r = 0
    sh = 0
    while a:
        r |= _SPREAD[a & 0xFF] << sh
        a >>= 8
        sh += 16
    return r


def _mod2(a: int, f: int) -> int:
    df = f.bit_length() - 1
    da = a.bit_length() - 1
    while da >= df:
        a ^= f << (da - df)
        da = a.bit_length() - 1
    return a


def _clmul2(a: int, b: int) -> int:
    """ Carryless product, no reduction. """
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def _divmod2(a: int, b: int) -> Tuple[int, int]:
    q = 0
    db = b.bit_length() - 1
    da = a.bit_length() - 1
    while a and da >= db:
        sh = da - db
        q |= 1 << sh
        a ^= b << sh
        da = a.bit_length() - 1
    return q, a


def _gcd2(a: int, b: int) -> int:
    while b:
        a, b = b, _mod2(a, b)
    return a


def _irreducible2(f: int, m: int) -> bool:
    """Rabin test for a degree-m binary polynomial (packed).

    Walks s = x^(2^d) mod f for d = 1..m; f is irreducible iff the walk
    returns to x at d = m and gcd(x^(2^(m/p)) - x, f) = 1 for every prime
    p | m.  Extra gcd checks at small d reject polynomials with small factors
    early, which is what makes the lexicographic search affordable.
    """
    if m == 1:
        return True
    if not (f & 1):
        return False  # divisible by x
    if bin(f).count("1") % 2 == 0:
        return False  # divisible by x + 1
    x = 2
    s = x
    need = {m // p for p in _prime_factors(m)}
    early = min(m - 1, 12)
    for d in range(1, m + 1):
        s = _mod2(_sq2(s), f)
        if d == m:
            return s == x
        if d <= early or d in need:
            if _gcd2(s ^ x, f) != 1:
                return False
    return False  # not reached


# ---------------------------------------------------------------------------
# dense polynomials over F_q, q an odd prime (lists of digits, index = degree)

def _pstrip(c: list) -> list:
    while c and c[-1] == 0:
        c.pop()
    return c


def _pdeg(c: Sequence[int]) -> int:
    return len(c) - 1


def _psub(a: Sequence[int], b: Sequence[int], q: int) -> list:
    n = max(len(a), len(b))
    out = [0] * n
    for i in range(n):
        x = a[i] if i < len(a) else 0
        y = b[i] if i < len(b) else 0
        out[i] = (x - y) % q
    return _pstrip(out)


def _pmul(a: Sequence[int], b: Sequence[int], q: int) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % q
    return _pstrip(out)


def _pdivmod(a: Sequence[int], b: Sequence[int], q: int) -> Tuple[list, list]:
    a = _pstrip(list(a))
    db = _pdeg(b)
    binv = pow(b[-1], q - 2, q)
    quo = [0] * max(len(a) - db, 1)
    while a and _pdeg(a) >= db:
        sh = _pdeg(a) - db
        c = (a[-1] * binv) % q
        quo[sh] = c
        for j in range(db + 1):
            a[sh + j] = (a[sh + j] - c * b[j]) % q
        _pstrip(a)
    return _pstrip(quo), a


def _pgcd(a: Sequence[int], b: Sequence[int], q: int) -> list:
    a, b = _pstrip(list(a)), _pstrip(list(b))
    while b:
        _, r = _pdivmod(a, b, q)
        a, b = b, r
    return a


def _pmulmod(a: Sequence[int], b: Sequence[int], f: Sequence[int], q: int) -> list:
    _, r = _pdivmod(_pmul(a, b, q), f, q)
    return r


def _ppowmod(a: Sequence[int], e: int, f: Sequence[int], q: int) -> list:
    r = [1]
    base = list(a)
    while e:
        if e & 1:
            r = _pmulmod(r, base, f, q)
        base = _pmulmod(base, base, f, q)
        e >>= 1
    return r


def _irreducible_generic(md: Sequence[int], q: int) -> bool:
    """ Rabin test for a monic degree-m polynomial over F_q (digit list). """
    m = _pdeg(md)
    if m == 1:
        return True
    if md[0] == 0:
        return False  # divisible by x
    x = [0, 1]
    s = list(x)
    need = {m // p for p in _prime_factors(m)}
    early = min(m - 1, 6)
    for d in range(1, m + 1):
        s = _ppowmod(s, q, md, q)  # Frobenius step: s <- s^q mod f
        if d == m:
            return _pstrip(list(s)) == x
        if d <= early or d in need:
            if _pdeg(_pgcd(_psub(s, x, q), md, q)) != 0:
                return False
    return False  # not reached


# ---------------------------------------------------------------------------
# digit packing helpers

def _unpack_digits(v: int, q: int, n: int) -> list:
    out = [0] * n
    for i in range(n):
        v, out[i] = divmod(v, q)[0], v % q
    return out


def _pack_digits(digits: Sequence[int], q: int) -> int:
    acc = 0
    for d in reversed(digits):
        acc = acc * q + d
    return acc


def is_irreducible(q: int, poly: int, degree: int) -> bool:
    """Whether a packed degree-`degree` polynomial over F_q is irreducible.

    The leading coefficient need not be 1; irreducibility is invariant under
    scaling by a nonzero constant.
    """
    if degree < 1:
        raise ValueError("degree must be >= 1")
    digits = _unpack_digits(poly, q, degree + 1)
    if digits[-1] == 0:
        raise ValueError("polynomial does not have the stated degree")
    if q == 2:
        return _irreducible2(poly, degree)
    if digits[-1] != 1:
        lead_inv = pow(digits[-1], q - 2, q)
        digits = [(d * lead_inv) % q for d in digits]
    return _irreducible_generic(digits, q)


# Lex-smallest irreducibles for the large degrees used by the bundled
# reference parameter sets, precomputed with default_modulus' own search
# and re-verified in the test suite (including a from-scratch re-search
# at degree 179).  Every entry is sparse with its middle terms at top
# degrees, which is what the constant-term-first ordering favours.
_BIG_DEFAULT_MODULI: dict = {
    # x^179 + x^178 + x^177 + x^175 + 1
    (2, 179): 0xe80000000000000000000000000000000000000000001,
    # x^293 + x^292 + x^290 + x^289 + x^287 + x^284 + 1
    (2, 293): 0x36900000000000000000000000000000000000000000000000000000000000000000000001,
    # x^409 + x^406 + x^404 + x^402 + 1
    (2, 409): 0x2540000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000001,
    # x^443 + x^442 + x^441 + x^440 + x^436 + x^435 + 1
    (2, 443): 0xf18000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000001,
    # x^499 + x^497 + x^496 + x^493 + x^492 + x^490 + 1
    (2, 499): 0xb3400000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000001,
    # x^907 + x^906 + x^904 + x^903 + x^902 + x^901 + x^900 + x^898 + 1
    (2, 907): 0xdf400000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000001,
    # x^1657 + x^1652 + x^1651 + x^1649 + 1
    (2, 1657): 0x21a0000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000001,
    # x^2707 + x^2703 + x^2701 + x^2698 + 1
    (2, 2707): 0x8a400000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000000001,
}


def _middle_terms(ctr: int, q: int, m: int) -> int:
    # counter digits map to coefficients c_(m-1) (fastest) down to c_1
    v = 0
    pos = m - 1
    while ctr:
        ctr, d = divmod(ctr, q)
        if d:
            v += d * q ** pos
        pos -= 1
    return v


def default_modulus(q: int, m: int) -> int:
    """Lexicographically smallest monic irreducible of degree m over F_q.

    Coefficient tuples (c_0, ..., c_(m-1)) are compared from the constant
    term upward, so candidates are scanned with c_0 outermost and c_(m-1)
    varying fastest; the winner therefore tends to carry its nonzero middle
    terms at high degrees.  Deterministic, so two runs (or two processes)
    always agree on the default field.
    """
    if not _is_prime(q):
        raise ValueError("q must be prime")
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return q  # the polynomial x
    hit = _BIG_DEFAULT_MODULI.get((q, m))
    if hit is not None:
        return hit
    lead = q ** m
    for c0 in range(1, q):  # c_0 = 0 would make x a factor
        for ctr in range(q ** (m - 1)):
            f = lead + _middle_terms(ctr, q, m) + c0
            if is_irreducible(q, f, m):
                return f
    raise AssertionError("unreachable: irreducible polynomials of every degree exist")


class FieldCtx:
    """The extension F_{q^m} over F_q with a fixed irreducible modulus.

    Elements are ints in [0, q**m); see the module docstring for the packing.
    """

    __slots__ = ("q", "m", "order", "modulus", "element_bytes", "fast",
                 "_mod_digits")

    def __init__(self, q: int, m: int, modulus: int, _verified: bool = False):
        if not _is_prime(q):
            raise ValueError(
                "q must be prime (prime powers with exponent > 1 are not "
                "supported: coordinate digits are added mod q)")
        if m < 1:
            raise ValueError("m must be >= 1")
        digits = _unpack_digits(modulus, q, m + 1)
        if digits[-1] == 0 or modulus >= q ** (m + 1):
            raise ValueError("modulus must have degree exactly m")
        if digits[-1] != 1:
            # scale to monic; the quotient ring is unchanged
            lead_inv = pow(digits[-1], q - 2, q)
            digits = [(d * lead_inv) % q for d in digits]
            modulus = _pack_digits(digits, q)
        if not _verified and not is_irreducible(q, modulus, m):
            raise ValueError("modulus is reducible over F_q")
        self.q = q
        self.m = m
        self.order = q ** m
        self.modulus = modulus
        self._mod_digits = tuple(digits)
        self.element_bytes = ((self.order - 1).bit_length() + 7) // 8
        # packed-word kernels apply when elements and modulus fit in uint64
        self.fast = q == 2 and m <= 63

    # -- element checks and constants -------------------------------------

    def check(self, a: int) -> int:
        if not isinstance(a, int) or not 0 <= a < self.order:
            raise ValueError(f"not an element of this field: {a!r}")
        return a

    @property
    def alpha(self) -> int:
        """ The residue class of x (requires m >= 2). """
        if self.m < 2:
            raise ValueError("alpha is only a proper generator for m >= 2")
        return self.q

    # -- ring operations ---------------------------------------------------

    def add(self, a: int, b: int) -> int:
        self.check(a)
        self.check(b)
        if self.q == 2:
            return a ^ b
        q = self.q
        out = 0
        mult = 1
        for _ in range(self.m):
            out += ((a + b) % q) * mult
            a //= q
            b //= q
            mult *= q
        return out

    def neg(self, a: int) -> int:
        self.check(a)
        if self.q == 2:
            return a
        q = self.q
        out = 0
        mult = 1
        for _ in range(self.m):
            out += ((q - a % q) % q) * mult
            a //= q
            mult *= q
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def scale(self, a: int, digit: int) -> int:
        """ Multiply by a base-field digit in [0, q). """
        if not 0 <= digit < self.q:
            raise ValueError("digit out of range")
        out = 0
        for _ in range(digit):
            out = self.add(out, a)
        return out

    def mul(self, a: int, b: int) -> int:
        self.check(a)
        self.check(b)
        if self.q == 2:
            f = self.modulus
            m = self.m
            r = 0
            while b:
                if b & 1:
                    r ^= a
                b >>= 1
                a <<= 1
                if (a >> m) & 1:
                    a ^= f
            return r
        return self._mul_generic(a, b)

    def _mul_generic(self, a: int, b: int) -> int:
        q, m = self.q, self.m
        da = _unpack_digits(a, q, m)
        db = _unpack_digits(b, q, m)
        prod = [0] * (2 * m - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    if y:
                        prod[i + j] = (prod[i + j] + x * y) % q
        md = self._mod_digits
        for d in range(2 * m - 2, m - 1, -1):
            c = prod[d]
            if c:
                prod[d] = 0
                for j in range(m):
                    if md[j]:
                        prod[d - m + j] = (prod[d - m + j] - c * md[j]) % q
        return _pack_digits(prod[:m], q)

    def inv(self, a: int) -> int:
        """ Multiplicative inverse by extended Euclid on polynomials. """
        self.check(a)
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        if self.q == 2:
            r0, r1 = self.modulus, a
            s0, s1 = 0, 1
            while r1:
                quo, rem = _divmod2(r0, r1)
                r0, r1 = r1, rem
                s0, s1 = s1, s0 ^ _clmul2(quo, s1)
            assert r0 == 1, "modulus not irreducible"
            return _mod2(s0, self.modulus)
        q = self.q
        r0 = list(self._mod_digits)
        r1 = _pstrip(_unpack_digits(a, q, self.m))
        s0, s1 = [], [1]
        while r1:
            quo, rem = _pdivmod(r0, r1, q)
            r0, r1 = r1, rem
            s0, s1 = s1, _psub(s0, _pmul(quo, s1, q), q)
        assert _pdeg(r0) == 0, "modulus not irreducible"
        c_inv = pow(r0[0], q - 2, q)
        s0 = [(d * c_inv) % q for d in s0]
        if _pdeg(s0) >= self.m:
            _, s0 = _pdivmod(s0, list(self._mod_digits), q)
        return _pack_digits(s0 + [0] * (self.m - len(s0)), q)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a = self.inv(a)
            e = -e
        r = 1
        base = a
        while e:
            if e & 1:
                r = self.mul(r, base)
            base = self.mul(base, base)
            e >>= 1
        return r

    # -- coordinates and serialization --------------------------------------

    def coords(self, a: int) -> Tuple[int, ...]:
        """ Coordinates over the basis 1, alpha, ..., alpha^(m-1). """
        self.check(a)
        if self.q == 2:
            return tuple((a >> i) & 1 for i in range(self.m))
        return tuple(_unpack_digits(a, self.q, self.m))

    def from_coords(self, v: Iterable[int]) -> int:
        digits = list(v)
        if len(digits) != self.m:
            raise ValueError(f"expected {self.m} digits, got {len(digits)}")
        for d in digits:
            if not 0 <= d < self.q:
                raise ValueError("digit out of range")
        return _pack_digits(digits, self.q)

    def to_bytes(self, a: int) -> bytes:
        """ ceil(m*log2(q)/8) bytes, base-q digits packed little-endian. """
        self.check(a)
        return a.to_bytes(self.element_bytes, "little")

    def from_bytes(self, data: bytes) -> int:
        if len(data) != self.element_bytes:
            raise ValueError(f"expected {self.element_bytes} bytes, got {len(data)}")
        v = int.from_bytes(data, "little")
        if v >= self.order:
            raise ValueError("encoded value out of range")
        return v

    def rand(self, rng) -> int:
        return rng.randrange(self.order)

    # -- identity ------------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (isinstance(other, FieldCtx)
                and (self.q, self.m, self.modulus) == (other.q, other.m, other.modulus))

    def __hash__(self) -> int:
        return hash((self.q, self.m, self.modulus))

    def __repr__(self) -> str:
        return f"FieldCtx(q={self.q}, m={self.m}, modulus={self.modulus:#x})"


def make_field(q: int, m: int,
               modulus: Optional[Union[int, Sequence[int]]] = None) -> FieldCtx:
    """Build the field context F_{q^m}.

    Args:
        q: prime base field size.
        m: extension degree, >= 1.
        modulus: optional degree-m polynomial over F_q, either digit-packed
            (int) or a digit sequence (c_0, ..., c_m).  When omitted, the
            deterministic default is the lexicographically smallest monic
            irreducible (coefficients compared from the constant term up).
    """
    if modulus is None:
        return FieldCtx(q, m, default_modulus(q, m), _verified=True)
    if not isinstance(modulus, int):
        modulus = _pack_digits(list(modulus), q)
    return FieldCtx(q, m, modulus)
