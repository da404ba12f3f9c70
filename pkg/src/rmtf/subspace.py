"""F_q-subspaces of F_{q^m}: supports, sampling, products, intersections,
and exact rank-sphere counting.

A Subspace is an F_q-linear subspace of the extension field, held as the
canonical reduced-row-echelon basis of its coordinate matrix.  Because an
element's packed int IS its base-q coordinate row (see rmtf.field), basis
vectors double as field elements with no conversion.

The support of a matrix over F_{q^m} is the subspace spanned by its entries;
its dimension is the rank weight used throughout the package.
"""

from __future__ import annotations

import math
import struct
from typing import Iterable, List, Optional, Sequence, Tuple

from .field import FieldCtx
from .linalg import MatFq, MatFqm, packed_row_bytes

SAMPLE_ATTEMPTS = 256    # rank-rejection budget for subspace sampling
EXACT_ATTEMPTS = 64      # resampling budget for exact-support matrices


class Subspace:
    """ An F_q-subspace of F_{q^m} with a canonical echelon basis. """

    __slots__ = ("ctx", "dim", "basis")

    def __init__(self, ctx: FieldCtx, gens: Iterable[int]):
        rows = [ctx.check(g) for g in gens]
        R, rank, _ = MatFq(ctx.q, ctx.m, rows).rref()
        self.ctx = ctx
        self.dim = rank
        self.basis: Tuple[int, ...] = tuple(R.rows[:rank])

    # -- membership and enumeration -----------------------------------------

    def contains(self, v: int) -> bool:
        self.ctx.check(v)
        return self._reduce(v) == 0

    __contains__ = contains

    def _reduce(self, v: int) -> int:
        """Remainder of v after elimination against the canonical basis.

        Pivots sit at the lowest nonzero digit of each basis row (the
        column order used by MatFq.rref), and pivot columns are unit, so a
        single pass clears every span component.
        """
        ctx = self.ctx
        if ctx.q == 2:
            for b in self.basis:
                p = (b & -b).bit_length() - 1
                if (v >> p) & 1:
                    v ^= b
            return v
        q = ctx.q
        for b in self.basis:
            d = (v // q ** _pivot_pos(b, q)) % q
            if d:
                v = ctx.sub(v, ctx.scale(b, d))
        return v

    def coefficients(self, v: int) -> Optional[Tuple[int, ...]]:
        """Coordinates of v over the canonical basis, or None if v is outside.

        Pivot columns of the canonical basis are unit, so the coordinate on
        basis row i is v's digit at that row's pivot position; the remainder
        after stripping all of them must vanish.
        """
        ctx = self.ctx
        q = ctx.q
        out = []
        rem = ctx.check(v)
        for b in self.basis:
            if q == 2:
                d = (rem >> ((b & -b).bit_length() - 1)) & 1
                if d:
                    rem ^= b
            else:
                d = (rem // q ** _pivot_pos(b, q)) % q
                if d:
                    rem = ctx.sub(rem, ctx.scale(b, d))
            out.append(d)
        return tuple(out) if rem == 0 else None

    def elements(self) -> Iterable[int]:
        """ Every element of the subspace (q**dim of them; keep dim small). """
        ctx = self.ctx
        q = ctx.q
        out = [0]
        for b in self.basis:
            mults = [ctx.scale(b, d) for d in range(q)]
            out = [ctx.add(v, mb) for mb in mults for v in out]
        return out

    def random_element(self, rng) -> int:
        ctx = self.ctx
        v = 0
        for b in self.basis:
            d = rng.randrange(ctx.q)
            if d:
                v = ctx.add(v, ctx.scale(b, d))
        return v

    # -- identity ------------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (isinstance(other, Subspace) and self.ctx == other.ctx
                and self.basis == other.basis)

    def __hash__(self) -> int:
        return hash((self.ctx, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim} of {self.ctx!r})"

    # -- serialization -------------------------------------------------------
    # layout: dim u16 LE, m u16 LE, then dim packed coordinate rows

    def to_bytes(self) -> bytes:
        rb = packed_row_bytes(self.ctx.q, self.ctx.m)
        return (struct.pack("<HH", self.dim, self.ctx.m)
                + b"".join(b.to_bytes(rb, "little") for b in self.basis))

    @classmethod
    def from_bytes(cls, ctx: FieldCtx, data: bytes) -> "Subspace":
        dim, m = struct.unpack("<HH", data[:4])
        if m != ctx.m:
            raise ValueError(f"subspace over degree {m}, field has degree {ctx.m}")
        rb = packed_row_bytes(ctx.q, ctx.m)
        if len(data) != 4 + dim * rb:
            raise ValueError("subspace payload has the wrong length")
        gens = [int.from_bytes(data[4 + i * rb:4 + (i + 1) * rb], "little")
                for i in range(dim)]
        S = cls(ctx, gens)
        if S.basis != tuple(gens):
            raise ValueError("serialized basis was not in canonical form")
        return S

    @classmethod
    def byte_size(cls, ctx: FieldCtx, dim: int) -> int:
        return 4 + dim * packed_row_bytes(ctx.q, ctx.m)


def _lead_pos(v: int, q: int) -> int:
    """ Index of the highest nonzero base-q digit of v (v != 0). """
    if q == 2:
        return v.bit_length() - 1
    p = -1
    while v:
        v //= q
        p += 1
    return p


def _pivot_pos(v: int, q: int) -> int:
    """ Index of the lowest nonzero base-q digit of v (v != 0). """
    p = 0
    while v % q == 0:
        v //= q
        p += 1
    return p


class _Span:
    """ Incrementally built span, rows kept in echelon (not reduced) form. """

    __slots__ = ("ctx", "rows")

    def __init__(self, ctx: FieldCtx):
        self.ctx = ctx
        self.rows = {}  # leading digit position -> row with that digit = 1

    def add(self, v: int) -> bool:
        """ Insert v; True when the dimension grew. """
        ctx = self.ctx
        q = ctx.q
        if q == 2:
            while v:
                p = v.bit_length() - 1
                r = self.rows.get(p)
                if r is None:
                    self.rows[p] = v
                    return True
                v ^= r
            return False
        while v:
            p = _lead_pos(v, q)
            r = self.rows.get(p)
            if r is None:
                lead = (v // q ** p) % q
                if lead != 1:
                    v = ctx.scale(v, pow(lead, q - 2, q))
                self.rows[p] = v
                return True
            d = (v // q ** p) % q
            v = ctx.sub(v, ctx.scale(r, d))
        return False

    @property
    def dim(self) -> int:
        return len(self.rows)

    def subspace(self) -> Subspace:
        return Subspace(self.ctx, self.rows.values())


def span_of(ctx: FieldCtx, elements: Iterable[int]) -> Subspace:
    """ The F_q-span of a collection of field elements. """
    return Subspace(ctx, elements)


def support_of(M: MatFqm) -> Subspace:
    """ The support of a matrix: the span of all its entries. """
    sp = _Span(M.ctx)
    for r in M.rows:
        for v in r:
            if v:
                sp.add(v)
    return sp.subspace()


def sample_subspace(ctx: FieldCtx, dim: int, rng) -> Subspace:
    """Uniform random dim-dimensional subspace of F_{q^m} over F_q.

    Draws dim uniform elements and rejects until they are independent; the
    row space of a uniform full-rank matrix is uniform on the set of
    dim-dimensional subspaces.
    """
    if not 0 <= dim <= ctx.m:
        raise ValueError("dimension out of range")
    if dim == 0:
        return Subspace(ctx, [])
    for _ in range(SAMPLE_ATTEMPTS):
        S = Subspace(ctx, [ctx.rand(rng) for _ in range(dim)])
        if S.dim == dim:
            return S
    raise RuntimeError(f"no independent sample in {SAMPLE_ATTEMPTS} attempts")


def sample_homogeneous(ctx: FieldCtx, nrows: int, ncols: int, W: Subspace,
                       rng, exact: bool = True) -> MatFqm:
    """Random matrix with every entry in W.

    With exact=True the matrix is resampled until its support is all of W,
    so its rank weight is exactly W.dim.
    """
    if exact and nrows * ncols < W.dim:
        raise ValueError("too few entries to span the target support")
    for _ in range(EXACT_ATTEMPTS):
        M = MatFqm(ctx, [[W.random_element(rng) for _ in range(ncols)]
                         for _ in range(nrows)], ncols=ncols, _checked=True)
        if not exact or support_of(M).dim == W.dim:
            return M
    raise RuntimeError(f"support not exact after {EXACT_ATTEMPTS} attempts")


def sample_semi_homogeneous(ctx: FieldCtx, ncols: int,
                            supports: Sequence[Subspace], rng,
                            exact: bool = True) -> MatFqm:
    """Random matrix whose row i has all entries in supports[i].

    With exact=True each row is resampled until it spans its own support.
    """
    rows = []
    for W in supports:
        if exact and ncols < W.dim:
            raise ValueError("too few columns to span a row support")
        for _ in range(EXACT_ATTEMPTS):
            row = [W.random_element(rng) for _ in range(ncols)]
            if not exact:
                rows.append(row)
                break
            sp = _Span(ctx)
            for v in row:
                if v:
                    sp.add(v)
            if sp.dim == W.dim:
                rows.append(row)
                break
        else:
            raise RuntimeError(
                f"row support not exact after {EXACT_ATTEMPTS} attempts")
    return MatFqm(ctx, rows, ncols=ncols, _checked=True)


def product_space(A: Subspace, B: Subspace) -> Subspace:
    """ The span of all pairwise products ab, a in A, b in B. """
    if A.ctx != B.ctx:
        raise ValueError("field mismatch")
    ctx = A.ctx
    sp = _Span(ctx)
    for a in A.basis:
        for b in B.basis:
            sp.add(ctx.mul(a, b))
    return sp.subspace()


def inverse_scale(W: Subspace, f: int) -> Subspace:
    """ The subspace f^-1 W = { f^-1 w : w in W } for nonzero f. """
    ctx = W.ctx
    finv = ctx.inv(f)
    return Subspace(ctx, [ctx.mul(finv, b) for b in W.basis])


def intersect(A: Subspace, B: Subspace) -> Subspace:
    """Intersection of two subspaces.

    Builds the block matrix with rows (a, a) for a in A's basis and (b, 0)
    for b in B's basis; after reduction, rows whose first block vanished
    carry a basis of the intersection in their second block.
    """
    if A.ctx != B.ctx:
        raise ValueError("field mismatch")
    ctx = A.ctx
    shift = ctx.q ** ctx.m
    rows = [a + a * shift for a in A.basis] + list(B.basis)
    R, rank, _ = MatFq(ctx.q, 2 * ctx.m, rows).rref()
    gens = [R.rows[i] // shift for i in range(rank) if R.rows[i] % shift == 0]
    return Subspace(ctx, gens)


# ---------------------------------------------------------------------------
# rank-sphere counting

def gaussian_binomial(q: int, m: int, w: int) -> int:
    """ Number of w-dimensional F_q-subspaces of an m-dimensional space. """
    if w < 0:
        raise ValueError("w must be >= 0")
    if w > m:
        return 0
    num = 1
    den = 1
    for i in range(w):
        num *= q ** m - q ** i
        den *= q ** w - q ** i
    assert num % den == 0
    return num // den


def sphere_size(q: int, m: int, length: int, w: int) -> int:
    """Number of vectors in F_{q^m}^length with rank weight exactly w.

    Counts pairs (support, vector spanning it): the number of w-dimensional
    supports times the number of length-long generating tuples of a fixed
    w-dimensional space.
    """
    if w < 0:
        raise ValueError("w must be >= 0")
    if w > m or w > length:
        return 0
    count = gaussian_binomial(q, m, w)
    for i in range(w):
        count *= q ** length - q ** i
    return count


def sphere_log2_bounds(q: int, m: int, length: int, w: int) -> Tuple[float, float]:
    """Two-sided log2 estimate of sphere_size, valid when w + 3 <= min(length, m).

    The exact count is sandwiched between q^e and q^e * exp(2/(q-1)) with
    e = (length + m) w - w^2; that sandwich is re-checked here in exact
    integer arithmetic, then returned as (lo, hi) in log2 units.
    """
    if w + 3 > min(length, m):
        raise ValueError("estimate requires w + 3 <= min(length, m)")
    e = (length + m) * w - w * w
    exact = sphere_size(q, m, length, w)
    assert q ** e <= exact, "lower estimate exceeded the exact count"
    # recheck the upper estimate in exact rational arithmetic, using slight
    # over-approximations of the constant: e^2 < 7.389057 covers q = 2 and
    # e^(2/(q-1)) <= e < 2.7182819 covers q >= 3
    if q == 2:
        assert exact * 10 ** 6 <= 7389057 * q ** e, \
            "exact count exceeded upper estimate"
    else:
        assert exact * 10 ** 7 <= 27182819 * q ** e, \
            "exact count exceeded upper estimate"
    lo = e * math.log2(q)
    return (lo, lo + 2.0 / (q - 1) * math.log2(math.e))
