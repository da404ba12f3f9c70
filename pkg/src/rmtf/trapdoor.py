"""The injective trapdoor function family over rank-metric codes.

A keypair consists of a public k x (n+L) generator matrix G, stored in
systematic form, and a trapdoor matrix W = [W1 | W2] whose row i lies in a
secret w-dimensional support W_i, built so that G W^T = 0.  Evaluation maps
an (X, E) pair to X G + E, where E has rank weight exactly t; inversion
multiplies by W to cancel the codeword part (W C^T = W E^T), decodes the
resulting syndrome with the two-step decoder, and reads X off the pivot
columns.

Key generation draws from the supplied rng in a fixed order (supports,
then W1, then W2 with resampling, then R with resampling), so one seed
always reproduces one keypair bit for bit.  Keys are immutable by
convention after construction; eval and invert never mutate them, so a
keypair can be shared freely across threads.

Serialized keys and ciphertexts carry a 42-byte header:

  offset  size  field
  0       4     magic "RMTF"
  4       1     format version (1)
  5       1     kind (3 = public key, 4 = trapdoor key, 5 = ciphertext)
  6       36    q, m, n, L, k, w, t, N, lam as u32 little-endian

followed by the kind-specific payload.  Field elements in payloads are
packed as one continuous little-endian base-q^m integer (first element in
the lowest digits), so a stream of c elements costs exactly
ceil(log2(q^(m c))/8) bytes; files always use the default modulus for
(q, m).  The trapdoor payload lists the n row supports (each in the
subspace encoding) followed by the stream of W's entries row-major; the
public-key payload lists the k pivot columns as u16 little-endian followed
by the stream of the k(n+L-k) non-pivot entries row-major; a ciphertext
payload is the stream of its N(n+L) entries row-major.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .field import FieldCtx, make_field, _is_prime
from .linalg import (FORMAT_VERSION, MAGIC, MatFqm, mat_add, mat_mul,
                     mat_sub, rref)
from .subspace import (Subspace, sample_homogeneous, sample_semi_homogeneous,
                       sample_subspace, support_of)
from .decoder import CheckMatrix, decode

KIND_PK = 3
KIND_TK = 4
KIND_CT = 5

KEY_HEADER_BYTES = 42
GEN_ATTEMPTS = 256


class InversionError(Exception):
    """ Inversion failed after decoding (the input is not a valid image). """


@dataclass(frozen=True)
class ParamSet:
    """Parameters of one trapdoor function instance.

    All fields must be positive; the deeper structural requirements are
    reported by violations() and enforced by gen() and the analysis layer,
    so that out-of-regime sets can still be constructed and inspected.
    lam is the security level in bits that the set is meant to reach.
    """

    q: int
    m: int
    n: int
    L: int
    k: int
    w: int
    t: int
    N: int
    lam: int

    def __post_init__(self):
        for name in ("q", "m", "n", "L", "k", "w", "t", "N", "lam"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer")

    def violations(self) -> List[str]:
        """ Structural requirements that fail; empty when gen() can run. """
        out = []
        if not _is_prime(self.q):
            out.append(f"q = {self.q} is not prime")
        if self.n * self.w < self.n + self.L:
            out.append(f"n*w >= n+L fails ({self.n * self.w} < {self.n + self.L})")
        if self.N < self.t * self.w:
            out.append(f"N >= t*w fails ({self.N} < {self.t * self.w})")
        if (2 * self.w - 1) * self.t >= self.m:
            out.append(f"(2w-1)*t < m fails ({(2 * self.w - 1) * self.t} >= {self.m})")
        if self.k >= self.n + self.L:
            out.append(f"k < n+L fails ({self.k} >= {self.n + self.L})")
        if self.t > min(self.m, self.n + self.L):
            out.append(f"t <= min(m, n+L) fails ({self.t} > {min(self.m, self.n + self.L)})")
        if self.w > self.m:
            out.append(f"w <= m fails ({self.w} > {self.m})")
        if self.k > self.L:
            out.append(f"k <= L fails ({self.k} > {self.L}); a rank-k public"
                       " matrix needs at least k uniform columns")
        return out

    def field(self) -> FieldCtx:
        """ The working field F_{q^m} with the default modulus. """
        return make_field(self.q, self.m)


class PublicKey:
    """Systematic-form public matrix.

    Holds the k pivot column indices (the lexicographically first full-rank
    set, as produced by echelon reduction) and the k x (n+L-k) block of
    non-pivot columns; the full matrix has an implicit identity on the
    pivots.  Treat as immutable.
    """

    __slots__ = ("params", "ctx", "pivots", "block", "_G")

    def __init__(self, params: ParamSet, ctx: FieldCtx,
                 pivots: Sequence[int], block: MatFqm):
        ncols = params.n + params.L
        pivots = tuple(pivots)
        if len(pivots) != params.k or sorted(set(pivots)) != list(pivots):
            raise ValueError("need k strictly increasing pivot columns")
        if pivots and not (0 <= pivots[0] and pivots[-1] < ncols):
            raise ValueError("pivot column out of range")
        if block.shape != (params.k, ncols - params.k) or block.ctx != ctx:
            raise ValueError("non-pivot block has the wrong shape or field")
        self.params = params
        self.ctx = ctx
        self.pivots = pivots
        self.block = block
        self._G = None

    def matrix(self) -> MatFqm:
        """ The full k x (n+L) generator matrix (cached). """
        if self._G is None:
            p = self.params
            ncols = p.n + p.L
            pivset = set(self.pivots)
            G = MatFqm.zeros(self.ctx, p.k, ncols)
            for i, c in enumerate(self.pivots):
                G.rows[i][c] = 1
            for bj, c in enumerate(j for j in range(ncols) if j not in pivset):
                for i in range(p.k):
                    G.rows[i][c] = self.block.rows[i][bj]
            self._G = G
        return self._G

    def __eq__(self, other) -> bool:
        return (isinstance(other, PublicKey)
                and (self.params, self.pivots) == (other.params, other.pivots)
                and self.block == other.block)

    def __repr__(self) -> str:
        p = self.params
        return f"PublicKey(k={p.k}, n+L={p.n + p.L}, q={p.q}, m={p.m})"


class TrapdoorKey:
    """ The trapdoor matrix W = [W1 | W2] and its row supports.  Immutable. """

    __slots__ = ("params", "ctx", "supports", "W", "_check")

    def __init__(self, params: ParamSet, ctx: FieldCtx,
                 supports: Sequence[Subspace], W: MatFqm):
        if len(supports) != params.n:
            raise ValueError("need one support per trapdoor row")
        if any(S.dim != params.w for S in supports):
            raise ValueError("every row support must have dimension w")
        if W.shape != (params.n, params.n + params.L) or W.ctx != ctx:
            raise ValueError("trapdoor matrix has the wrong shape or field")
        self.params = params
        self.ctx = ctx
        self.supports = tuple(supports)
        self.W = W
        self._check = None

    @property
    def W1(self) -> MatFqm:
        return self.W.take_cols(range(self.params.L))

    @property
    def W2(self) -> MatFqm:
        p = self.params
        return self.W.take_cols(range(p.L, p.L + p.n))

    def check_matrix(self) -> CheckMatrix:
        """Decoder view of W (cached).

        Construction re-verifies that every entry lies in its row support.
        """
        if self._check is None:
            self._check = CheckMatrix(self.W, self.supports)
        return self._check

    def __eq__(self, other) -> bool:
        return (isinstance(other, TrapdoorKey)
                and (self.params, self.supports) == (other.params, other.supports)
                and self.W == other.W)

    def __repr__(self) -> str:
        p = self.params
        return f"TrapdoorKey(n={p.n}, n+L={p.n + p.L}, w={p.w})"


@dataclass(frozen=True)
class Ciphertext:
    """ An image of the trapdoor function: an N x (n+L) matrix. """

    params: ParamSet
    C: MatFqm

    def __post_init__(self):
        if self.C.shape != (self.params.N, self.params.n + self.params.L):
            raise ValueError("ciphertext matrix has the wrong shape")


def gen(params: ParamSet, rng) -> Tuple[PublicKey, TrapdoorKey]:
    """Generate a keypair.

    Draws, in order: n uniform w-dimensional row supports; W1 (n x L,
    semi-homogeneous, every row spanning its support); W2 (n x n, same
    row supports), resampled until invertible; R (k x L uniform),
    resampled until the public matrix has rank k.  Each resampling loop
    is budgeted; exceeding a budget raises RuntimeError.
    """
    problems = params.violations()
    if problems:
        raise ValueError("parameter violations: " + "; ".join(problems))
    ctx = params.field()
    n, L, k = params.n, params.L, params.k

    supports = [sample_subspace(ctx, params.w, rng) for _ in range(n)]
    W1 = sample_semi_homogeneous(ctx, L, supports, rng, exact=True)

    for _ in range(GEN_ATTEMPTS):
        W2 = sample_semi_homogeneous(ctx, n, supports, rng, exact=True)
        R_, rank, piv = rref(W2.hstack(W1))
        if rank == n and all(p < n for p in piv):
            # reduced form is [I | W2^-1 W1]
            Y = MatFqm(ctx, [row[n:] for row in R_.rows], ncols=L,
                       _checked=True)
            break
    else:
        raise RuntimeError(
            f"no invertible inner block in {GEN_ATTEMPTS} attempts")
    W = W1.hstack(W2)

    neg_Yt = Y.transpose().neg()
    for _ in range(GEN_ATTEMPTS):
        R = MatFqm.random(ctx, k, L, rng)
        G = R.hstack(mat_mul(R, neg_Yt))
        Gr, grank, gpiv = rref(G)
        if grank == k:
            break
    else:
        raise RuntimeError(
            f"no rank-k public matrix in {GEN_ATTEMPTS} attempts")

    nonpiv = [c for c in range(n + L) if c not in set(gpiv)]
    pk = PublicKey(params, ctx, gpiv, Gr.take_cols(nonpiv))
    tk = TrapdoorKey(params, ctx, tuple(supports), W)
    # the systematic form is row-equivalent to G, so it still annihilates W
    assert mat_mul(pk.matrix(), W.transpose()).is_zero()
    return pk, tk


def sample_input(pk: PublicKey, rng) -> Tuple[MatFqm, MatFqm]:
    """ A uniform domain point: uniform X and an error of rank weight t. """
    p = pk.params
    X = MatFqm.random(pk.ctx, p.N, p.k, rng)
    V = sample_subspace(pk.ctx, p.t, rng)
    E = sample_homogeneous(pk.ctx, p.N, p.n + p.L, V, rng, exact=True)
    return X, E


def evaluate(pk: PublicKey, X: MatFqm, E: MatFqm) -> Ciphertext:
    """Apply the function: C = X G + E.

    E must have rank weight exactly t; anything else is outside the domain
    (and could not be inverted, since support recovery targets dimension t).
    """
    p = pk.params
    if X.ctx != pk.ctx or X.shape != (p.N, p.k):
        raise ValueError(f"X must be {p.N} x {p.k} over the key's field")
    if E.ctx != pk.ctx or E.shape != (p.N, p.n + p.L):
        raise ValueError(f"E must be {p.N} x {p.n + p.L} over the key's field")
    if support_of(E).dim != p.t:
        raise ValueError(f"error must have rank weight exactly {p.t}")
    return Ciphertext(p, mat_add(mat_mul(X, pk.matrix()), E))


def invert(pk: PublicKey, tk: TrapdoorKey, ct: Ciphertext) -> Tuple[MatFqm, MatFqm]:
    """Recover (X, E) from a ciphertext.

    Computes the syndrome W C^T (= W E^T because G W^T = 0), decodes it,
    reads X off the pivot columns of C - E, and re-evaluates to confirm.
    Decoding failures propagate as StepIFailure/StepIIFailure; a result
    that fails re-evaluation raises InversionError.
    """
    if pk.params != tk.params or pk.params != ct.params:
        raise ValueError("keypair and ciphertext parameters disagree")
    p = tk.params
    S = mat_mul(tk.W, ct.C.transpose())
    result = decode(tk.check_matrix(), S, p.t)
    E = result.error
    X = mat_sub(ct.C, E).take_cols(pk.pivots)
    try:
        again = evaluate(pk, X, E)
    except ValueError as exc:
        raise InversionError(f"recovered input is out of domain: {exc}")
    if again.C != ct.C:
        raise InversionError("recovered input does not re-evaluate to the "
                             "ciphertext; not a valid image")
    return X, E


# ---------------------------------------------------------------------------
# serialization

def _key_header(kind: int, p: ParamSet) -> bytes:
    return MAGIC + struct.pack("<BB9I", FORMAT_VERSION, kind, p.q, p.m, p.n,
                               p.L, p.k, p.w, p.t, p.N, p.lam)


def parse_key_header(data: bytes, kind: int) -> ParamSet:
    """ Validate a 42-byte key/ciphertext header and return its ParamSet. """
    if len(data) < KEY_HEADER_BYTES or data[:4] != MAGIC:
        raise ValueError("not a key file (bad magic)")
    ver, k = data[4], data[5]
    if ver != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {ver}")
    if k != kind:
        raise ValueError(f"wrong payload kind {k}, expected {kind}")
    return ParamSet(*struct.unpack_from("<9I", data, 6))


def _stream_bytes(ctx: FieldCtx, count: int) -> int:
    """ Bytes used by a continuous stream of `count` field elements. """
    if count == 0:
        return 0
    if ctx.q == 2:
        return (ctx.m * count + 7) // 8
    return ((ctx.order ** count - 1).bit_length() + 7) // 8


def _pack_stream(ctx: FieldCtx, values: Sequence[int]) -> bytes:
    """ Pack elements as one base-q^m integer, first element lowest. """
    acc = 0
    if ctx.q == 2:
        for i, v in enumerate(values):
            if v:
                acc |= v << (ctx.m * i)
    else:
        for v in reversed(values):
            acc = acc * ctx.order + v
    return acc.to_bytes(_stream_bytes(ctx, len(values)), "little")


def _unpack_stream(ctx: FieldCtx, data: bytes, count: int) -> List[int]:
    if len(data) != _stream_bytes(ctx, count):
        raise ValueError("element stream has the wrong length")
    acc = int.from_bytes(data, "little")
    out = []
    if ctx.q == 2:
        mask = ctx.order - 1
        for i in range(count):
            out.append((acc >> (ctx.m * i)) & mask)
        if count and acc >> (ctx.m * count):
            raise ValueError("stray bits after the element stream")
    else:
        for _ in range(count):
            acc, v = divmod(acc, ctx.order)
            out.append(v)
        if acc:
            raise ValueError("stray digits after the element stream")
    return out


def serialize_pk(pk: PublicKey) -> bytes:
    p = pk.params
    body = struct.pack(f"<{p.k}H", *pk.pivots)
    flat = [v for row in pk.block.rows for v in row]
    return _key_header(KIND_PK, p) + body + _pack_stream(pk.ctx, flat)


def deserialize_pk(data: bytes) -> PublicKey:
    p = parse_key_header(data, KIND_PK)
    ctx = p.field()
    off = KEY_HEADER_BYTES
    pivots = struct.unpack_from(f"<{p.k}H", data, off)
    off += 2 * p.k
    count = p.k * (p.n + p.L - p.k)
    flat = _unpack_stream(ctx, data[off:], count)
    ncols = p.n + p.L - p.k
    block = MatFqm(ctx, [flat[i * ncols:(i + 1) * ncols] for i in range(p.k)],
                   ncols=ncols, _checked=True)
    return PublicKey(p, ctx, pivots, block)


def serialize_tk(tk: TrapdoorKey) -> bytes:
    p = tk.params
    sup = b"".join(S.to_bytes() for S in tk.supports)
    flat = [v for row in tk.W.rows for v in row]
    return _key_header(KIND_TK, p) + sup + _pack_stream(tk.ctx, flat)


def deserialize_tk(data: bytes) -> TrapdoorKey:
    p = parse_key_header(data, KIND_TK)
    ctx = p.field()
    off = KEY_HEADER_BYTES
    supports = []
    for _ in range(p.n):
        dim = struct.unpack_from("<H", data, off)[0]
        end = off + Subspace.byte_size(ctx, dim)
        supports.append(Subspace.from_bytes(ctx, data[off:end]))
        off = end
    count = p.n * (p.n + p.L)
    flat = _unpack_stream(ctx, data[off:], count)
    ncols = p.n + p.L
    W = MatFqm(ctx, [flat[i * ncols:(i + 1) * ncols] for i in range(p.n)],
               ncols=ncols, _checked=True)
    return TrapdoorKey(p, ctx, supports, W)


def serialize_ct(ct: Ciphertext) -> bytes:
    flat = [v for row in ct.C.rows for v in row]
    return _key_header(KIND_CT, ct.params) + _pack_stream(ct.C.ctx, flat)


def deserialize_ct(data: bytes) -> Ciphertext:
    p = parse_key_header(data, KIND_CT)
    ctx = p.field()
    count = p.N * (p.n + p.L)
    flat = _unpack_stream(ctx, data[KEY_HEADER_BYTES:], count)
    ncols = p.n + p.L
    C = MatFqm(ctx, [flat[i * ncols:(i + 1) * ncols] for i in range(p.N)],
               ncols=ncols, _checked=True)
    return Ciphertext(p, C)
