"""Dense exact linear algebra over F_{q^m} and over the base field F_q.

Two matrix types:

  MatFqm  entries in F_{q^m}, stored as nested lists of packed ints
          (see rmtf.field).  For q = 2 with m <= 63 the heavy operations
          (products, echelon reduction) dispatch to compiled kernels.

  MatFq   entries in F_q, each row stored as one base-q packed int, so
          that for q = 2 a row operation is a single word-wide XOR.

Echelon reduction always takes the first nonzero entry at or below the
current row as the pivot, which makes every reduced form (and everything
derived from one, such as canonical subspace bases) deterministic.

Serialized matrices carry a 16-byte header:

  offset  size  field
  0       4     magic "RMTF"
  4       1     format version (1)
  5       1     kind (1 = MatFqm, 2 = MatFq)
  6       4     rows, little-endian
  10      4     cols, little-endian
  14      2     reserved (0)

followed by the payload: row-major per-element encodings for MatFqm
(ctx.element_bytes each), or one packed base-q row per matrix row,
little-endian, ceil(log2(q**cols)/8) bytes each, for MatFq.  Field
parameters are not part of the header; the caller supplies them on read.
"""

from __future__ import annotations

import struct
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .field import FieldCtx, _pack_digits, _unpack_digits

MAGIC = b"RMTF"
FORMAT_VERSION = 1
KIND_MAT_FQM = 1
KIND_MAT_FQ = 2

_K = None


def _fast():
    """ Import the compiled kernels on first use (numba import is slow). """
    global _K
    if _K is None:
        from . import _kernels
        _K = _kernels
    return _K


def _pack_mat_header(kind: int, rows: int, cols: int) -> bytes:
    return MAGIC + struct.pack("<BBIIH", FORMAT_VERSION, kind, rows, cols, 0)


def parse_header(data: bytes, kind: int) -> Tuple[int, int]:
    """ Validate a 16-byte matrix header and return (rows, cols). """
    if len(data) < 16 or data[:4] != MAGIC:
        raise ValueError("not a matrix file (bad magic)")
    ver, k, rows, cols, _ = struct.unpack("<BBIIH", data[4:16])
    if ver != FORMAT_VERSION:
        raise ValueError(f"unsupported format version {ver}")
    if k != kind:
        raise ValueError(f"wrong payload kind {k}, expected {kind}")
    return rows, cols


def packed_row_bytes(q: int, ncols: int) -> int:
    """ Bytes for one base-q packed row of ncols digits. """
    return ((q ** ncols - 1).bit_length() + 7) // 8


class MatFqm:
    """ Dense matrix over F_{q^m}.  Shape is fixed; entries are mutable. """

    __slots__ = ("ctx", "nrows", "ncols", "rows")

    def __init__(self, ctx: FieldCtx, rows: Iterable[Iterable[int]],
                 ncols: Optional[int] = None, _checked: bool = False):
        self.ctx = ctx
        self.rows: List[List[int]] = [list(r) for r in rows]
        self.nrows = len(self.rows)
        if self.nrows:
            self.ncols = len(self.rows[0])
        elif ncols is not None:
            self.ncols = ncols
        else:
            raise ValueError("ncols is required for a matrix with no rows")
        for r in self.rows:
            if len(r) != self.ncols:
                raise ValueError("ragged rows")
            if not _checked:
                for v in r:
                    ctx.check(v)

    @classmethod
    def zeros(cls, ctx: FieldCtx, nrows: int, ncols: int) -> "MatFqm":
        return cls(ctx, [[0] * ncols for _ in range(nrows)], ncols=ncols,
                   _checked=True)

    @classmethod
    def identity(cls, ctx: FieldCtx, n: int) -> "MatFqm":
        M = cls.zeros(ctx, n, n)
        for i in range(n):
            M.rows[i][i] = 1
        return M

    @classmethod
    def random(cls, ctx: FieldCtx, nrows: int, ncols: int, rng) -> "MatFqm":
        return cls(ctx, [[ctx.rand(rng) for _ in range(ncols)]
                         for _ in range(nrows)], ncols=ncols, _checked=True)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij: Tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def __setitem__(self, ij: Tuple[int, int], v: int) -> None:
        i, j = ij
        self.ctx.check(v)
        self.rows[i][j] = v

    def row(self, i: int) -> Tuple[int, ...]:
        return tuple(self.rows[i])

    def copy(self) -> "MatFqm":
        return MatFqm(self.ctx, self.rows, ncols=self.ncols, _checked=True)

    def __eq__(self, other) -> bool:
        return (isinstance(other, MatFqm) and self.ctx == other.ctx
                and self.ncols == other.ncols and self.rows == other.rows)

    def __repr__(self) -> str:
        return f"MatFqm({self.nrows}x{self.ncols} over {self.ctx!r})"

    def is_zero(self) -> bool:
        return all(v == 0 for r in self.rows for v in r)

    def transpose(self) -> "MatFqm":
        return MatFqm(self.ctx,
                      [[self.rows[i][j] for i in range(self.nrows)]
                       for j in range(self.ncols)],
                      ncols=self.nrows, _checked=True)

    def hstack(self, other: "MatFqm") -> "MatFqm":
        if self.ctx != other.ctx or self.nrows != other.nrows:
            raise ValueError("hstack needs matching field and row count")
        return MatFqm(self.ctx,
                      [self.rows[i] + other.rows[i] for i in range(self.nrows)],
                      ncols=self.ncols + other.ncols, _checked=True)

    def take_cols(self, idx: Sequence[int]) -> "MatFqm":
        return MatFqm(self.ctx, [[r[j] for j in idx] for r in self.rows],
                      ncols=len(idx), _checked=True)

    def neg(self) -> "MatFqm":
        ctx = self.ctx
        return MatFqm(ctx, [[ctx.neg(v) for v in r] for r in self.rows],
                      ncols=self.ncols, _checked=True)

    def _np(self) -> np.ndarray:
        return np.array(self.rows, dtype=np.uint64)

    # -- serialization ------------------------------------------------------

    def to_bytes(self) -> bytes:
        ctx = self.ctx
        body = b"".join(ctx.to_bytes(v) for r in self.rows for v in r)
        return _pack_mat_header(KIND_MAT_FQM, self.nrows, self.ncols) + body

    @classmethod
    def from_bytes(cls, ctx: FieldCtx, data: bytes) -> "MatFqm":
        nrows, ncols = parse_header(data, KIND_MAT_FQM)
        eb = ctx.element_bytes
        if len(data) != 16 + nrows * ncols * eb:
            raise ValueError("matrix payload has the wrong length")
        off = 16
        rows = []
        for _ in range(nrows):
            row = []
            for _ in range(ncols):
                row.append(ctx.from_bytes(data[off:off + eb]))
                off += eb
            rows.append(row)
        return cls(ctx, rows, ncols=ncols, _checked=True)


def mat_add(A: MatFqm, B: MatFqm) -> MatFqm:
    if A.ctx != B.ctx or A.shape != B.shape:
        raise ValueError("shape or field mismatch")
    ctx = A.ctx
    if ctx.q == 2:
        rows = [[x ^ y for x, y in zip(ra, rb)]
                for ra, rb in zip(A.rows, B.rows)]
    else:
        rows = [[ctx.add(x, y) for x, y in zip(ra, rb)]
                for ra, rb in zip(A.rows, B.rows)]
    return MatFqm(ctx, rows, ncols=A.ncols, _checked=True)


def mat_sub(A: MatFqm, B: MatFqm) -> MatFqm:
    if A.ctx.q == 2:
        return mat_add(A, B)
    return mat_add(A, B.neg())


def mat_mul(A: MatFqm, B: MatFqm) -> MatFqm:
    if A.ctx != B.ctx:
        raise ValueError("field mismatch")
    if A.ncols != B.nrows:
        raise ValueError(f"cannot multiply {A.shape} by {B.shape}")
    ctx = A.ctx
    if A.nrows == 0 or B.ncols == 0:
        return MatFqm.zeros(ctx, A.nrows, B.ncols)
    if ctx.fast:
        C = np.zeros((A.nrows, B.ncols), dtype=np.uint64)
        _fast().gf2m_matmul(A._np(), B._np(), C, ctx.modulus, ctx.m)
        return MatFqm(ctx, C.tolist(), ncols=B.ncols, _checked=True)
    out = []
    for i in range(A.nrows):
        arow = A.rows[i]
        crow = [0] * B.ncols
        for k, a in enumerate(arow):
            if a:
                brow = B.rows[k]
                for j in range(B.ncols):
                    if brow[j]:
                        crow[j] = ctx.add(crow[j], ctx.mul(a, brow[j]))
        out.append(crow)
    return MatFqm(ctx, out, ncols=B.ncols, _checked=True)


def rref(M: MatFqm) -> Tuple[MatFqm, int, Tuple[int, ...]]:
    """Reduced row echelon form of M.

    Returns (R, rank, pivots) where pivots lists the pivot column of each
    of the first `rank` rows, in order.  M itself is not modified.
    """
    ctx = M.ctx
    if M.nrows == 0:
        return M.copy(), 0, ()
    if ctx.fast:
        A = M._np()
        piv = np.empty(M.nrows, dtype=np.int64)
        rank = _fast().gf2m_rref(A, piv, ctx.modulus, ctx.m)
        return (MatFqm(ctx, A.tolist(), ncols=M.ncols, _checked=True),
                int(rank), tuple(int(p) for p in piv[:rank]))
    rows = [list(r) for r in M.rows]
    nr, nc = M.nrows, M.ncols
    pivots: List[int] = []
    r = 0
    for c in range(nc):
        if r == nr:
            break
        p = next((i for i in range(r, nr) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        if rows[r][c] != 1:
            pinv = ctx.inv(rows[r][c])
            rows[r] = [ctx.mul(pinv, v) for v in rows[r]]
        for i in range(nr):
            if i != r and rows[i][c]:
                coef = rows[i][c]
                rows[i] = [ctx.sub(rows[i][j], ctx.mul(coef, rows[r][j]))
                           for j in range(nc)]
        pivots.append(c)
        r += 1
    return MatFqm(ctx, rows, ncols=nc, _checked=True), r, tuple(pivots)


def solve(A: MatFqm, B: MatFqm) -> Optional[MatFqm]:
    """Solve X * A = B for X over F_{q^m}.

    Returns some solution (free variables set to zero), which is unique
    when A has full row rank, or None when the system is inconsistent.
    """
    if A.ctx != B.ctx or A.ncols != B.ncols:
        raise ValueError("A and B need the same field and column count")
    ctx = A.ctx
    aug = A.transpose().hstack(B.transpose())
    R, _, pivots = rref(aug)
    if any(p >= A.nrows for p in pivots):
        return None
    X = MatFqm.zeros(ctx, B.nrows, A.nrows)
    for i, p in enumerate(pivots):
        for j in range(B.nrows):
            X.rows[j][p] = R.rows[i][A.nrows + j]
    return X


def expand_to_base(M: MatFqm) -> "MatFq":
    """Expand a linear map over F_{q^m} to one over F_q.

    Row i of M becomes m rows of the result, one per basis coordinate, so
    that for any vector x with entries in the base field, M x = y over
    F_{q^m} exactly when expand_to_base(M) x = expand(y) over F_q.
    """
    ctx = M.ctx
    out_rows: List[List[int]] = []
    for r in M.rows:
        coords_row = [ctx.coords(v) for v in r]
        for k in range(ctx.m):
            out_rows.append([c[k] for c in coords_row])
    return MatFq.from_rows(ctx.q, out_rows, ncols=M.ncols)


class MatFq:
    """ Dense matrix over the prime field F_q, rows packed base q. """

    __slots__ = ("q", "nrows", "ncols", "rows")

    def __init__(self, q: int, ncols: int, packed_rows: Iterable[int],
                 _checked: bool = False):
        self.q = q
        self.ncols = ncols
        self.rows: List[int] = list(packed_rows)
        self.nrows = len(self.rows)
        if not _checked:
            limit = q ** ncols
            for r in self.rows:
                if not isinstance(r, int) or not 0 <= r < limit:
                    raise ValueError("packed row out of range")

    @classmethod
    def from_rows(cls, q: int, rows: Iterable[Sequence[int]],
                  ncols: Optional[int] = None) -> "MatFq":
        rows = [list(r) for r in rows]
        if rows:
            ncols = len(rows[0])
        elif ncols is None:
            raise ValueError("ncols is required for a matrix with no rows")
        packed = []
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged rows")
            for d in r:
                if not 0 <= d < q:
                    raise ValueError("digit out of range")
            packed.append(_pack_digits(r, q))
        return cls(q, ncols, packed, _checked=True)

    @classmethod
    def zeros(cls, q: int, nrows: int, ncols: int) -> "MatFq":
        return cls(q, ncols, [0] * nrows, _checked=True)

    @classmethod
    def identity(cls, q: int, n: int) -> "MatFq":
        return cls(q, n, [q ** i for i in range(n)], _checked=True)

    @classmethod
    def random(cls, q: int, nrows: int, ncols: int, rng) -> "MatFq":
        limit = q ** ncols
        return cls(q, ncols, [rng.randrange(limit) for _ in range(nrows)],
                   _checked=True)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nrows, self.ncols)

    def get(self, i: int, j: int) -> int:
        if self.q == 2:
            return (self.rows[i] >> j) & 1
        return (self.rows[i] // self.q ** j) % self.q

    def set(self, i: int, j: int, v: int) -> None:
        if not 0 <= v < self.q:
            raise ValueError("digit out of range")
        self.rows[i] += (v - self.get(i, j)) * self.q ** j

    def row_digits(self, i: int) -> Tuple[int, ...]:
        return tuple(_unpack_digits(self.rows[i], self.q, self.ncols))

    def copy(self) -> "MatFq":
        return MatFq(self.q, self.ncols, self.rows, _checked=True)

    def __eq__(self, other) -> bool:
        return (isinstance(other, MatFq)
                and (self.q, self.ncols, self.rows)
                == (other.q, other.ncols, other.rows))

    def __repr__(self) -> str:
        return f"MatFq({self.nrows}x{self.ncols} over F_{self.q})"

    def is_zero(self) -> bool:
        return not any(self.rows)

    def transpose(self) -> "MatFq":
        cols = [[self.get(i, j) for i in range(self.nrows)]
                for j in range(self.ncols)]
        return MatFq.from_rows(self.q, cols, ncols=self.nrows)

    def hstack(self, other: "MatFq") -> "MatFq":
        if self.q != other.q or self.nrows != other.nrows:
            raise ValueError("hstack needs matching field and row count")
        shift = self.q ** self.ncols
        rows = [a + b * shift for a, b in zip(self.rows, other.rows)]
        return MatFq(self.q, self.ncols + other.ncols, rows, _checked=True)

    def vstack(self, other: "MatFq") -> "MatFq":
        if self.q != other.q or self.ncols != other.ncols:
            raise ValueError("vstack needs matching field and column count")
        return MatFq(self.q, self.ncols, self.rows + other.rows, _checked=True)

    def matmul(self, other: "MatFq") -> "MatFq":
        if self.q != other.q or self.ncols != other.nrows:
            raise ValueError("shape or field mismatch")
        q = self.q
        bt = other.transpose()
        if q == 2:
            rows = [_pack_digits(
                [(a & b).bit_count() & 1 for b in bt.rows], 2)
                for a in self.rows]
            return MatFq(2, other.ncols, rows, _checked=True)
        out = []
        for i in range(self.nrows):
            a = self.row_digits(i)
            out.append([sum(x * y for x, y in zip(a, bt.row_digits(j))) % q
                        for j in range(other.ncols)])
        return MatFq.from_rows(q, out, ncols=other.ncols)

    def rref(self) -> Tuple["MatFq", int, Tuple[int, ...]]:
        """ Reduced row echelon form; returns (R, rank, pivot columns). """
        if self.q == 2:
            rows = list(self.rows)
            pivots: List[int] = []
            r = 0
            for c in range(self.ncols):
                if r == self.nrows:
                    break
                bit = 1 << c
                p = next((i for i in range(r, self.nrows) if rows[i] & bit),
                         None)
                if p is None:
                    continue
                rows[r], rows[p] = rows[p], rows[r]
                for i in range(self.nrows):
                    if i != r and rows[i] & bit:
                        rows[i] ^= rows[r]
                pivots.append(c)
                r += 1
            return MatFq(2, self.ncols, rows, _checked=True), r, tuple(pivots)
        q = self.q
        rows = [list(self.row_digits(i)) for i in range(self.nrows)]
        pivots = []
        r = 0
        for c in range(self.ncols):
            if r == self.nrows:
                break
            p = next((i for i in range(r, self.nrows) if rows[i][c]), None)
            if p is None:
                continue
            rows[r], rows[p] = rows[p], rows[r]
            if rows[r][c] != 1:
                s = pow(rows[r][c], q - 2, q)
                rows[r] = [(s * v) % q for v in rows[r]]
            for i in range(self.nrows):
                if i != r and rows[i][c]:
                    coef = rows[i][c]
                    rows[i] = [(rows[i][j] - coef * rows[r][j]) % q
                               for j in range(self.ncols)]
            pivots.append(c)
            r += 1
        return MatFq.from_rows(q, rows, ncols=self.ncols), r, tuple(pivots)

    def rank(self) -> int:
        return self.rref()[1]

    # -- serialization ------------------------------------------------------

    def to_bytes(self) -> bytes:
        rb = packed_row_bytes(self.q, self.ncols)
        body = b"".join(r.to_bytes(rb, "little") for r in self.rows)
        return _pack_mat_header(KIND_MAT_FQ, self.nrows, self.ncols) + body

    @classmethod
    def from_bytes(cls, q: int, data: bytes) -> "MatFq":
        nrows, ncols = parse_header(data, KIND_MAT_FQ)
        rb = packed_row_bytes(q, ncols)
        if len(data) != 16 + nrows * rb:
            raise ValueError("matrix payload has the wrong length")
        limit = q ** ncols
        rows = []
        for i in range(nrows):
            v = int.from_bytes(data[16 + i * rb:16 + (i + 1) * rb], "little")
            if v >= limit:
                raise ValueError("packed row out of range")
            rows.append(v)
        return cls(q, ncols, rows, _checked=True)
