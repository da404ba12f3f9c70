"""Syndrome decoding for rank-metric check matrices with small row supports.

The decoder is handed S = H E^T, where H is a known check matrix whose row r
has all entries inside a known low-dimensional subspace W_r, and E is an
unknown matrix whose entries span an unknown subspace of dimension t.
Recovery runs in two steps:

  I.  Support recovery.  For each syndrome row, intersect the scaled spans
      f^-1 * span(row) over the basis elements f of that row's support;
      the first row whose intersection has dimension exactly t yields the
      candidate error support.  A row is abandoned early once its running
      intersection drops below dimension t.

  II. Coefficient recovery.  Every syndrome entry is written over the
      product basis (support basis times row-support basis); matching
      those coordinates against the known decompositions of H's entries
      turns H E^T = S into one F_q system whose matrix is shared by every
      error coordinate and every syndrome column, so it is factored once.
      The system must be uniquely solvable: an inconsistent system and a
      rank-deficient one are reported as distinct failures.

decode() re-verifies H E^T = S on the reconstructed error before returning.
Both steps are deterministic and single-shot; there is no retry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .linalg import MatFq, MatFqm, mat_mul
from .subspace import Subspace, intersect, inverse_scale, product_space, span_of


class DecodeFailure(Exception):
    """ The syndrome could not be decoded. """

    step: str = ""


class StepIFailure(DecodeFailure):
    """ No syndrome row produced a candidate support of the right dimension. """

    step = "I"


class StepIIFailure(DecodeFailure):
    """ A support was found, but coefficient recovery failed on it. """

    step = "II"

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason  # "product_dim", "inconsistent", "rank_deficient",
        #                        or "verification"


class CheckMatrix:
    """A check matrix bundled with its per-row supports.

    nu[r][d] caches the F_q coordinates of entry (r, d) over the canonical
    basis of the row support W_r; step II consumes these directly.  When
    supports are not supplied they are computed as the spans of the rows.
    """

    __slots__ = ("H", "supports", "nu")

    def __init__(self, H: MatFqm, supports: Optional[Sequence[Subspace]] = None):
        if supports is None:
            supports = [span_of(H.ctx, H.row(r)) for r in range(H.nrows)]
        supports = tuple(supports)
        if len(supports) != H.nrows:
            raise ValueError("one support per check-matrix row is required")
        nu = []
        for r in range(H.nrows):
            W = supports[r]
            if W.ctx != H.ctx:
                raise ValueError("support field does not match the matrix")
            row_nu = []
            for d in range(H.ncols):
                co = W.coefficients(H.rows[r][d])
                if co is None:
                    raise ValueError(
                        f"entry ({r}, {d}) lies outside its declared row support")
                row_nu.append(co)
            nu.append(tuple(row_nu))
        self.H = H
        self.supports = supports
        self.nu = tuple(nu)

    @property
    def n_rows(self) -> int:
        return self.H.nrows

    @property
    def n_cols(self) -> int:
        return self.H.ncols

    def in_regime(self, t: int, n_syndrome_cols: int) -> bool:
        """Whether (t, N) sits inside the analyzed failure-bound regime.

        Out-of-regime decoding is permitted; the failure bounds just say
        nothing about it.
        """
        dims = [W.dim for W in self.supports]
        wmax = max(dims) if dims else 0
        m = self.H.ctx.m
        return (self.H.nrows < self.H.ncols <= sum(dims)
                and (2 * wmax - 1) * t < m
                and n_syndrome_cols >= t * wmax)


@dataclass(frozen=True)
class DecodeResult:
    """ Outcome of a successful decode. """

    error: MatFqm        # N x n_cols, rows indexed like the syndrome columns
    support: Subspace    # the recovered t-dimensional support
    row_used: int        # syndrome row that produced the support in step I
    in_regime: bool      # False when the failure bounds do not apply


def recover_support(check: CheckMatrix, S: MatFqm, t: int) -> Tuple[Subspace, int]:
    """Step I: find the error support from the syndrome.

    Returns (support, row index) for the first syndrome row whose
    intersection of scaled spans has dimension exactly t; raises
    StepIFailure when no row does.
    """
    if S.ctx != check.H.ctx or S.nrows != check.H.nrows:
        raise ValueError("syndrome shape or field does not match the check matrix")
    ctx = S.ctx
    for r in range(S.nrows):
        W = check.supports[r]
        if W.dim == 0:
            continue
        row_span = span_of(ctx, S.row(r))
        cand: Optional[Subspace] = None
        for f in W.basis:
            shifted = inverse_scale(row_span, f)
            cand = shifted if cand is None else intersect(cand, shifted)
            if cand.dim < t:
                break
        if cand is not None and cand.dim == t:
            return cand, r
    raise StepIFailure(f"no syndrome row produced a support of dimension {t}")


def recover_coefficients(check: CheckMatrix, S: MatFqm,
                         support: Subspace) -> MatFqm:
    """Step II: reconstruct the error matrix from syndrome and support.

    Returns E of shape (syndrome columns) x (check-matrix columns) with
    H E^T = S and every entry of E inside the support.
    """
    ctx = S.ctx
    q = ctx.q
    H = check.H
    ell, n_cols, N = H.nrows, H.ncols, S.ncols
    t = support.dim
    eps = support.basis

    # one block of rows per check row: M[(r, i), d] = nu[r][d][i], and the
    # right-hand sides carry the product-basis coordinates of the syndrome
    m_rows = []
    rhs_rows = []
    for r in range(ell):
        W = check.supports[r]
        w_r = W.dim
        if w_r == 0:
            if any(S.rows[r]):
                raise StepIIFailure(
                    "inconsistent",
                    f"row {r} has an empty support but a nonzero syndrome")
            continue
        if product_space(support, W).dim != t * w_r:
            raise StepIIFailure(
                "product_dim",
                f"support times row support {r} has deficient dimension")
        # coordinates of every syndrome entry over the products f_i * eps_j;
        # the products are independent here, so the first t*w_r columns of
        # the reduced system all carry pivots and the solution reads off
        products = [ctx.mul(f, e) for f in W.basis for e in eps]
        tw = t * w_r
        prod_mat = MatFq(q, ctx.m, products, _checked=True)
        syn_mat = MatFq(q, ctx.m, list(S.rows[r]), _checked=True)
        aug = prod_mat.transpose().hstack(syn_mat.transpose())
        R, rank, piv = aug.rref()
        if any(p >= tw for p in piv):
            raise StepIIFailure(
                "inconsistent",
                f"syndrome row {r} leaves the product space of its support")
        for i in range(w_r):
            m_rows.append([check.nu[r][d][i] for d in range(n_cols)])
            rhs_rows.append([R.get(i * t + j, tw + c)
                             for j in range(t) for c in range(N)])

    M = MatFq.from_rows(q, m_rows, ncols=n_cols)
    rhs = MatFq.from_rows(q, rhs_rows, ncols=t * N)
    R2, rank2, piv2 = M.hstack(rhs).rref()
    if any(p >= n_cols for p in piv2):
        raise StepIIFailure("inconsistent",
                            "coefficient system has no solution")
    if rank2 < n_cols:
        raise StepIIFailure("rank_deficient",
                            "coefficient system is not uniquely solvable")

    # rank n_cols with all pivots left of the right-hand block means the
    # pivot columns are exactly 0..n_cols-1: row d carries coordinate d
    error = MatFqm.zeros(ctx, N, n_cols)
    for d in range(n_cols):
        for c in range(N):
            acc = 0
            for j in range(t):
                x = R2.get(d, n_cols + j * N + c)
                if x:
                    acc = ctx.add(acc, ctx.scale(eps[j], x))
            error.rows[c][d] = acc
    return error


def decode(check: CheckMatrix, S: MatFqm, t: int) -> DecodeResult:
    """ Run both steps and re-verify H E^T = S on the result. """
    if t < 1:
        raise ValueError("target support dimension must be >= 1")
    support, row_used = recover_support(check, S, t)
    error = recover_coefficients(check, S, support)
    if mat_mul(check.H, error.transpose()) != S:
        raise StepIIFailure(
            "verification",
            "reconstructed error does not reproduce the syndrome")
    return DecodeResult(error=error, support=support, row_used=row_used,
                        in_regime=check.in_regime(t, S.ncols))
