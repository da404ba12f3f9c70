import random

import pytest

from rmtf.decoder import (CheckMatrix, DecodeFailure, StepIFailure,
                          StepIIFailure, decode, recover_coefficients,
                          recover_support)
from rmtf.field import make_field
from rmtf.linalg import MatFqm, mat_mul
from rmtf.subspace import (Subspace, sample_homogeneous,
                           sample_semi_homogeneous, sample_subspace, span_of,
                           support_of)

CTX2 = make_field(2, 13)
CTX3 = make_field(3, 5)


def _instance(ctx, ell, n_cols, w, t, N, seed):
    """ A decodable instance: check matrix, true error, matching syndrome. """
    rng = random.Random(seed)
    sups = [sample_subspace(ctx, w, rng) for _ in range(ell)]
    H = sample_semi_homogeneous(ctx, n_cols, sups, rng, exact=True)
    err_sup = sample_subspace(ctx, t, rng)
    E = sample_homogeneous(ctx, N, n_cols, err_sup, rng, exact=True)
    S = mat_mul(H, E.transpose())
    return CheckMatrix(H, sups), S, E, err_sup


@pytest.mark.parametrize("seed", range(8))
def test_roundtrip_binary(seed):
    check, S, E, err_sup = _instance(CTX2, 6, 7, 3, 2, 10, seed)
    res = decode(check, S, 2)
    assert res.error == E
    assert res.support == err_sup
    assert res.in_regime
    assert 0 <= res.row_used < 6


@pytest.mark.parametrize("seed", range(4))
def test_roundtrip_ternary(seed):
    check, S, E, err_sup = _instance(CTX3, 3, 4, 2, 1, 4, 100 + seed)
    res = decode(check, S, 1)
    assert res.error == E
    assert res.support == err_sup
    assert res.in_regime


def test_decode_is_deterministic():
    check, S, E, _ = _instance(CTX2, 6, 7, 3, 2, 10, 999)
    r1 = decode(check, S, 2)
    r2 = decode(check, S, 2)
    assert r1.error == r2.error
    assert r1.support == r2.support and r1.row_used == r2.row_used


def test_zero_syndrome_fails_support_recovery():
    check, S, _, _ = _instance(CTX2, 6, 7, 3, 2, 10, 5)
    Z = MatFqm.zeros(CTX2, 6, 10)
    with pytest.raises(StepIFailure) as ei:
        decode(check, Z, 2)
    assert ei.value.step == "I"
    assert isinstance(ei.value, DecodeFailure)


def test_duplicate_column_makes_step_two_rank_deficient():
    # appending a copy of H's last column (and a zero error coordinate)
    # keeps the syndrome valid but the coefficient system loses uniqueness
    check, S, E, _ = _instance(CTX2, 6, 7, 3, 2, 10, 7)
    H2 = check.H.hstack(check.H.take_cols([6]))
    check2 = CheckMatrix(H2, check.supports)
    with pytest.raises(StepIIFailure) as ei:
        decode(check2, S, 2)
    assert ei.value.reason == "rank_deficient"
    assert ei.value.step == "II"


def test_empty_support_row_with_nonzero_syndrome_is_inconsistent():
    ctx = CTX2
    a = ctx.alpha
    H = MatFqm(ctx, [[0, 0], [1, a]])
    check = CheckMatrix(H)
    assert check.supports[0].dim == 0
    S = MatFqm(ctx, [[1], [a]])
    with pytest.raises(StepIIFailure) as ei:
        recover_coefficients(check, S, span_of(ctx, [1]))
    assert ei.value.reason == "inconsistent"


def test_syndrome_outside_product_space_is_inconsistent():
    ctx = CTX2
    check = CheckMatrix(MatFqm(ctx, [[1]]))
    S = MatFqm(ctx, [[ctx.alpha]])  # not in span(1) * span(1)
    with pytest.raises(StepIIFailure) as ei:
        recover_coefficients(check, S, span_of(ctx, [1]))
    assert ei.value.reason == "inconsistent"


def test_degenerate_product_support_is_reported():
    # support == row support == span(1, alpha): the pairwise products only
    # span 1, alpha, alpha^2, one short of the needed t*w dimensions
    ctx = CTX2
    a = ctx.alpha
    W = span_of(ctx, [1, a])
    H = MatFqm(ctx, [[1, a], [a, 1]])
    check = CheckMatrix(H, [W, W])
    with pytest.raises(StepIIFailure) as ei:
        recover_coefficients(check, MatFqm.zeros(ctx, 2, 3), W)
    assert ei.value.reason == "product_dim"


def test_check_matrix_validation():
    ctx = CTX2
    a = ctx.alpha
    W = span_of(ctx, [1, a])
    with pytest.raises(ValueError):
        CheckMatrix(MatFqm(ctx, [[ctx.mul(a, a)]]), [W])  # entry outside
    with pytest.raises(ValueError):
        CheckMatrix(MatFqm(ctx, [[1], [a]]), [W])  # one support for two rows
    W3 = span_of(CTX3, [1])
    with pytest.raises(ValueError):
        CheckMatrix(MatFqm(ctx, [[1]]), [W3])  # support over the wrong field


def test_default_supports_are_row_spans():
    check, _, _, _ = _instance(CTX2, 4, 5, 2, 1, 3, 11)
    auto = CheckMatrix(check.H)
    assert all(auto.supports[r] == span_of(CTX2, check.H.row(r))
               for r in range(4))
    assert auto.supports == check.supports  # exact sampling spans each W_r


def test_in_regime_conditions():
    check, S, _, _ = _instance(CTX2, 6, 7, 3, 2, 10, 13)
    assert check.in_regime(2, 6)        # N = t*w exactly
    assert not check.in_regime(2, 5)    # too few syndrome columns
    assert not check.in_regime(3, 20)   # (2w-1)t = 15 >= m = 13
    square, _, _, _ = _instance(CTX2, 5, 5, 3, 2, 10, 13)
    assert not square.in_regime(2, 10)  # needs strictly more columns than rows
    wide, _, _, _ = _instance(CTX2, 2, 7, 3, 2, 10, 13)
    assert not wide.in_regime(2, 10)    # n_cols > sum of support dims


def test_out_of_regime_decode_still_works():
    # over F_{2^10}, (2w-1)t equals m, so the failure analysis is silent;
    # this instance decodes anyway and is flagged as out of regime
    check, S, E, _ = _instance(make_field(2, 10), 6, 7, 3, 2, 10, 0)
    res = decode(check, S, 2)
    assert not res.in_regime
    assert res.error == E


def test_decode_argument_validation():
    check, S, _, _ = _instance(CTX2, 4, 5, 2, 1, 3, 17)
    with pytest.raises(ValueError):
        decode(check, S, 0)
    with pytest.raises(ValueError):
        recover_support(check, MatFqm.zeros(CTX2, 3, 3), 1)  # row mismatch
    with pytest.raises(ValueError):
        recover_support(check, MatFqm.zeros(CTX3, 4, 3), 1)  # field mismatch


def test_error_entries_live_in_recovered_support():
    check, S, E, err_sup = _instance(CTX2, 6, 7, 3, 2, 10, 23)
    res = decode(check, S, 2)
    assert all(v in res.support for r in res.error.rows for v in r)
    assert support_of(res.error) == err_sup
