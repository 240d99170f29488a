import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from qexch.codes import Code, PermInvariantSpec, builtin_code, perm_invariant_code
from qexch.errors import error_set_from_ops, exchange, make_error_set, pauli, permutation
from qexch.field import ExactScalar
from qexch.klcheck import (
    KLConsistencyError,
    check_kl,
    check_kl_extended,
    d_matrix,
    exact_rank,
    general_n_identities,
    gram_blocks,
    gram_blocks_float,
    gram_rank,
    span_dimension,
    span_report,
)
from qexch.qstate import apply_pauli, basis_state, inner_product, perm_sum_state


@pytest.fixture(scope="module")
def exch9_gram(exch9, full9):
    return gram_blocks(exch9, full9)


def test_z_block(exch9):
    g = gram_blocks(exch9, make_error_set(9, "z"))
    for i in range(2):
        for k, l in itertools.product(range(1, 10), repeat=2):
            assert g[(i, i, k, l)] == (4 if k == l else 1)


def test_x_block(exch9):
    g = gram_blocks(exch9, make_error_set(9, "x"))
    for i in range(2):
        for k, l in itertools.product(range(1, 10), repeat=2):
            assert g[(i, i, k, l)] == (4 if k == l else Fraction(3, 2))


def test_yx_cross_entries(exch9):
    errors = make_error_set(9, "x,y")
    g = gram_blocks(exch9, errors)
    ys = [p for p, e in enumerate(errors) if e.axis == "Y"]
    xs = [p for p, e in enumerate(errors) if e.axis == "X"]
    for i, p, q in itertools.product(range(2), ys, xs):
        assert g[(i, i, p, q)] == 0


def test_conjugate_symmetry_and_norm(exch9_gram, exch9):
    W, P = exch9_gram.shape
    for (i, j, p, q), value in exch9_gram.entries.items():
        assert exch9_gram[(j, i, q, p)] == value.conj()
    for i, p in itertools.product(range(W), range(P)):
        assert exch9_gram[(i, i, p, p)] == inner_product(exch9.vectors[i], exch9.vectors[i])


def test_degenerate_pass_and_blocks(exch9_gram):
    report = check_kl(exch9_gram, "degenerate")
    assert report.passed
    dm = report.d_matrix
    assert dm.rank == 28
    assert dm.block_sizes() == [37, 9, 9, 9]
    labels = dm.labels
    block0 = dm.blocks[0]
    assert [labels[p] for p in block0][:2] == ["I", "E_12"]
    assert all(dm.entries[p][q] == 4 for p in block0 for q in block0)
    for block, off in zip(dm.blocks[1:], (Fraction(3, 2), Fraction(3, 2), 1)):
        for p, q in itertools.product(block, repeat=2):
            assert dm.entries[p][q] == (4 if p == q else off)


def test_strict_fails_on_exchange_fixed_words(exch9_gram):
    report = check_kl(exch9_gram, "strict")
    assert not report.passed
    assert report.scale == 4
    labels = exch9_gram.error_labels
    assert any(labels[w.index[2]] == "I" and labels[w.index[3]].startswith("E_") for w in report.witnesses)


def test_strict_passes_for_orthonormal_images():
    rep3 = builtin_code("rep3")
    report = check_kl(gram_blocks(rep3, make_error_set(3, "x")), "strict")
    assert report.passed


def test_strict_fails_for_any_fixing_permutation():
    code = builtin_code("exch9")
    errors = error_set_from_ops(9, [permutation((2, 3, 1, 5, 4, 6, 7, 9, 8))])
    assert not check_kl(gram_blocks(code, errors), "strict").passed


def test_shor_failure(shor9):
    errors = error_set_from_ops(9, [pauli("Z", 7), pauli("Z", 8), pauli("Z", 9), exchange(3, 4)])
    report = check_kl(gram_blocks(shor9, errors), "degenerate")
    assert not report.passed
    labels = errors.labels
    pairs = {(labels[w.index[2]], labels[w.index[3]]) for w in report.witnesses}
    assert ("Z_7", "E_34") in pairs or ("E_34", "Z_7") in pairs
    assert [w.index for w in report.witnesses] == sorted(w.index for w in report.witnesses)
    with pytest.raises(KLConsistencyError):
        d_matrix(gram_blocks(shor9, errors))


def test_float_mode_agrees(exch9, full9, exch9_gram):
    fgram = gram_blocks_float(exch9, full9)
    report = check_kl(fgram, "degenerate")
    assert report.passed
    assert report.d_matrix.rank == 28
    np.testing.assert_allclose(fgram.to_array() * 4, exch9_gram.to_array(), atol=1e-9)


def test_extended_reduces_to_degenerate(exch9, full9):
    labeled = exch9.with_indices([(0, 1), (1, 1)])
    ext = check_kl_extended(labeled, full9)
    base = check_kl(gram_blocks(exch9, full9), "degenerate")
    assert ext.passed and ext.d_matrix.entries == base.d_matrix.entries


def test_extended_counterexample():
    # C_0^1 and C_0^2 are orthogonal, but E_23 maps one onto the other
    words = (
        ("C_0^1", basis_state("0011")),
        ("C_0^2", basis_state("0101")),
        ("C_1^1", basis_state("1100")),
        ("C_1^2", basis_state("1010")),
    )
    code = Code("ext4", 4, 1, words, ((0, 1), (0, 2), (1, 1), (1, 2)))
    errors = make_error_set(4, "identity,exchange")
    report = check_kl_extended(code, errors)
    assert not report.passed
    labels = errors.labels
    assert any(w.index[:2] == (0, 1) and "E_23" in (labels[w.index[2]], labels[w.index[3]]) for w in report.witnesses)
    with pytest.raises(ValueError):
        check_kl_extended(builtin_code("rep3"), make_error_set(3, "x"))


def test_rep3_dmatrix():
    rep3 = builtin_code("rep3")
    errors = make_error_set(3, "x,exchange")
    dm = check_kl(gram_blocks(rep3, errors), "degenerate").d_matrix
    assert dm.rank == 4
    assert dm.block_sizes() == [4, 1, 1, 1]
    assert all(dm.entries[p][q] == 1 for p in dm.blocks[0] for q in dm.blocks[0])


def test_identity_only():
    for code in (builtin_code("rep3"), builtin_code("exch9")):
        errors = make_error_set(code.n, "identity")
        dm = check_kl(gram_blocks(code, errors), "degenerate").d_matrix
        assert dm.rank == 1
        assert span_dimension(code, errors) == 2


def test_span_consistency(exch9, full9, exch9_gram):
    report = span_report(exch9, full9, exch9_gram)
    assert report.span_dimension == report.gram_rank
    assert report.d_rank == 28
    assert any("54" in line for line in report.notes(2))


def test_exact_rank_matches_numeric():
    rng = np.random.default_rng(4)
    for _ in range(20):
        rows, cols, r = 6, 7, int(rng.integers(1, 6))
        a = rng.integers(-3, 4, size=(rows, r)) @ rng.integers(-3, 4, size=(r, cols))
        exact = exact_rank([[ExactScalar(int(x)) for x in row] for row in a])
        assert exact == np.linalg.matrix_rank(a)


def test_general_n_examples():
    assert general_n_identities(9, 3).z_offdiagonal == 0
    assert general_n_identities(9, 3).x_overlap_count == 42
    assert general_n_identities(5, 2).z_offdiagonal == -2
    s = perm_sum_state(5, 2)
    assert inner_product(apply_pauli(s, "Z", 1), apply_pauli(s, "Z", 2)) == -2
    with pytest.raises(ValueError):
        general_n_identities(4, 0)


@pytest.mark.parametrize("n", range(2, 11))
def test_general_n_brute_force(n):
    for w in range(1, n):
        s = perm_sum_state(n, w)
        ident = general_n_identities(n, w)
        assert inner_product(apply_pauli(s, "Z", 1), apply_pauli(s, "Z", 2)) == ident.z_offdiagonal
        x1, x2 = apply_pauli(s, "X", 1), apply_pauli(s, "X", 2)
        assert inner_product(x1, x2) == ident.x_overlap_count
        assert len(set(x1) & set(x2)) == ident.x_overlap_count


def test_gram_rank_small():
    code = builtin_code("rep3")
    errors = make_error_set(3, "pauli")
    g = gram_blocks(code, errors)
    assert gram_rank(g) == span_dimension(code, errors)
