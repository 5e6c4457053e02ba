"""Gram matrices of kernel powers and the violation search."""

import numpy as np
import pytest

import wallachkit as wk
from wallachkit.gram import BranchError, min_gram_eigenvalue


def test_single_point_positive():
    dom = wk.catalog("CH", 1)
    h, ok = wk.gram_matrix(dom, 1.3, [np.array([0.4 + 0.1j])])
    assert ok
    assert h.shape == (1, 1)
    assert h[0, 0].real > 0 and h[0, 0].imag == 0


def test_lambda_zero_all_ones():
    dom = wk.catalog("I", 2, 2)
    pts = wk.sample_points(dom, 4, 0, 0.6)
    h, _ = wk.gram_matrix(dom, 0.0, pts)
    assert np.allclose(h, np.ones((4, 4)))
    vals = np.linalg.eigvalsh(h)
    assert vals[-1] == pytest.approx(4.0) and abs(vals[0]) <= 1e-14


def test_unit_disk_hand_matrix():
    dom = wk.catalog("CH", 1)
    pts = [np.array([0j]), np.array([0.5 + 0j])]
    h, ok = wk.gram_matrix(dom, 1.0, pts)
    assert ok
    expected = np.array([[1.0, 1.0], [1.0, 4.0 / 3.0]])
    assert np.allclose(h, expected, atol=1e-14)
    assert np.linalg.eigvalsh(h)[0] > 0


def test_hermitian_exact():
    dom = wk.catalog("III", 2)
    pts = wk.sample_points(dom, 5, 1, 0.6)
    h, _ = wk.gram_matrix(dom, 0.7, pts)
    assert np.array_equal(h, h.conj().T)


def test_diagonal_at_least_one():
    dom = wk.catalog("IV", 4)
    pts = wk.sample_points(dom, 6, 2, 0.7)
    h, _ = wk.gram_matrix(dom, 1.2, pts)
    assert np.all(np.diag(h).real >= 1.0 - 1e-14)


def test_common_phase_invariance():
    dom = wk.catalog("I", 2, 2)
    pts = wk.sample_points(dom, 4, 3, 0.6)
    h0, _ = wk.gram_matrix(dom, 0.8, pts)
    ph = np.exp(0.9j)
    h1, _ = wk.gram_matrix(dom, 0.8, [ph * p for p in pts])
    assert np.max(np.abs(h0 - h1)) <= 1e-12


def test_branch_flag_on_wild_pair():
    # diagonal points tuned so det(I - Z W*) has negative real part
    dom = wk.catalog("I", 2, 2)
    a = 0.975 * np.exp(1j * np.pi / 6)
    b = 0.975 * np.exp(-1j * np.pi / 6)
    za = np.array([a, 0, 0, a])
    zb = np.array([b, 0, 0, b])
    assert wk.contains(dom, za) and wk.contains(dom, zb)
    with pytest.raises(BranchError):
        wk.gram_matrix(dom, 0.5, [za, zb])
    _, ok = wk.gram_matrix(dom, 0.5, [za, zb], require_branch=False)
    assert not ok


def test_search_finds_witness_in_gap():
    dom = wk.catalog("I", 2, 2)
    res = wk.search_violation(dom, 0.5, budget=2000, seed=1)
    assert res.found
    assert res.report.min_eigenvalue < -1e-6
    assert not res.report.psd
    assert res.report.branch_ok
    assert res.evals_used <= 2000


def test_search_agrees_with_block_verdict():
    # a found witness must be matched by a non-PSD truncated verdict
    dom = wk.catalog("III", 2)
    res = wk.search_violation(dom, 0.25, budget=2000, seed=1)
    assert res.found
    assert not wk.psd_verdict(wk.calabi_matrix(dom, 0.25, 4)).psd


def test_search_empty_handed_in_continuous_part():
    dom = wk.catalog("I", 2, 2)
    res = wk.search_violation(dom, 1.5, budget=1000, seed=1)
    assert not res.found
    assert res.report is None


def test_search_empty_handed_rank_one():
    dom = wk.catalog("CH", 2)
    res = wk.search_violation(dom, 0.3, budget=300, seed=4)
    assert not res.found


def test_search_deterministic():
    dom = wk.catalog("I", 2, 2)
    a = wk.search_violation(dom, 0.5, budget=500, seed=7)
    b = wk.search_violation(dom, 0.5, budget=500, seed=7)
    assert a.found == b.found
    assert a.report.min_eigenvalue == b.report.min_eigenvalue
    for p, q in zip(a.report.points, b.report.points):
        assert np.array_equal(p, q)


def test_search_thread_count_does_not_change_result():
    dom = wk.catalog("I", 2, 2)
    seq = wk.search_violation(dom, 0.5, budget=1000, seed=9, threads=1)
    par = wk.search_violation(dom, 0.5, budget=1000, seed=9, threads=4)
    assert seq.found == par.found
    assert seq.report.min_eigenvalue == par.report.min_eigenvalue


def test_search_argument_validation():
    dom = wk.catalog("I", 2, 2)
    with pytest.raises(ValueError):
        wk.search_violation(dom, 0.5, n_points=1)
    with pytest.raises(ValueError):
        wk.search_violation(dom, 0.5, budget=0)


def test_witness_minimization_keeps_at_least_two_points():
    dom = wk.catalog("I", 2, 2)
    res = wk.search_violation(dom, 0.5, budget=2000, seed=2)
    assert res.found
    assert 2 <= len(res.report.points) <= 6


def test_witness_payload_schema_and_replay():
    dom = wk.catalog("I", 2, 2)
    res = wk.search_violation(dom, 0.5, budget=2000, seed=3)
    payload = wk.witness_payload(dom, res)
    assert set(payload) == {"domain", "lambda", "points", "min_eig", "seed"}
    assert payload["domain"] == "I:2,2"
    assert payload["seed"] == 3
    for point in payload["points"]:
        assert all(len(pair) == 2 for pair in point)
    dom2, report, drift = wk.replay_witness(payload)
    assert dom2.spec_string == "I:2,2"
    assert drift <= 1e-12
    assert report.min_eigenvalue < -1e-6


def test_witness_payload_requires_success():
    dom = wk.catalog("I", 2, 2)
    res = wk.search_violation(dom, 1.5, budget=200, seed=1)
    with pytest.raises(ValueError):
        wk.witness_payload(dom, res)


def test_structured_proposals_skip_psd_blocks():
    # at a Wallach point the degree-2 guidance must be absent
    from wallachkit.gram import _quadratic_atoms

    dom = wk.catalog("I", 2, 2)
    assert _quadratic_atoms(dom, 1.0) is None
    assert _quadratic_atoms(dom, 1.5) is None
    atoms = _quadratic_atoms(dom, 0.5)
    assert atoms is not None
    pairs = {(i, j) for i, j, _ in atoms}
    assert pairs == {(0, 3), (1, 2)}  # the determinant direction


def test_min_gram_eigenvalue_consistent_with_report():
    dom = wk.catalog("IV", 3)
    pts = wk.sample_points(dom, 5, 11, 0.6)
    val, ok = min_gram_eigenvalue(dom, 2.0, pts)
    rep = wk.gram_report(dom, 2.0, pts)
    assert rep.min_eigenvalue == val
    assert rep.psd == (val >= -1e-6)
    assert rep.branch_ok == ok
