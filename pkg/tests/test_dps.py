from itertools import combinations

import numpy as np
import pytest

from hybeam import (MappingSets, approximation_residual, dps_full_solve,
                    dps_partial_solve, dps_phase_split,
                    dynamic_mapping_greedy, dynamic_mapping_kmeans,
                    mapping_objective)
from hybeam.dps import _phase_split_matrix


def random_matrix(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def two_set_partitions(n):
    """All unordered splits of range(n) into two nonempty sets."""
    items = list(range(n))
    for size in range(1, n // 2 + 1):
        for left in combinations(items, size):
            right = tuple(i for i in items if i not in left)
            if size == n - size and left[0] != 0:
                continue  # avoid double-counting equal halves
            yield np.array(left), np.array(right)


def test_two_set_partition_count_is_31():
    assert sum(1 for _ in two_set_partitions(6)) == 31


# ---------------------------------------------------------------------------
# Closed-form fully-connected solver
# ---------------------------------------------------------------------------

def test_full_solve_exact_when_rank_small():
    rng = np.random.default_rng(0)
    for n_rf in (1, 2, 4):
        low = random_matrix(rng, 16, n_rf) @ random_matrix(rng, n_rf, 6)
        pair = dps_full_solve(low, n_rf)
        pair.analog.validate()
        assert approximation_residual(low, pair) <= 1e-9 * np.linalg.norm(low)


def test_full_solve_residual_is_tail_energy():
    # Oracle: singular values via the eigendecomposition of F^H F.
    rng = np.random.default_rng(1)
    f_opt = random_matrix(rng, 16, 24)
    pair = dps_full_solve(f_opt, 4)
    res_sq = approximation_residual(f_opt, pair) ** 2
    eigs = np.sort(np.linalg.eigvalsh(f_opt.conj().T @ f_opt))[::-1]
    tail = np.sum(eigs[4:])
    assert abs(res_sq - tail) <= 1e-8 * tail


def test_full_solve_entries_within_modulus_two():
    rng = np.random.default_rng(2)
    pair = dps_full_solve(random_matrix(rng, 12, 8), 3)
    mags = np.abs(pair.analog.matrix)
    assert mags.max() <= 2.0 + 1e-12
    # Scale freedom is pushed into the digital matrix: column peaks hit 2.
    assert np.allclose(mags.max(axis=0), 2.0)


# ---------------------------------------------------------------------------
# Phase splitting
# ---------------------------------------------------------------------------

def test_phase_split_examples():
    assert dps_phase_split(2.0) == (0.0, 0.0)
    phi, theta = dps_phase_split(0.0)
    assert (phi, theta) == (np.pi / 2, -np.pi / 2)
    assert abs(np.exp(1j * phi) + np.exp(1j * theta)) < 1e-12
    a = 1.0 + 1.0j
    phi, theta = dps_phase_split(a)
    assert abs(np.exp(1j * phi) + np.exp(1j * theta) - a) <= 1e-12


def test_phase_split_rejects_large_modulus():
    with pytest.raises(ValueError):
        dps_phase_split(2.0 + 1e-6)
    # Floating-point spill just above 2 is clamped, not rejected.
    dps_phase_split(2.0 + 1e-13)


def test_phase_split_roundtrip_many_samples():
    rng = np.random.default_rng(3)
    n = 1_000_000
    mags = 2.0 * np.sqrt(rng.random(n))
    angles = 2.0 * np.pi * rng.random(n)
    a = mags * np.exp(1j * angles)
    phi, theta = _phase_split_matrix(a)
    err = np.abs(np.exp(1j * phi) + np.exp(1j * theta) - a)
    assert err.max() <= 1e-12


# ---------------------------------------------------------------------------
# Partially-connected eigensolver
# ---------------------------------------------------------------------------

def test_partial_solve_parallel_rows_residual_zero():
    rng = np.random.default_rng(4)
    direction = random_matrix(rng, 1, 6)
    f_opt = np.vstack([c * direction for c in (1.0, 0.5j, -0.3, 1.2 + 0.1j)])
    pair = dps_partial_solve(f_opt, MappingSets((np.arange(4),)))
    assert approximation_residual(f_opt, pair) <= 1e-9


def test_partial_solve_single_antenna_groups_exact():
    rng = np.random.default_rng(5)
    f_opt = random_matrix(rng, 4, 6)
    mapping = MappingSets(tuple(np.array([i]) for i in range(4)))
    pair = dps_partial_solve(f_opt, mapping)
    assert approximation_residual(f_opt, pair) <= 1e-9 * np.linalg.norm(f_opt)


def test_partial_solve_matches_eigenvalue_oracle():
    # Oracle: independent eigendecomposition of the accumulated outer
    # products, residual^2 = sum ||y||^2 - lambda_1 per group.
    rng = np.random.default_rng(6)
    f_opt = random_matrix(rng, 8, 5)
    mapping = MappingSets((np.arange(4), np.arange(4, 8)))
    pair = dps_partial_solve(f_opt, mapping)
    expected = 0.0
    for rows in mapping.sets:
        outer = np.zeros((5, 5), dtype=complex)
        for i in rows:
            y = f_opt[i][:, None]
            outer += y @ y.conj().T
        lam = np.linalg.eigvalsh(outer)[-1]
        expected += np.linalg.norm(f_opt[rows]) ** 2 - lam
    res_sq = approximation_residual(f_opt, pair) ** 2
    assert abs(res_sq - expected) <= 1e-8 * max(expected, 1e-12)


def test_partial_solve_invariant_to_row_order_within_group():
    rng = np.random.default_rng(7)
    f_opt = random_matrix(rng, 8, 5)
    a = dps_partial_solve(f_opt, MappingSets((np.arange(4), np.arange(4, 8))))
    shuffled = MappingSets((np.array([2, 0, 3, 1]), np.array([7, 5, 4, 6])))
    b = dps_partial_solve(f_opt, shuffled)
    assert abs(approximation_residual(f_opt, a)
               - approximation_residual(f_opt, b)) <= 1e-10


def test_partial_solve_rejects_bad_mapping():
    with pytest.raises(ValueError):
        MappingSets((np.array([0, 1]), np.array([1, 2])))
    with pytest.raises(ValueError):
        MappingSets((np.array([0, 1]), np.array([], dtype=int)))


# ---------------------------------------------------------------------------
# Dynamic mapping
# ---------------------------------------------------------------------------

def test_greedy_recovers_orthogonal_bundles():
    rng = np.random.default_rng(8)
    q, _ = np.linalg.qr(random_matrix(rng, 6, 2))
    rows = []
    for i in range(6):
        bundle = i % 2
        rows.append((1.0 + 0.2 * i) * q[:, bundle].conj())
    f_opt = np.array(rows)
    mapping = dynamic_mapping_greedy(f_opt, 2)
    groups = {tuple(sorted(s)) for s in mapping.sets}
    assert groups == {(0, 2, 4), (1, 3, 5)}
    energies = sum(np.linalg.norm(f_opt[s]) ** 2 for s in mapping.sets)
    assert abs(mapping_objective(f_opt, mapping) - energies) <= 1e-9


def test_greedy_against_exhaustive_and_fixed():
    rng = np.random.default_rng(9)
    gaps = []
    for _ in range(100):
        f_opt = random_matrix(rng, 6, 3)
        greedy = mapping_objective(f_opt, dynamic_mapping_greedy(f_opt, 2))
        fixed = mapping_objective(f_opt, MappingSets.contiguous(6, 2))
        best = max(mapping_objective(f_opt, MappingSets((a, b)))
                   for a, b in two_set_partitions(6))
        assert greedy >= fixed - 1e-12
        assert greedy <= best + 1e-9
        gaps.append((best - greedy) / best)
    print(f"\ngreedy mean optimality gap: {np.mean(gaps):.4%}")


def test_kmeans_objective_nondecreasing_in_sweeps():
    rng = np.random.default_rng(10)
    for _ in range(10):
        f_opt = random_matrix(rng, 10, 4)
        trace = []
        dynamic_mapping_kmeans(f_opt, 3, init=MappingSets.contiguous(10, 3),
                               trace=trace)
        assert len(trace) >= 2
        assert all(b >= a - 1e-10 for a, b in zip(trace, trace[1:]))


def test_kmeans_converged_partition_is_fixed_point():
    rng = np.random.default_rng(11)
    f_opt = random_matrix(rng, 8, 3)
    settled = dynamic_mapping_kmeans(f_opt, 2)
    again = dynamic_mapping_kmeans(f_opt, 2, init=settled)
    assert [tuple(s) for s in again.sets] == [tuple(s) for s in settled.sets]


def test_kmeans_matches_exhaustive_most_of_the_time():
    rng = np.random.default_rng(12)
    hits = 0
    for _ in range(100):
        f_opt = random_matrix(rng, 6, 3)
        km = mapping_objective(f_opt, dynamic_mapping_kmeans(f_opt, 2))
        best = max(mapping_objective(f_opt, MappingSets((a, b)))
                   for a, b in two_set_partitions(6))
        if km >= best - 1e-9:
            hits += 1
    print(f"\nkmeans matches exhaustive optimum on {hits}/100 instances")
    assert hits >= 80


def test_mapping_objective_invariant_to_right_unitary():
    rng = np.random.default_rng(13)
    f_opt = random_matrix(rng, 8, 4)
    q, _ = np.linalg.qr(random_matrix(rng, 4, 4))
    mapping = dynamic_mapping_greedy(f_opt, 2)
    a = mapping_objective(f_opt, mapping)
    b = mapping_objective(f_opt @ q, mapping)
    assert abs(a - b) <= 1e-9 * max(a, 1.0)
