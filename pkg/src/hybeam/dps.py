"""Double-phase-shifter analog network design under |F_RF(i,j)| <= 2.

Every nonzero analog entry is the sum of two unit-modulus phase-shifter
outputs, which makes the feasible set convex. The fully-connected design
reduces to a truncated SVD (globally optimal, Eckart-Young); the
partially-connected design decouples into one principal-eigenvector
problem per RF chain; dynamic mapping optimizes which antennas attach to
which chain.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .core import BeamformerPair, dps_network, partition_indices

__all__ = [
    "MappingSets",
    "dps_phase_split",
    "dps_full_solve",
    "dps_partial_solve",
    "mapping_objective",
    "dynamic_mapping_greedy",
    "dynamic_mapping_kmeans",
]


@dataclass(frozen=True)
class MappingSets:
    """Disjoint antenna index sets, one per RF chain, covering range(N_t)."""

    sets: Tuple[np.ndarray, ...]

    def __post_init__(self):
        sets = tuple(np.asarray(s, dtype=int) for s in self.sets)
        if not sets:
            raise ValueError("mapping needs at least one set")
        seen = np.concatenate(sets) if sets else np.array([], dtype=int)
        n = seen.size
        for s in sets:
            if s.size == 0:
                raise ValueError("mapping sets must be nonempty")
        if np.unique(seen).size != n or seen.min() != 0 or seen.max() != n - 1:
            raise ValueError("mapping sets must partition range(N_t)")
        object.__setattr__(self, "sets", sets)

    @property
    def n_rf(self) -> int:
        return len(self.sets)

    @property
    def n_t(self) -> int:
        return sum(s.size for s in self.sets)

    @classmethod
    def contiguous(cls, n_t: int, n_rf: int) -> "MappingSets":
        """Fixed mapping: contiguous near-equal antenna groups."""
        return cls(tuple(partition_indices(n_t, n_rf)))

    def chain_of(self) -> np.ndarray:
        out = np.empty(self.n_t, dtype=int)
        for j, s in enumerate(self.sets):
            out[s] = j
        return out


def dps_phase_split(a: complex) -> Tuple[float, float]:
    """Split a complex gain with |a| <= 2 into two unit-modulus phases.

    Returns (phi, theta) with e^{j phi} + e^{j theta} = a. The angle
    convention for a = 0 is 0, giving the cancelling pair (pi/2, -pi/2).
    """
    mag = abs(a)
    if mag > 2.0 + 1e-12:
        raise ValueError(f"cannot split modulus {mag} > 2")
    half = np.arccos(min(mag / 2.0, 1.0))
    ang = np.angle(a) if mag > 0 else 0.0
    return float(ang + half), float(ang - half)


def _phase_split_matrix(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mag = np.abs(a)
    if mag.size and mag.max() > 2.0 + 1e-12:
        raise ValueError("cannot split modulus > 2")
    half = np.arccos(np.minimum(mag / 2.0, 1.0))
    ang = np.where(mag > 0, np.angle(a), 0.0)
    return ang + half, ang - half


def dps_full_solve(f_opt: np.ndarray, n_rf: int) -> BeamformerPair:
    """Closed-form fully-connected DPS design via rank truncation.

    The product equals the best rank-n_rf approximation of F_opt, so the
    residual squared is the tail singular-value energy. Column scales move
    into the digital matrix so the analog entries stay within modulus 2
    (the column maximum sits exactly at 2).
    """
    u, s, vh = np.linalg.svd(f_opt, full_matrices=False)
    r = min(n_rf, s.size)
    u1 = u[:, :r]
    if r < n_rf:
        pad = np.zeros((f_opt.shape[0], n_rf - r), dtype=complex)
        pad[:n_rf - r, :] = np.eye(n_rf - r)
        u1 = np.hstack([u1, pad])
    col_max = np.abs(u1).max(axis=0)
    col_max = np.where(col_max > 0, col_max, 1.0)
    scale = 2.0 / col_max
    analog_entries = u1 * scale[None, :]
    digital = np.zeros((n_rf, f_opt.shape[1]), dtype=complex)
    digital[:r] = (s[:r, None] * vh[:r]) / scale[:r, None]

    ph_a, ph_b = _phase_split_matrix(analog_entries)
    analog = dps_network(ph_a, ph_b)
    return BeamformerPair(analog=analog, digital=digital, info={
        "iterations": 1,
        "objective": float(np.sqrt(max(np.sum(s[r:] ** 2), 0.0))),
    })


def dps_partial_solve(f_opt: np.ndarray,
                      mapping: Optional[MappingSets] = None,
                      n_rf: Optional[int] = None) -> BeamformerPair:
    """Partially-connected DPS design, one eigenproblem per RF chain.

    For chain j with antenna set D_j, the digital row is the principal
    eigenvector of sum_{i in D_j} y_i y_i^H and the analog gains are the
    per-row projections a_i = x^H y_i. A per-group rescaling keeps
    max |a_i| <= 2 by moving magnitude into the digital row.
    """
    n_t = f_opt.shape[0]
    if mapping is None:
        if n_rf is None:
            raise ValueError("pass a mapping or an RF chain count")
        mapping = MappingSets.contiguous(n_t, n_rf)
    if mapping.n_t != n_t:
        raise ValueError("mapping does not cover the target rows")
    n_rf = mapping.n_rf

    gains = np.zeros((n_t, n_rf), dtype=complex)
    digital = np.zeros((n_rf, f_opt.shape[1]), dtype=complex)
    residual_sq = 0.0
    for j, rows in enumerate(mapping.sets):
        block = f_opt[rows]
        _, s, vh = np.linalg.svd(block, full_matrices=False)
        # vh[0] is the principal eigenvector of sum y_i y_i^H written as an
        # array; a[i] * vh[0] is the rank-one fit of block row i.
        a = block @ np.conj(vh[0])
        peak = np.abs(a).max()
        shrink = min(1.0, 2.0 / peak) if peak > 0 else 1.0
        gains[rows, j] = a * shrink
        digital[j] = vh[0] / shrink
        residual_sq += float(np.sum(s[1:] ** 2))

    mask = np.zeros((n_t, n_rf), dtype=bool)
    for j, rows in enumerate(mapping.sets):
        mask[rows, j] = True
    ph_a, ph_b = _phase_split_matrix(np.where(mask, gains, 0.0))
    analog = dps_network(ph_a, ph_b, mask)
    return BeamformerPair(analog=analog, digital=digital, info={
        "iterations": 1,
        "objective": float(np.sqrt(max(residual_sq, 0.0))),
        "mapping": mapping,
    })


def _lambda1(rows: np.ndarray) -> float:
    """Largest eigenvalue of sum_i y_i y_i^H for a block of target rows."""
    if rows.shape[0] == 0:
        return 0.0
    s = np.linalg.svd(rows, compute_uv=False)
    return float(s[0] ** 2)


def mapping_objective(f_opt: np.ndarray, mapping: MappingSets) -> float:
    """Dynamic-mapping objective: sum over chains of lambda_1(sum y y^H)."""
    return sum(_lambda1(f_opt[s]) for s in mapping.sets)


def dynamic_mapping_greedy(f_opt: np.ndarray, n_rf: int) -> MappingSets:
    """Greedy antenna-to-chain assignment maximizing the sum of top
    eigenvalues.

    The n_rf largest-norm rows seed one set each; remaining rows are
    assigned in descending norm order to the set with the largest objective
    gain (ties to the lowest set index). Falls back to the fixed contiguous
    mapping if greedy ever scores below it.
    """
    n_t = f_opt.shape[0]
    if n_t < n_rf:
        raise ValueError("need at least one antenna per RF chain")
    norms = np.linalg.norm(f_opt, axis=1)
    order = np.argsort(-norms, kind="stable")
    members: List[List[int]] = [[int(order[j])] for j in range(n_rf)]
    values = [_lambda1(f_opt[m]) for m in members]
    for i in order[n_rf:]:
        gains = [_lambda1(f_opt[m + [int(i)]]) - v
                 for m, v in zip(members, values)]
        best = int(np.argmax(gains))
        members[best].append(int(i))
        values[best] += gains[best]

    greedy = MappingSets(tuple(np.sort(np.array(m)) for m in members))
    fixed = MappingSets.contiguous(n_t, n_rf)
    if mapping_objective(f_opt, greedy) < mapping_objective(f_opt, fixed):
        return fixed
    return greedy


def dynamic_mapping_kmeans(f_opt: np.ndarray, n_rf: int,
                           max_sweeps: int = 50,
                           init: Optional[MappingSets] = None,
                           trace: Optional[List[float]] = None) -> MappingSets:
    """Lloyd-style refinement with principal-eigenvector centroids.

    Each sweep recomputes the centroid of every set as the principal
    eigenvector of its rows' outer-product sum, then reassigns each row to
    the centroid maximizing |y^H x|^2 (ties to the lowest index); empty
    sets are refilled with the worst-fitting row, which never decreases
    the objective. Once the sweeps settle, single-row moves that improve
    the exact objective are applied until none remain, so the result is
    locally optimal under individual reassignments. Starts from the greedy
    mapping unless given; ``trace`` collects the objective after every
    sweep and move pass (non-decreasing).
    """
    n_t = f_opt.shape[0]
    if init is None:
        init = dynamic_mapping_greedy(f_opt, n_rf)
    assign = init.chain_of()

    def record():
        if trace is not None:
            trace.append(sum(_lambda1(f_opt[assign == j])
                             for j in range(n_rf)))

    record()
    budget = max_sweeps
    while budget > 0:
        budget -= 1
        centroids = np.zeros((n_rf, f_opt.shape[1]), dtype=complex)
        for j in range(n_rf):
            rows = f_opt[assign == j]
            if rows.shape[0] == 0:
                continue
            _, _, vh = np.linalg.svd(rows, full_matrices=False)
            centroids[j] = vh[0]
        fit = np.abs(f_opt @ np.conj(centroids.T)) ** 2
        new_assign = np.argmax(fit, axis=1)
        # Refill empty sets with the row fitting its own set worst.
        for j in range(n_rf):
            if np.any(new_assign == j):
                continue
            own_fit = fit[np.arange(n_t), new_assign]
            donors = np.array([i for i in range(n_t)
                               if np.sum(new_assign == new_assign[i]) > 1])
            worst = donors[np.argmin(own_fit[donors])]
            new_assign[worst] = j
        settled = np.array_equal(new_assign, assign)
        assign = new_assign
        record()
        if settled:
            break

    indices = np.arange(n_t)
    values = [_lambda1(f_opt[assign == j]) for j in range(n_rf)]
    while budget > 0:
        budget -= 1
        moved = False
        for i in range(n_t):
            src = assign[i]
            if np.sum(assign == src) <= 1:
                continue
            without = _lambda1(f_opt[(assign == src) & (indices != i)])
            best_gain, best_j, best_with = 1e-12, -1, 0.0
            for j in range(n_rf):
                if j == src:
                    continue
                with_row = _lambda1(
                    f_opt[(assign == j) | (indices == i)])
                gain = (without + with_row) - (values[src] + values[j])
                if gain > best_gain:
                    best_gain, best_j, best_with = gain, j, with_row
            if best_j >= 0:
                assign[i] = best_j
                values[src] = without
                values[best_j] = best_with
                moved = True
        record()
        if not moved:
            break

    sets = tuple(np.flatnonzero(assign == j) for j in range(n_rf))
    return MappingSets(sets)
