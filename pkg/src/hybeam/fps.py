"""Fixed-phase-shifter analog network: a bank of N_c fixed phases feeding a
binary switch network.

The analog matrix factors as S @ C where S is binary (N_t x N_c*N_RF) and C
repeats the normalized phase vector block-diagonally per RF chain. Design
alternates a least-squares digital step with per-row switch updates: each
antenna row is a small binary quadratic program, solved exhaustively when
its width N_c*N_RF is small and by bit-flip local search from a thresholded
relaxation otherwise.
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Union

import numpy as np

from .channels import ChannelSet
from .core import (BeamformerPair, HybridConfig, PhaseBank, SwitchMatrix,
                   combiner_targets, fps_network, fully_digital_beamformer,
                   mapping_mask, partition_indices, power_normalize,
                   spectral_efficiency)
from .sps import AltMinOptions

__all__ = [
    "FpsProblem",
    "fps_bank_default",
    "fps_altmin",
    "fps_saturation_sweep",
    "EXHAUSTIVE_WIDTH",
]

# Row widths up to this are solved by exhaustive pattern search.
EXHAUSTIVE_WIDTH = 14


def fps_bank_default(n_c: int) -> PhaseBank:
    """Uniform phase grid theta_i = 2*pi*(i-1)/n_c."""
    if n_c < 1:
        raise ValueError("n_c must be >= 1")
    return PhaseBank(2.0 * np.pi * np.arange(n_c) / n_c)


@dataclass(frozen=True)
class FpsProblem:
    """Switch-design instance: target, phase bank, chain count, mapping."""

    target: np.ndarray
    bank: PhaseBank
    n_rf: int
    groups: int = 1

    def __post_init__(self):
        if self.n_rf < 1:
            raise ValueError("n_rf must be >= 1")
        if self.groups < 1 or self.n_rf % self.groups \
                or self.target.shape[0] % self.groups:
            raise ValueError("groups must divide n_t and n_rf")


def _all_patterns(width: int) -> np.ndarray:
    codes = np.arange(1 << width, dtype=np.int64)[:, None]
    return ((codes >> np.arange(width)[None, :]) & 1).astype(np.int8)


def _exhaustive_rows(gram: np.ndarray, corr: np.ndarray) -> np.ndarray:
    """Optimal binary rows: argmin over every pattern, shared pattern table.

    corr has shape (width, n_rows); returns (n_rows, width) bits.
    """
    width = gram.shape[0]
    patterns = _all_patterns(width)
    quad = np.einsum("pw,wv,pv->p", patterns, gram, patterns)
    scores = quad[:, None] - 2.0 * (patterns @ corr)
    best = np.argmin(scores, axis=0)
    return patterns[best]


def _greedy_row(gram: np.ndarray, b: np.ndarray, start: np.ndarray,
                max_flips: int) -> np.ndarray:
    """Bit-flip descent on s A s^T - 2 s.b from a given start pattern."""
    s = start.astype(np.float64)
    v = gram @ s
    diag = np.diag(gram)
    for _ in range(max_flips):
        sign = 1.0 - 2.0 * s
        delta = sign * (2.0 * v - 2.0 * b) + diag
        k = int(np.argmin(delta))
        if delta[k] >= -1e-12:
            break
        v += sign[k] * gram[:, k]
        s[k] = 1.0 - s[k]
    return s.astype(np.int8)


# Rounding thresholds for the relaxed start; the infinities give the
# all-ones and all-zero starts (pure deletion / pure constructive greedy).
_GREEDY_THRESHOLDS = (-np.inf, 0.25, 0.5, 0.75, np.inf)


def _greedy_rows(gram: np.ndarray, corr: np.ndarray,
                 ridge: float = 1e-9) -> np.ndarray:
    """Local-search rows seeded by thresholding the real-relaxed LS solution.

    Each row runs bit-flip descent from every threshold's rounding and
    keeps the best endpoint.
    """
    width = gram.shape[0]
    reg = gram + (1e-12 + ridge * np.trace(gram) / max(width, 1)) \
        * np.eye(width)
    relaxed = np.linalg.solve(reg, corr)
    out = np.empty((corr.shape[1], width), dtype=np.int8)
    for i in range(corr.shape[1]):
        b = corr[:, i]
        best, best_cost = None, np.inf
        for threshold in _GREEDY_THRESHOLDS:
            start = (relaxed[:, i] > threshold).astype(np.int8)
            s = _greedy_row(gram, b, start, max_flips=4 * width)
            cost = float(s @ gram @ s - 2.0 * s @ b)
            if cost < best_cost:
                best, best_cost = s, cost
        out[i] = best
    return out


def _row_costs(bits: np.ndarray, gram: np.ndarray, corr: np.ndarray) -> np.ndarray:
    """Per-row value of s A s^T - 2 s.b (constant term dropped)."""
    s = bits.astype(np.float64)
    return np.einsum("iw,wv,iv->i", s, gram, s) - 2.0 * np.sum(s * corr.T, axis=1)


def _switch_step(f_opt: np.ndarray, g: np.ndarray, allowed: List,
                 current: np.ndarray) -> np.ndarray:
    """Update every switch row against G = C F_BB, honoring the group mask.

    Never worse than ``current``: the exhaustive branch returns the row
    optimum, and local-search rows are kept only when they beat the
    incumbent row.
    """
    n_t = f_opt.shape[0]
    width = g.shape[0]
    bits = np.zeros((n_t, width), dtype=np.int8)
    gram_full = np.real(g @ g.conj().T)
    corr_full = np.real(g @ f_opt.conj().T)
    for rows, cols in allowed:
        gram = gram_full[np.ix_(cols, cols)]
        corr = corr_full[np.ix_(cols, rows)]
        if cols.size <= EXHAUSTIVE_WIDTH:
            sub = _exhaustive_rows(gram, corr)
        else:
            sub = _greedy_rows(gram, corr)
            incumbent = current[np.ix_(rows, cols)]
            worse = _row_costs(sub, gram, corr) > _row_costs(incumbent, gram,
                                                             corr)
            sub[worse] = incumbent[worse]
        bits[np.ix_(rows, cols)] = sub
    return bits


def _allowed_blocks(problem: FpsProblem) -> List:
    """(antenna rows, switch columns) pairs per group of the mapping."""
    n_t, n_rf, n_c = problem.target.shape[0], problem.n_rf, problem.bank.n_c
    rows = partition_indices(n_t, problem.groups)
    chains = partition_indices(n_rf, problem.groups)
    blocks = []
    for r, ch in zip(rows, chains):
        cols = np.concatenate([np.arange(j * n_c, (j + 1) * n_c) for j in ch])
        blocks.append((r, cols))
    return blocks


def fps_altmin(problem: FpsProblem,
               opts: Optional[AltMinOptions] = None) -> BeamformerPair:
    """Alternating switch/digital design for the FPS analog network.

    The digital step is exact least squares given S; the switch step solves
    each row's binary quadratic program (exhaustively up to width 14,
    bit-flip local search above). The objective trace is non-increasing
    across half-steps. Output is power-normalized.
    """
    opts = opts or AltMinOptions()
    f_opt = problem.target
    n_t = f_opt.shape[0]
    c = problem.bank.matrix(problem.n_rf)
    width = c.shape[0]
    blocks = _allowed_blocks(problem)

    rng = np.random.default_rng(opts.seed)
    bits = np.zeros((n_t, width), dtype=np.int8)
    for rows, cols in blocks:
        sub = rng.integers(0, 2, size=(rows.size, cols.size))
        dark = ~sub.any(axis=1)
        sub[dark, rng.integers(0, cols.size, size=int(dark.sum()))] = 1
        bits[np.ix_(rows, cols)] = sub

    def objective(s_bits, f_bb):
        return float(np.linalg.norm(f_opt - (s_bits @ c) @ f_bb))

    f_bb = np.linalg.lstsq(bits @ c, f_opt, rcond=None)[0]
    obj = objective(bits, f_bb)
    trace = [obj]
    for _ in range(opts.max_outer):
        g = c @ f_bb
        bits = _switch_step(f_opt, g, blocks, bits)
        if not bits.any():
            # Every row went dark; force the single best bit per row.
            gram = np.real(g @ g.conj().T)
            corr = np.real(g @ f_opt.conj().T)
            for rows, cols in blocks:
                single = np.diag(gram)[cols][:, None] - 2.0 * corr[np.ix_(cols, rows)]
                bits[rows, cols[np.argmin(single, axis=0)]] = 1
        trace.append(objective(bits, f_bb))
        f_bb = np.linalg.lstsq(bits @ c, f_opt, rcond=None)[0]
        new_obj = objective(bits, f_bb)
        trace.append(new_obj)
        if obj - new_obj < opts.tol * max(obj, 1e-30):
            obj = new_obj
            break
        obj = new_obj

    mask = mapping_mask(n_t, problem.n_rf, problem.groups)
    analog = fps_network(SwitchMatrix(bits), problem.bank, mask)
    pair = BeamformerPair(analog=analog, digital=f_bb, info={
        "objective_trace": trace,
        "objective": trace[-1],
        "iterations": (len(trace) - 1) // 2,
    })
    return power_normalize(pair)


def fps_saturation_sweep(channels: Union[ChannelSet, Sequence[ChannelSet]],
                         config: HybridConfig, n_c_list: Sequence[int],
                         snr_db: float = 0.0,
                         opts: Optional[AltMinOptions] = None) -> np.ndarray:
    """Mean spectral efficiency as the phase-bank size grows.

    Runs the FPS design (transmit and per-user combiners) for every bank
    size over the given channel realizations; paired across sizes because
    each realization is reused. ``n_c_list`` must be sorted ascending.
    """
    sizes = list(n_c_list)
    if sizes != sorted(sizes):
        raise ValueError("n_c list must be sorted ascending")
    if isinstance(channels, ChannelSet):
        channels = [channels]
    opts = opts or AltMinOptions()

    means = np.zeros(len(sizes))
    for chan in channels:
        f_opt = fully_digital_beamformer(chan, config)
        for idx, n_c in enumerate(sizes):
            bank = fps_bank_default(n_c)
            tx = fps_altmin(FpsProblem(f_opt, bank, config.n_rf_t,
                                       config.groups), opts)
            rx_view = config.receiver_view()
            combiners = []
            for k, w_opt in enumerate(combiner_targets(chan, tx.product,
                                                       config)):
                rx_opts = replace(opts, seed=opts.seed + 1000 + k)
                combiners.append(fps_altmin(
                    FpsProblem(w_opt, bank, rx_view.n_rf_t, rx_view.groups),
                    rx_opts))
            means[idx] += spectral_efficiency(chan, tx, combiners, snr_db,
                                              config)
    return means / len(channels)
