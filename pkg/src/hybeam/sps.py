"""Single-phase-shifter analog network design under |F_RF(i,j)| = 1.

Four solvers for the matrix approximation problem
min ||F_opt - F_RF F_BB||_F over unit-modulus analog entries:

* omp_hybrid       -- greedy codebook column selection.
* mo_altmin        -- alternating minimization with Riemannian conjugate
                      gradient on the product-of-circles manifold.
* pe_relaxation    -- one-shot phase extraction from the truncated SVD.
* sps_partial_altmin -- decoupled per-row phase updates for the
                      partially-connected mapping.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .channels import ChannelSet, array_response
from .core import (BeamformerPair, mapping_mask, partition_indices,
                   power_normalize, sps_network)

__all__ = [
    "AltMinOptions",
    "OmpCodebook",
    "ManifoldState",
    "omp_hybrid",
    "riemannian_gradient",
    "mo_altmin",
    "pe_relaxation",
    "sps_partial_altmin",
]


@dataclass(frozen=True)
class AltMinOptions:
    """Iteration budget and line-search knobs shared by the AltMin solvers."""

    max_outer: int = 200
    tol: float = 1e-6
    cg_steps: int = 50
    armijo_c: float = 1e-4
    backtrack_ratio: float = 0.5
    max_backtracks: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_outer < 1 or self.cg_steps < 1 or self.max_backtracks < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass(frozen=True)
class OmpCodebook:
    """Candidate analog columns, unit norm each."""

    candidates: np.ndarray

    def __post_init__(self):
        cand = np.asarray(self.candidates, dtype=complex)
        if cand.ndim != 2 or cand.shape[1] < 1:
            raise ValueError("codebook must be a nonempty 2-D matrix")
        norms = np.linalg.norm(cand, axis=0)
        if np.abs(norms - 1.0).max() > 1e-9:
            raise ValueError("codebook columns must be unit norm")
        object.__setattr__(self, "candidates", cand)

    @property
    def size(self) -> int:
        return self.candidates.shape[1]

    @classmethod
    def from_channels(cls, channels: ChannelSet, side: str = "tx",
                      oversampled_grid: int = 0) -> "OmpCodebook":
        """Array response vectors of the generating paths, optionally
        augmented with an oversampled DFT-style grid."""
        if side == "tx":
            geom = channels.tx_geometry
            az, el = channels.aod_azimuth, channels.aod_elevation
        elif side == "rx":
            geom = channels.rx_geometry
            az, el = channels.aoa_azimuth, channels.aoa_elevation
        else:
            raise ValueError("side must be 'tx' or 'rx'")
        cols = [array_response(geom, a, e)
                for a, e in zip(az.ravel(), el.ravel())]
        if oversampled_grid:
            grid = cls.dft_grid(geom.count, oversample=oversampled_grid)
            cols.extend(grid.candidates.T)
        return cls(np.column_stack(cols))

    @classmethod
    def dft_grid(cls, n_t: int, oversample: int = 2) -> "OmpCodebook":
        """Steering vectors on a uniform spatial-frequency grid."""
        L = oversample * n_t
        n = np.arange(n_t)[:, None]
        g = np.arange(L)[None, :]
        cand = np.exp(2j * np.pi * n * g / L) / np.sqrt(n_t)
        return cls(cand)


def _unit_modulus_column(col: np.ndarray) -> np.ndarray:
    """Entrywise renormalization of a candidate to the SPS constraint."""
    mag = np.abs(col)
    safe = np.where(mag > 1e-15, mag, 1.0)
    out = col / safe
    out[mag <= 1e-15] = 1.0
    return out


def omp_hybrid(f_opt: np.ndarray, codebook: OmpCodebook, n_rf: int,
               ) -> BeamformerPair:
    """Greedy sparsity-constrained reconstruction of F_opt.

    Each round selects the candidate with the largest correlation Frobenius
    norm against the current (renormalized) residual, refits the digital
    matrix by least squares, and finishes with power normalization.
    """
    if codebook.size < n_rf:
        raise ValueError("codebook must hold at least n_rf candidates")
    residual = f_opt
    selected: List[int] = []
    columns: List[np.ndarray] = []
    for _ in range(n_rf):
        corr = codebook.candidates.conj().T @ residual
        scores = np.linalg.norm(corr, axis=1)
        pick = int(np.argmax(scores))
        selected.append(pick)
        columns.append(_unit_modulus_column(codebook.candidates[:, pick]))
        f_rf = np.column_stack(columns)
        f_bb = np.linalg.lstsq(f_rf, f_opt, rcond=None)[0]
        diff = f_opt - f_rf @ f_bb
        norm = np.linalg.norm(diff)
        residual = diff / norm if norm > 0 else diff

    phases = np.angle(np.column_stack(columns))
    analog = sps_network(phases)
    pair = BeamformerPair(analog=analog, digital=f_bb, info={
        "selected": selected,
        "degenerate_codebook": len(set(selected)) < len(selected),
        "iterations": n_rf,
        "objective": float(np.linalg.norm(f_opt - analog.matrix @ f_bb)),
    })
    return power_normalize(pair)


def riemannian_gradient(point: np.ndarray,
                        euclidean_gradient: np.ndarray) -> np.ndarray:
    """Project a Euclidean gradient onto the product-of-circles tangent space.

    Entrywise g - Re(g * conj(x)) * x; the result satisfies
    Re(out * conj(point)) = 0.
    """
    radial = np.real(euclidean_gradient * point.conj())
    return euclidean_gradient - radial * point


def _retract(point: np.ndarray) -> np.ndarray:
    mag = np.abs(point)
    return point / np.where(mag > 1e-15, mag, 1.0)


@dataclass
class ManifoldState:
    """Iterate of the conjugate-gradient loop on the circle manifold."""

    point: np.ndarray
    direction: np.ndarray
    gradient: np.ndarray


def _analog_cg(x: np.ndarray, f_opt: np.ndarray, f_bb: np.ndarray,
               opts: AltMinOptions, stats: dict) -> np.ndarray:
    """Riemannian Polak-Ribiere CG for min_X ||F_opt - X F_BB||^2, |X|=1."""
    bbh = f_bb @ f_bb.conj().T
    abh = f_opt @ f_bb.conj().T

    def egrad(p):
        return 2.0 * (p @ bbh - abh)

    def objective(p):
        # Direct evaluation; the expanded quadratic form cancels badly
        # near a zero residual.
        return float(np.linalg.norm(f_opt - p @ f_bb) ** 2)

    f_val = objective(x)
    grad = riemannian_gradient(x, egrad(x))
    state = ManifoldState(point=x, direction=-grad, gradient=grad)
    step = 1.0
    for _ in range(opts.cg_steps):
        slope = np.sum(np.real(state.gradient.conj() * state.direction))
        if slope >= 0:
            state.direction = -state.gradient
            slope = -np.sum(np.real(state.gradient.conj() * state.gradient))
            if slope >= -1e-30:
                break
        dnorm = np.linalg.norm(state.direction)
        if dnorm < 1e-30:
            break
        unit_dir = state.direction / dnorm
        unit_slope = slope / dnorm
        t = step
        accepted = False
        for _ in range(opts.max_backtracks):
            cand = _retract(state.point + t * unit_dir)
            f_new = objective(cand)
            if f_new <= f_val + opts.armijo_c * t * unit_slope:
                accepted = True
                break
            t *= opts.backtrack_ratio
        if not accepted:
            stats["linesearch_failures"] = stats.get("linesearch_failures", 0) + 1
            break
        # Warm-start the next line search near the accepted step.
        step = t / opts.backtrack_ratio
        new_grad = riemannian_gradient(cand, egrad(cand))
        old_transported = riemannian_gradient(cand, state.gradient)
        denom = np.sum(np.real(state.gradient.conj() * state.gradient))
        beta = 0.0
        if denom > 1e-30:
            beta = np.sum(np.real(new_grad.conj()
                                  * (new_grad - old_transported))) / denom
            beta = max(beta, 0.0)
        rel_drop = (f_val - f_new) / max(f_val, 1e-30)
        state = ManifoldState(
            point=cand,
            direction=-new_grad + beta * riemannian_gradient(cand,
                                                             state.direction),
            gradient=new_grad)
        f_val = f_new
        if rel_drop < 0.1 * opts.tol:
            break
    return state.point


def mo_altmin(f_opt: np.ndarray, n_rf: int,
              opts: Optional[AltMinOptions] = None,
              init: Optional[np.ndarray] = None) -> BeamformerPair:
    """Manifold-optimization AltMin for the fully-connected SPS structure.

    Alternates a least-squares digital step with a Riemannian conjugate
    gradient analog step; the recorded objective trace is non-increasing.
    """
    opts = opts or AltMinOptions()
    n_t = f_opt.shape[0]
    rng = np.random.default_rng(opts.seed)
    if init is None:
        x = np.exp(2j * np.pi * rng.random((n_t, n_rf)))
    else:
        x = _retract(np.asarray(init, dtype=complex))
        if x.shape != (n_t, n_rf):
            raise ValueError("initial point has the wrong shape")

    stats: dict = {}
    trace: List[float] = []
    f_bb = np.linalg.lstsq(x, f_opt, rcond=None)[0]
    obj = float(np.linalg.norm(f_opt - x @ f_bb))
    trace.append(obj)
    for it in range(opts.max_outer):
        x = _analog_cg(x, f_opt, f_bb, opts, stats)
        f_bb = np.linalg.lstsq(x, f_opt, rcond=None)[0]
        new_obj = float(np.linalg.norm(f_opt - x @ f_bb))
        trace.append(new_obj)
        if obj - new_obj < opts.tol * max(obj, 1e-30):
            obj = new_obj
            break
        obj = new_obj

    analog = sps_network(np.angle(x))
    pair = BeamformerPair(analog=analog, digital=f_bb, info={
        "objective_trace": trace,
        "objective": trace[-1],
        "iterations": len(trace) - 1,
        **stats,
    })
    return power_normalize(pair)


def pe_relaxation(f_opt: np.ndarray, n_rf: int) -> BeamformerPair:
    """Phase extraction from the rank-n_rf truncated SVD of the target.

    The analog phases come from the principal column basis U1; the digital
    matrix starts at S1 V1^H and is refined by one least-squares step, which
    never increases the residual. One-shot, no iteration.
    """
    u, s, vh = np.linalg.svd(f_opt, full_matrices=True)
    u1 = u[:, :n_rf]
    phases = np.angle(u1)
    analog = sps_network(phases)
    f_bb = np.linalg.lstsq(analog.matrix, f_opt, rcond=None)[0]
    pair = BeamformerPair(analog=analog, digital=f_bb, info={
        "iterations": 1,
        "objective": float(np.linalg.norm(f_opt - analog.matrix @ f_bb)),
        "truncated_energy": float(np.sum(s[n_rf:] ** 2)),
    })
    return power_normalize(pair)


def sps_partial_altmin(f_opt: np.ndarray, n_rf: int,
                       opts: Optional[AltMinOptions] = None) -> BeamformerPair:
    """AltMin for the partially-connected SPS structure.

    Each antenna row decouples: its phase is the angle of the correlation
    between the target row and its RF chain's digital row. The digital step
    is closed-form least squares (F_RF^H F_RF is diagonal under the partial
    mask). The constrained digital step of the original formulation is
    replaced by unconstrained least squares plus terminal power
    normalization.
    """
    opts = opts or AltMinOptions()
    n_t = f_opt.shape[0]
    groups = partition_indices(n_t, n_rf)
    group_of = np.empty(n_t, dtype=int)
    for j, rows in enumerate(groups):
        group_of[rows] = j
    sizes = np.array([len(rows) for rows in groups], dtype=float)
    mask = mapping_mask(n_t, n_rf, n_rf)

    rng = np.random.default_rng(opts.seed)
    theta = 2.0 * np.pi * rng.random(n_t)

    def assemble(th):
        phases = np.zeros((n_t, n_rf))
        phases[np.arange(n_t), group_of] = th
        return np.where(mask, np.exp(1j * phases), 0.0)

    def digital_for(f_rf):
        # F_RF^H F_RF = diag(group sizes) under the partial mask.
        return (f_rf.conj().T @ f_opt) / sizes[:, None]

    f_rf = assemble(theta)
    f_bb = digital_for(f_rf)
    obj = float(np.linalg.norm(f_opt - f_rf @ f_bb))
    trace = [obj]
    for _ in range(opts.max_outer):
        corr = np.einsum("tm,tm->t", f_opt, f_bb[group_of].conj())
        nonzero = np.abs(corr) > 0
        theta = np.where(nonzero, np.angle(corr), theta)
        f_rf = assemble(theta)
        f_bb = digital_for(f_rf)
        new_obj = float(np.linalg.norm(f_opt - f_rf @ f_bb))
        trace.append(new_obj)
        if obj - new_obj < opts.tol * max(obj, 1e-30):
            obj = new_obj
            break
        obj = new_obj

    phases = np.zeros((n_t, n_rf))
    phases[np.arange(n_t), group_of] = theta
    analog = sps_network(phases, mask)
    pair = BeamformerPair(analog=analog, digital=f_bb, info={
        "objective_trace": trace,
        "objective": trace[-1],
        "iterations": len(trace) - 1,
    })
    return power_normalize(pair)
