"""Hybrid beamforming data model, fully digital baseline, and metrics.

The transmit beamformer is the cascade F_RF @ F_BB of an analog network
(structurally constrained by hardware implementation and RF-chain mapping)
and an unconstrained digital matrix whose columns stack the per-user,
per-subcarrier blocks user-major: [user1 f1..fF | user2 f1..fF | ...].
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

__all__ = [
    "HybridConfig",
    "PhaseBank",
    "SwitchMatrix",
    "AnalogNetwork",
    "BeamformerPair",
    "HardwareBill",
    "partition_indices",
    "mapping_mask",
    "sps_network",
    "dps_network",
    "fps_network",
    "fully_digital_beamformer",
    "combiner_targets",
    "fully_digital_combiners",
    "spectral_efficiency",
    "power_normalize",
    "approximation_residual",
    "group_connected_solve",
    "hardware_bill",
]

MAPPINGS = ("fully", "partially", "group")
IMPLEMENTATIONS = ("sps", "dps", "fps")


@dataclass(frozen=True)
class HybridConfig:
    """System dimensions plus the analog network structure.

    ``eta`` is the number of RF-chain/antenna groups: 1 for fully-connected,
    n_rf_t for partially-connected, and a divisor of both n_t and n_rf_t for
    group-connected mappings. ``n_c`` is the FPS fixed-phase count.
    """

    n_t: int
    n_r: int
    k_users: int = 1
    subcarriers: int = 1
    n_s: int = 1
    n_rf_t: int = 1
    n_rf_r: int = 1
    mapping: str = "fully"
    eta: int = 1
    implementation: str = "sps"
    n_c: int = 10

    def __post_init__(self):
        for name in ("n_t", "n_r", "k_users", "subcarriers", "n_s",
                     "n_rf_t", "n_rf_r"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.mapping not in MAPPINGS:
            raise ValueError(f"unknown mapping {self.mapping!r}")
        if self.implementation not in IMPLEMENTATIONS:
            raise ValueError(f"unknown implementation {self.implementation!r}")
        if not self.k_users * self.n_s <= self.n_rf_t < self.n_t:
            raise ValueError(
                "operating regime requires K*N_s <= n_rf_t < n_t")
        if self.mapping == "group":
            if self.eta < 1 or self.n_rf_t % self.eta or self.n_t % self.eta:
                raise ValueError("eta must divide both n_rf_t and n_t")
        if self.implementation == "fps" and self.n_c < 1:
            raise ValueError("n_c must be >= 1")

    @property
    def groups(self) -> int:
        """Effective group count of the mapping (1 = fully connected)."""
        if self.mapping == "fully":
            return 1
        if self.mapping == "partially":
            return self.n_rf_t
        return self.eta

    @property
    def n_columns(self) -> int:
        """Column count K*N_s*F of the stacked beamformer matrices."""
        return self.k_users * self.n_s * self.subcarriers

    @property
    def structure(self) -> str:
        if self.mapping == "group":
            return f"{self.implementation}-group{self.eta}"
        return f"{self.implementation}-{self.mapping}"

    def receiver_view(self) -> "HybridConfig":
        """Single-user config describing one receiver's combiner problem."""
        return HybridConfig(
            n_t=self.n_r, n_r=self.n_t, k_users=1,
            subcarriers=self.subcarriers, n_s=self.n_s,
            n_rf_t=self.n_rf_r, n_rf_r=self.n_rf_t,
            mapping=self.mapping,
            eta=self.eta if self.mapping == "group" else 1,
            implementation=self.implementation, n_c=self.n_c)


def partition_indices(n: int, groups: int) -> List[np.ndarray]:
    """Contiguous near-equal partition of range(n) into ``groups`` pieces."""
    if groups < 1 or groups > n:
        raise ValueError("need 1 <= groups <= n")
    bounds = np.linspace(0, n, groups + 1).round().astype(int)
    return [np.arange(bounds[g], bounds[g + 1]) for g in range(groups)]


def mapping_mask(n_t: int, n_rf: int, groups: int) -> np.ndarray:
    """Boolean N_t x N_RF connectivity mask with block-diagonal groups."""
    mask = np.zeros((n_t, n_rf), dtype=bool)
    rows = partition_indices(n_t, groups)
    cols = partition_indices(n_rf, groups)
    for r, c in zip(rows, cols):
        mask[np.ix_(r, c)] = True
    return mask


@dataclass(frozen=True)
class PhaseBank:
    """The N_c fixed phases shared by every FPS RF chain-antenna pair."""

    phases: np.ndarray

    def __post_init__(self):
        phases = np.atleast_1d(np.asarray(self.phases, dtype=float))
        if phases.ndim != 1 or phases.size < 1:
            raise ValueError("phase bank must hold at least one phase")
        object.__setattr__(self, "phases", phases)

    @property
    def n_c(self) -> int:
        return self.phases.size

    def vector(self) -> np.ndarray:
        """Normalized phase vector c, unit norm by construction."""
        return np.exp(1j * self.phases) / np.sqrt(self.n_c)

    def matrix(self, n_rf: int) -> np.ndarray:
        """Block-diagonal C = blkdiag(c, ..., c) of shape (N_c*N_RF, N_RF)."""
        c = self.vector()
        out = np.zeros((self.n_c * n_rf, n_rf), dtype=complex)
        for j in range(n_rf):
            out[j * self.n_c:(j + 1) * self.n_c, j] = c
        return out


@dataclass(frozen=True)
class SwitchMatrix:
    """Binary N_t x (N_c*N_RF) switch states of the FPS network."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise ValueError("switch matrix must be 2-D")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("switch entries must be 0 or 1")
        object.__setattr__(self, "bits", bits.astype(np.int8))


@dataclass
class AnalogNetwork:
    """Analog beamforming matrix plus its structural payload.

    Entries off the connectivity mask are exactly zero. The payload records
    how masked entries are realized: phase matrices for SPS/DPS, a switch
    matrix plus phase bank for FPS. Build instances through sps_network,
    dps_network, or fps_network so the invariants hold by construction.
    """

    matrix: np.ndarray
    mask: np.ndarray
    implementation: str
    phases: Optional[np.ndarray] = None
    phases_a: Optional[np.ndarray] = None
    phases_b: Optional[np.ndarray] = None
    switches: Optional[SwitchMatrix] = None
    bank: Optional[PhaseBank] = None

    @property
    def n_t(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_rf(self) -> int:
        return self.matrix.shape[1]

    def validate(self, atol: float = 1e-12) -> None:
        if self.matrix.shape != self.mask.shape:
            raise ValueError("mask and matrix shapes differ")
        off = np.abs(self.matrix[~self.mask])
        if off.size and off.max() > 0:
            raise ValueError("nonzero analog entries outside the mask")
        on = np.abs(self.matrix[self.mask])
        if self.implementation == "sps":
            if on.size and np.abs(on - 1.0).max() > atol:
                raise ValueError("SPS entries must have unit modulus")
        elif self.implementation == "dps":
            if on.size and on.max() > 2.0 + atol:
                raise ValueError("DPS entries must have modulus <= 2")
            rebuilt = np.exp(1j * self.phases_a) + np.exp(1j * self.phases_b)
            err = np.abs(self.matrix[self.mask] - rebuilt[self.mask])
            if err.size and err.max() > atol:
                raise ValueError("DPS entries must equal their phase split")
        elif self.implementation == "fps":
            rebuilt = self.switches.bits @ self.bank.matrix(self.n_rf)
            if np.abs(self.matrix - rebuilt).max() > 1e-15:
                raise ValueError("FPS matrix must equal S @ C exactly")
        else:
            raise ValueError(f"unknown implementation {self.implementation!r}")


def sps_network(phases: np.ndarray, mask: Optional[np.ndarray] = None) -> AnalogNetwork:
    phases = np.asarray(phases, dtype=float)
    if mask is None:
        mask = np.ones(phases.shape, dtype=bool)
    matrix = np.where(mask, np.exp(1j * phases), 0.0)
    return AnalogNetwork(matrix=matrix, mask=mask.astype(bool),
                         implementation="sps", phases=phases)


def dps_network(phases_a: np.ndarray, phases_b: np.ndarray,
                mask: Optional[np.ndarray] = None) -> AnalogNetwork:
    phases_a = np.asarray(phases_a, dtype=float)
    phases_b = np.asarray(phases_b, dtype=float)
    if mask is None:
        mask = np.ones(phases_a.shape, dtype=bool)
    matrix = np.where(mask, np.exp(1j * phases_a) + np.exp(1j * phases_b), 0.0)
    return AnalogNetwork(matrix=matrix, mask=mask.astype(bool),
                         implementation="dps",
                         phases_a=phases_a, phases_b=phases_b)


def fps_network(switches: SwitchMatrix, bank: PhaseBank,
                mask: Optional[np.ndarray] = None) -> AnalogNetwork:
    n_t, width = switches.bits.shape
    if width % bank.n_c:
        raise ValueError("switch width must be a multiple of N_c")
    n_rf = width // bank.n_c
    matrix = switches.bits @ bank.matrix(n_rf)
    if mask is None:
        mask = np.ones((n_t, n_rf), dtype=bool)
    return AnalogNetwork(matrix=matrix, mask=mask.astype(bool),
                         implementation="fps", switches=switches, bank=bank)


@dataclass
class BeamformerPair:
    """An analog network with its concatenated digital matrix.

    The transmit power constraint ||F_RF F_BB||_F^2 <= K*N_s*F holds for
    every solver output; power_normalize tightens it to equality. ``info``
    carries solver metadata (objective trace, iteration count, ...).
    """

    analog: AnalogNetwork
    digital: np.ndarray
    info: dict = field(default_factory=dict, compare=False)

    @property
    def product(self) -> np.ndarray:
        return self.analog.matrix @ self.digital


@dataclass(frozen=True)
class HardwareBill:
    phase_shifters: int
    switches: int
    rf_chains: int


def power_normalize(pair: BeamformerPair,
                    total_power: Optional[float] = None) -> BeamformerPair:
    """Scale the digital matrix so ||F_RF F_BB||_F^2 equals the power budget.

    The budget defaults to the column count K*N_s*F of the digital matrix.
    Idempotent; the analog network is untouched.
    """
    if total_power is None:
        total_power = pair.digital.shape[1]
    norm = np.linalg.norm(pair.analog.matrix @ pair.digital)
    if norm == 0:
        raise ValueError("cannot normalize a zero beamformer product")
    scale = np.sqrt(total_power) / norm
    return BeamformerPair(analog=pair.analog, digital=pair.digital * scale,
                          info=dict(pair.info))


def approximation_residual(f_opt: np.ndarray,
                           pair: Union[BeamformerPair, np.ndarray]) -> float:
    """Frobenius norm of F_opt - F_RF F_BB."""
    product = pair.product if isinstance(pair, BeamformerPair) else np.asarray(pair)
    if product.shape != f_opt.shape:
        raise ValueError("beamformer product does not match target shape")
    return float(np.linalg.norm(f_opt - product))


def _null_space_basis(stack: np.ndarray, n_t: int) -> np.ndarray:
    """Orthonormal basis of the null space of ``stack`` (rows x n_t)."""
    if stack.size == 0:
        return np.eye(n_t, dtype=complex)
    _, s, vh = np.linalg.svd(stack, full_matrices=True)
    tol = max(stack.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def fully_digital_beamformer(channels, config: HybridConfig) -> np.ndarray:
    """Unconstrained baseline F_opt of shape N_t x (K*N_s*F).

    Single user: dominant right singular vectors per subcarrier. Multiuser:
    block diagonalization (project each user's channel onto the null space
    of the others, then SVD); when the exact null space is thinner than N_s
    the least-interfering directions fill in via the smallest singular
    vectors of the stacked interference channel. Columns are unit norm, so
    ||F_opt||_F^2 = K*N_s*F.
    """
    K, F, N_s = config.k_users, config.subcarriers, config.n_s
    n_t = config.n_t
    blocks = []
    for k in range(K):
        for f in range(F):
            h_k = channels.matrices[k, f]
            if K == 1:
                _, s, vh = np.linalg.svd(h_k, full_matrices=False)
                usable = int(np.sum(s > 1e-12))
                if usable < N_s:
                    raise ValueError(
                        f"channel rank {usable} below N_s={N_s} "
                        f"for user {k}, subcarrier {f}")
                blocks.append(vh[:N_s].conj().T)
                continue
            others = np.vstack([channels.matrices[j, f]
                                for j in range(K) if j != k])
            basis = _null_space_basis(others, n_t)
            if basis.shape[1] < N_s:
                # Regularized fallback: least-dominant right singular
                # vectors of the interference stack approximate the null.
                _, _, vh_o = np.linalg.svd(others, full_matrices=True)
                basis = vh_o[-max(N_s, basis.shape[1]):].conj().T
            h_eff = h_k @ basis
            _, s, vh = np.linalg.svd(h_eff, full_matrices=False)
            usable = int(np.sum(s > 1e-12))
            if usable < N_s:
                raise ValueError(
                    f"projected channel rank {usable} below N_s={N_s} "
                    f"for user {k}, subcarrier {f}")
            blocks.append(basis @ vh[:N_s].conj().T)
    return np.hstack(blocks)


def _tx_block(tx_matrix: np.ndarray, config: HybridConfig,
              user: int, subcarrier: int) -> np.ndarray:
    N_s, F = config.n_s, config.subcarriers
    start = (user * F + subcarrier) * N_s
    return tx_matrix[:, start:start + N_s]


def combiner_targets(channels, tx_matrix: np.ndarray,
                     config: HybridConfig) -> List[np.ndarray]:
    """Per-user fully digital combiner targets W_opt_k (N_r x N_s*F).

    Columns are the N_s dominant left singular vectors of the effective
    channel H_{k,f} F_{k,f}, stacked over subcarriers.
    """
    out = []
    for k in range(config.k_users):
        cols = []
        for f in range(config.subcarriers):
            eff = channels.matrices[k, f] @ _tx_block(tx_matrix, config, k, f)
            u, _, _ = np.linalg.svd(eff, full_matrices=False)
            w = u[:, :config.n_s]
            if w.shape[1] < config.n_s:
                pad = np.zeros((w.shape[0], config.n_s - w.shape[1]),
                               dtype=complex)
                w = np.hstack([w, pad])
            cols.append(w)
        out.append(np.hstack(cols))
    return out


def fully_digital_combiners(channels, tx_matrix: np.ndarray,
                            config: HybridConfig) -> List[np.ndarray]:
    """Unconstrained per-user combiners (identical to the targets)."""
    return combiner_targets(channels, tx_matrix, config)


def _combiner_block(combiner, config: HybridConfig, subcarrier: int) -> np.ndarray:
    w = combiner.product if isinstance(combiner, BeamformerPair) else combiner
    return w[:, subcarrier * config.n_s:(subcarrier + 1) * config.n_s]


def spectral_efficiency(channels, tx: Union[BeamformerPair, np.ndarray],
                        combiners: Sequence, snr_db: float,
                        config: HybridConfig,
                        meta: Optional[dict] = None) -> float:
    """Gaussian-signaling rate, averaged over users and subcarriers.

    Per (user, subcarrier): log2 det(I + R^-1 (rho/(K*N_s)) W^H H F F^H H^H W)
    with R the inter-user interference plus unit-variance noise seen through
    the combiner and rho = 10^(snr_db/10). A 1e-12 ridge is added when R is
    numerically singular (recorded in ``meta``).
    """
    tx_matrix = tx.product if isinstance(tx, BeamformerPair) else np.asarray(tx)
    K, F, N_s = config.k_users, config.subcarriers, config.n_s
    rho = 10.0 ** (snr_db / 10.0)
    gain = rho / (K * N_s)
    total = 0.0
    for k in range(K):
        for f in range(F):
            h = channels.matrices[k, f]
            w = _combiner_block(combiners[k], config, f)
            hw = h.conj().T @ w
            sig = hw.conj().T @ _tx_block(tx_matrix, config, k, f)
            signal = gain * (sig @ sig.conj().T)
            r_int = w.conj().T @ w
            for j in range(K):
                if j == k:
                    continue
                cross = hw.conj().T @ _tx_block(tx_matrix, config, j, f)
                r_int = r_int + gain * (cross @ cross.conj().T)
            r_int = 0.5 * (r_int + r_int.conj().T)
            try:
                chol = np.linalg.cholesky(r_int)
            except np.linalg.LinAlgError:
                if meta is not None:
                    meta["ridge_applied"] = True
                r_int = r_int + 1e-12 * np.eye(N_s)
                chol = np.linalg.cholesky(r_int)
            white = np.linalg.solve(chol, signal)
            white = np.linalg.solve(chol, white.conj().T).conj().T
            white = 0.5 * (white + white.conj().T)
            eig = np.linalg.eigvalsh(white)
            total += float(np.sum(np.log2(1.0 + np.maximum(eig, 0.0))))
    return total / (K * F)


def group_connected_solve(f_opt: np.ndarray, config: HybridConfig,
                          inner: Callable[[np.ndarray, int, int], BeamformerPair],
                          ) -> BeamformerPair:
    """Decouple a group-connected design into per-group fully-connected solves.

    ``inner(sub_target, n_rf, group_index)`` must return a fully-connected
    BeamformerPair for the (N_t/eta)-row sub-target with N_RF/eta chains.
    eta=1 returns the inner solver's output untouched; otherwise the
    assembled block-diagonal pair is power-normalized once globally.
    """
    eta = config.groups
    n_t, n_rf = config.n_t, config.n_rf_t
    if n_t % eta or n_rf % eta:
        raise ValueError("eta must divide both n_t and n_rf_t")
    if f_opt.shape[0] != n_t:
        raise ValueError("target row count does not match n_t")
    if eta == 1:
        return inner(f_opt, n_rf, 0)

    rows = partition_indices(n_t, eta)
    cols = partition_indices(n_rf, eta)
    sub_pairs = [inner(f_opt[r], len(c), g)
                 for g, (r, c) in enumerate(zip(rows, cols))]

    mask = mapping_mask(n_t, n_rf, eta)
    impl = sub_pairs[0].analog.implementation
    digital = np.zeros((n_rf, f_opt.shape[1]), dtype=complex)
    for c, pair in zip(cols, sub_pairs):
        digital[c] = pair.digital

    if impl == "sps":
        phases = np.zeros((n_t, n_rf))
        for r, c, pair in zip(rows, cols, sub_pairs):
            phases[np.ix_(r, c)] = pair.analog.phases
        analog = sps_network(phases, mask)
    elif impl == "dps":
        ph_a = np.zeros((n_t, n_rf))
        ph_b = np.zeros((n_t, n_rf))
        for r, c, pair in zip(rows, cols, sub_pairs):
            ph_a[np.ix_(r, c)] = pair.analog.phases_a
            ph_b[np.ix_(r, c)] = pair.analog.phases_b
        analog = dps_network(ph_a, ph_b, mask)
    elif impl == "fps":
        bank = sub_pairs[0].analog.bank
        n_c = bank.n_c
        bits = np.zeros((n_t, n_c * n_rf), dtype=np.int8)
        for r, c, pair in zip(rows, cols, sub_pairs):
            bit_cols = np.concatenate(
                [np.arange(j * n_c, (j + 1) * n_c) for j in c])
            bits[np.ix_(r, bit_cols)] = pair.analog.switches.bits
        analog = fps_network(SwitchMatrix(bits), bank, mask)
    else:
        raise ValueError(f"unknown implementation {impl!r}")

    info = {
        "iterations": sum(p.info.get("iterations", 0) for p in sub_pairs),
        "group_objectives": [p.info.get("objective", None) for p in sub_pairs],
    }
    pair = BeamformerPair(analog=analog, digital=digital, info=info)
    return power_normalize(pair)


def hardware_bill(config: HybridConfig) -> HardwareBill:
    """Analog-network component counts for the configuration."""
    eta = config.groups
    n_t, n_rf = config.n_t, config.n_rf_t
    if config.implementation == "sps":
        return HardwareBill(phase_shifters=n_rf * n_t // eta, switches=0,
                            rf_chains=n_rf)
    if config.implementation == "dps":
        return HardwareBill(phase_shifters=2 * n_rf * n_t // eta, switches=0,
                            rf_chains=n_rf)
    return HardwareBill(phase_shifters=config.n_c,
                        switches=config.n_c * n_rf * n_t // eta,
                        rf_chains=n_rf)
