"""Antenna array responses and clustered mm-wave channel generation.

Channels follow the standard clustered (Saleh-Valenzuela style) model:
a small number of scattering clusters, each contributing a bundle of rays
with Laplacian angle offsets around the cluster center. Clusters are
assigned round-robin to delay taps, and per-subcarrier matrices are the
DFT of the tap matrices, so ``delay_taps=1`` gives flat fading.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "ArrayGeometry",
    "ChannelParams",
    "ChannelSet",
    "array_response",
    "generate_channels",
]

# Refuse to allocate channel tensors above this many complex entries.
DEFAULT_MAX_ELEMENTS = 1 << 24


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear or planar antenna array.

    spacing is in wavelengths. For planar arrays ``planar_dims`` gives the
    (horizontal, vertical) grid; their product must equal ``count``.
    """

    kind: str = "uniform-linear"
    count: int = 1
    spacing: float = 0.5
    planar_dims: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if self.kind not in ("uniform-linear", "uniform-planar"):
            raise ValueError(f"unknown array kind: {self.kind!r}")
        if self.count < 1:
            raise ValueError("antenna count must be >= 1")
        if self.spacing <= 0:
            raise ValueError("element spacing must be positive")
        if self.kind == "uniform-planar":
            if self.planar_dims is None:
                raise ValueError("planar arrays require planar_dims")
            d1, d2 = self.planar_dims
            if d1 < 1 or d2 < 1 or d1 * d2 != self.count:
                raise ValueError("planar_dims must multiply to count")
        elif self.planar_dims is not None:
            raise ValueError("planar_dims only valid for planar arrays")


def _steering_columns(geometry: ArrayGeometry, azimuth: np.ndarray,
                      elevation: np.ndarray) -> np.ndarray:
    """Steering vectors for angle arrays, one unit-norm column per angle."""
    azimuth = np.atleast_1d(azimuth)
    elevation = np.atleast_1d(elevation)
    if geometry.kind == "uniform-linear":
        n = np.arange(geometry.count)[:, None]
        phase = 2.0 * np.pi * geometry.spacing * n * np.sin(azimuth)[None, :]
        return np.exp(1j * phase) / np.sqrt(geometry.count)
    d1, d2 = geometry.planar_dims
    n1 = np.arange(d1)[:, None]
    n2 = np.arange(d2)[:, None]
    a1 = np.exp(1j * 2.0 * np.pi * geometry.spacing * n1
                * (np.sin(azimuth) * np.cos(elevation))[None, :])
    a2 = np.exp(1j * 2.0 * np.pi * geometry.spacing * n2
                * np.sin(elevation)[None, :])
    out = a1[:, None, :] * a2[None, :, :]
    return out.reshape(geometry.count, -1) / np.sqrt(geometry.count)


def array_response(geometry: ArrayGeometry, azimuth: float,
                   elevation: float = 0.0) -> np.ndarray:
    """Far-field steering vector for the given geometry, unit norm.

    Linear arrays ignore elevation and use the phase progression
    2*pi*spacing*n*sin(azimuth). Planar arrays use the separable product
    kron(horizontal, vertical) with horizontal phase factor
    sin(azimuth)*cos(elevation) and vertical factor sin(elevation).
    """
    return _steering_columns(geometry, np.asarray([azimuth]),
                             np.asarray([elevation]))[:, 0]


@dataclass(frozen=True)
class ChannelParams:
    """Clustered channel parameters; seed fixes every random draw."""

    n_clusters: int = 5
    n_rays: int = 10
    angle_spread_deg: float = 10.0
    subcarriers: int = 1
    delay_taps: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_clusters < 1 or self.n_rays < 1:
            raise ValueError("need at least one cluster and one ray")
        if self.subcarriers < 1:
            raise ValueError("subcarriers must be >= 1")
        if not 1 <= self.delay_taps <= self.subcarriers:
            raise ValueError("delay taps must satisfy 1 <= D <= F")


@dataclass
class ChannelSet:
    """Per-user, per-subcarrier channel matrices plus generating path data.

    ``matrices`` has shape (K, F, N_r, N_t). Path angle arrays have shape
    (K, n_clusters, n_rays); ``tap_of_cluster`` maps cluster -> delay tap.
    """

    users: int
    matrices: np.ndarray
    params: ChannelParams
    tx_geometry: ArrayGeometry
    rx_geometry: ArrayGeometry
    aod_azimuth: np.ndarray = field(repr=False, default=None)
    aod_elevation: np.ndarray = field(repr=False, default=None)
    aoa_azimuth: np.ndarray = field(repr=False, default=None)
    aoa_elevation: np.ndarray = field(repr=False, default=None)
    gains: np.ndarray = field(repr=False, default=None)
    tap_of_cluster: np.ndarray = field(repr=False, default=None)

    def h(self, user: int, subcarrier: int) -> np.ndarray:
        return self.matrices[user, subcarrier]

    @property
    def n_t(self) -> int:
        return self.matrices.shape[3]

    @property
    def n_r(self) -> int:
        return self.matrices.shape[2]

    @property
    def subcarriers(self) -> int:
        return self.matrices.shape[1]


def _laplacian_offsets(rng: np.random.Generator, scale_rad: float,
                       size) -> np.ndarray:
    if scale_rad <= 0:
        return np.zeros(size)
    return rng.laplace(0.0, scale_rad, size=size)


def generate_channels(params: ChannelParams, tx: ArrayGeometry,
                      rx: ArrayGeometry, users: int,
                      max_elements: int = DEFAULT_MAX_ELEMENTS) -> ChannelSet:
    """Draw one clustered channel realization for each of ``users`` users.

    Deterministic in params.seed. Tap matrices are
    sqrt(N_t*N_r / (n_clusters*n_rays)) * sum of rank-one ray terms with
    CN(0,1) gains, so E||H_f||_F^2 = N_t*N_r on every subcarrier.
    """
    if users < 1:
        raise ValueError("users must be >= 1")
    total = users * params.subcarriers * tx.count * rx.count
    if total > max_elements:
        raise ValueError(
            f"channel tensor would hold {total} complex entries, "
            f"above the cap of {max_elements}")

    rng = np.random.default_rng(params.seed)
    K, F, D = users, params.subcarriers, params.delay_taps
    n_cl, n_ray = params.n_clusters, params.n_rays
    spread = np.deg2rad(params.angle_spread_deg)

    shape = (K, n_cl, n_ray)
    aod_centers = rng.uniform(0.0, 2.0 * np.pi, size=(K, n_cl, 1))
    aoa_centers = rng.uniform(0.0, 2.0 * np.pi, size=(K, n_cl, 1))
    aod_az = aod_centers + _laplacian_offsets(rng, spread, shape)
    aoa_az = aoa_centers + _laplacian_offsets(rng, spread, shape)
    # Elevation only steers planar arrays; linear geometries ignore it.
    aod_el_centers = rng.uniform(-np.pi / 2, np.pi / 2, size=(K, n_cl, 1))
    aoa_el_centers = rng.uniform(-np.pi / 2, np.pi / 2, size=(K, n_cl, 1))
    aod_el = aod_el_centers + _laplacian_offsets(rng, spread, shape)
    aoa_el = aoa_el_centers + _laplacian_offsets(rng, spread, shape)
    gains = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        / np.sqrt(2.0)
    tap_of_cluster = np.arange(n_cl) % D

    scale = np.sqrt(tx.count * rx.count / (n_cl * n_ray))
    taps = np.zeros((K, D, rx.count, tx.count), dtype=complex)
    for k in range(K):
        at = _steering_columns(tx, aod_az[k].ravel(), aod_el[k].ravel())
        ar = _steering_columns(rx, aoa_az[k].ravel(), aoa_el[k].ravel())
        tap_of_path = np.repeat(tap_of_cluster, n_ray)
        g = gains[k].ravel()
        for d in range(D):
            sel = tap_of_path == d
            taps[k, d] = (ar[:, sel] * g[sel]) @ at[:, sel].conj().T
    taps *= scale

    # H_f = sum_d H_d exp(-j 2 pi f d / F); D=1 collapses to flat fading.
    f_idx = np.arange(F)
    d_idx = np.arange(D)
    dft = np.exp(-2j * np.pi * np.outer(f_idx, d_idx) / F)
    matrices = np.einsum("fd,kdrt->kfrt", dft, taps)

    return ChannelSet(
        users=K,
        matrices=matrices,
        params=params,
        tx_geometry=tx,
        rx_geometry=rx,
        aod_azimuth=aod_az,
        aod_elevation=aod_el,
        aoa_azimuth=aoa_az,
        aoa_elevation=aoa_el,
        gains=gains,
        tap_of_cluster=tap_of_cluster,
    )
