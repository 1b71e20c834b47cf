"""Clustered mm-wave channels: steering vectors, normalization, flat fading.

The generator draws a handful of scattering clusters, each splitting into
rays with Laplacian angle offsets around the cluster center. Tap matrices
map to subcarriers through a DFT, so a single delay tap means every
subcarrier sees the same matrix.
"""

import numpy as np

from hybeam import ArrayGeometry, ChannelParams, array_response, generate_channels

tx = ArrayGeometry(count=32)
rx = ArrayGeometry(count=8)

print("== steering vectors ==")
broadside = array_response(tx, 0.0)
steered = array_response(tx, np.deg2rad(30))
print(f"broadside entries are constant: {np.allclose(broadside, broadside[0])}")
print(f"norm of a steered response:     {np.linalg.norm(steered):.12f}")

upa = ArrayGeometry(kind="uniform-planar", count=16, planar_dims=(4, 4))
print(f"planar response norm:           "
      f"{np.linalg.norm(array_response(upa, 0.4, 0.1)):.12f}")

print("\n== one wideband realization ==")
params = ChannelParams(n_clusters=5, n_rays=10, subcarriers=8, delay_taps=3,
                       seed=42)
channels = generate_channels(params, tx, rx, users=2)
print(f"matrix tensor shape (K, F, N_r, N_t): {channels.matrices.shape}")
norms = np.linalg.norm(channels.matrices, axis=(2, 3)) ** 2
print(f"||H||_F^2 across users/subcarriers: min {norms.min():.1f}, "
      f"max {norms.max():.1f} (target mean {tx.count * rx.count})")

print("\n== flat fading degenerates to one matrix ==")
flat = generate_channels(
    ChannelParams(subcarriers=8, delay_taps=1, seed=1), tx, rx, users=1)
same = all(np.array_equal(flat.matrices[0, f], flat.matrices[0, 0])
           for f in range(8))
print(f"all 8 subcarrier matrices identical: {same}")

print("\n== normalization statistics over 2000 draws ==")
total = 0.0
for seed in range(2000):
    cs = generate_channels(ChannelParams(seed=seed), tx, rx, users=1)
    total += np.linalg.norm(cs.matrices[0, 0]) ** 2
print(f"mean ||H||_F^2 = {total / 2000:.1f}  (expected {tx.count * rx.count})")
