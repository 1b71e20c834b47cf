"""Double phase shifters: closed forms, exact splits, dynamic mapping.

Summing two phase shifters per connection relaxes the unit-modulus circle
to the disk of radius 2, so the fully-connected design collapses to a
truncated SVD (optimal by Eckart-Young) and the partially-connected design
to one principal eigenvector per RF chain. Letting each chain choose its
antennas (dynamic mapping) buys back much of the partial structure's loss.
"""

import numpy as np

from hybeam import (ArrayGeometry, ChannelParams, HybridConfig, MappingSets,
                    approximation_residual, combiner_targets, dps_full_solve,
                    dps_partial_solve, dps_phase_split, dynamic_mapping_greedy,
                    dynamic_mapping_kmeans, fully_digital_beamformer,
                    generate_channels, mapping_objective, spectral_efficiency)

print("== phase splitting ==")
for a in (2.0, 0.0, 1.0 + 1.0j, -0.3 - 1.1j):
    phi, theta = dps_phase_split(a)
    rebuilt = np.exp(1j * phi) + np.exp(1j * theta)
    print(f"a = {a!s:>12}  ->  phi {phi:+.4f}, theta {theta:+.4f}, "
          f"|error| = {abs(rebuilt - a):.2e}")

print("\n== fully connected: truncated SVD is exact ==")
rng = np.random.default_rng(3)
f_opt = rng.standard_normal((16, 24)) + 1j * rng.standard_normal((16, 24))
pair = dps_full_solve(f_opt, 4)
sigma = np.linalg.svd(f_opt, compute_uv=False)
print(f"residual^2          = {approximation_residual(f_opt, pair) ** 2:.6f}")
print(f"tail singular energy = {np.sum(sigma[4:] ** 2):.6f}")
print(f"max analog |entry|   = {np.abs(pair.analog.matrix).max():.3f} (<= 2)")

print("\n== partially connected: fixed vs dynamic antenna grouping ==")
config = HybridConfig(n_t=64, n_r=8, k_users=4, n_s=2, n_rf_t=8, n_rf_r=2,
                      implementation="dps", mapping="partially")
channels = generate_channels(ChannelParams(seed=11), ArrayGeometry(count=64),
                             ArrayGeometry(count=8), 4)
target = fully_digital_beamformer(channels, config)

mappings = {
    "fixed": MappingSets.contiguous(64, 8),
    "greedy": dynamic_mapping_greedy(target, 8),
    "kmeans": dynamic_mapping_kmeans(target, 8),
}
print(f"{'mapping':<9}{'objective':>11}{'residual':>10}{'SE @ 0 dB':>11}")
for name, mapping in mappings.items():
    pair = dps_partial_solve(target, mapping)
    combiners = [dps_partial_solve(w, MappingSets.contiguous(8, 2))
                 for w in combiner_targets(channels, pair.product, config)]
    se = spectral_efficiency(channels, pair, combiners, 0.0, config)
    print(f"{name:<9}{mapping_objective(target, mapping):>11.3f}"
          f"{approximation_residual(target, pair):>10.4f}{se:>11.3f}")
