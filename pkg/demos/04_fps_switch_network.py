"""Fixed phase shifters plus switches: how many fixed phases are enough?

A bank of N_c fixed phases feeds every RF chain-antenna pair through
binary switches, so the analog matrix is S @ C with S binary. The design
alternates least-squares digital steps with per-row binary updates. The
sweep shows spectral efficiency saturating around ten fixed phases.
"""

from hybeam import (AltMinOptions, ArrayGeometry, ChannelParams, FpsProblem,
                    HybridConfig, approximation_residual, fps_altmin,
                    fps_bank_default, fps_saturation_sweep,
                    fully_digital_beamformer, generate_channels, hardware_bill)

config = HybridConfig(n_t=32, n_r=8, k_users=1, n_s=2, n_rf_t=2, n_rf_r=2,
                      implementation="fps", n_c=10)
channels = generate_channels(ChannelParams(seed=5), ArrayGeometry(count=32),
                             ArrayGeometry(count=8), 1)
f_opt = fully_digital_beamformer(channels, config)

print("== one design at N_c = 10 ==")
pair = fps_altmin(FpsProblem(f_opt, fps_bank_default(10), 2),
                  AltMinOptions(seed=5))
bits = pair.analog.switches.bits
print(f"switch matrix: {bits.shape}, {bits.sum()} of {bits.size} closed")
print(f"residual: {approximation_residual(f_opt, pair):.4f} "
      f"in {pair.info['iterations']} iterations")
bill = hardware_bill(config)
print(f"hardware: {bill.phase_shifters} fixed phase shifters, "
      f"{bill.switches} switches, {bill.rf_chains} RF chains")

print("\n== saturation sweep over the bank size (40 realizations) ==")
realizations = [generate_channels(ChannelParams(seed=s),
                                  ArrayGeometry(count=32),
                                  ArrayGeometry(count=8), 1)
                for s in range(40)]
sizes = [1, 2, 5, 10, 15, 20]
means = fps_saturation_sweep(realizations, config, sizes, snr_db=0.0)
for n_c, se in zip(sizes, means):
    bar = "#" * int(4 * se)
    print(f"N_c = {n_c:>2}: SE = {se:6.3f} bits/s/Hz  {bar}")
gain = (means[-1] - means[3]) / means[3]
print(f"\ngoing from 10 to 20 fixed phases buys only {100 * gain:.1f}%")
