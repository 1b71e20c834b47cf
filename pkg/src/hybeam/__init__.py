"""Hybrid beamforming for mm-wave MIMO: structures, solvers, experiments.

The analog network is classified along two axes: the RF-chain-to-antenna
mapping (fully-, group-, or partially-connected) and the per-connection
hardware (single, double, or fixed phase shifters). Each combination gets
a design algorithm for approximating a fully digital beamformer, and the
harness compares them by spectral efficiency over synthetic clustered
channels.
"""

from .channels import (ArrayGeometry, ChannelParams, ChannelSet,
                       array_response, generate_channels)
from .core import (AnalogNetwork, BeamformerPair, HardwareBill, HybridConfig,
                   PhaseBank, SwitchMatrix, approximation_residual,
                   combiner_targets, dps_network, fps_network,
                   fully_digital_beamformer, fully_digital_combiners,
                   group_connected_solve, hardware_bill, mapping_mask,
                   partition_indices, power_normalize, spectral_efficiency,
                   sps_network)
from .dps import (MappingSets, dps_full_solve, dps_partial_solve,
                  dps_phase_split, dynamic_mapping_greedy,
                  dynamic_mapping_kmeans, mapping_objective)
from .fps import (FpsProblem, fps_altmin, fps_bank_default,
                  fps_saturation_sweep)
from .harness import (ALGORITHMS, ExperimentResult, ExperimentSpec, ResultRow, compare,
                      parse_spec_file, parse_spec_text, read_results, run,
                      sweep, write_results)
from .sps import (AltMinOptions, ManifoldState, OmpCodebook, mo_altmin,
                  omp_hybrid, pe_relaxation, riemannian_gradient,
                  sps_partial_altmin)

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry", "ChannelParams", "ChannelSet", "array_response",
    "generate_channels",
    "AnalogNetwork", "BeamformerPair", "HardwareBill", "HybridConfig",
    "PhaseBank", "SwitchMatrix", "approximation_residual", "combiner_targets",
    "dps_network", "fps_network", "fully_digital_beamformer",
    "fully_digital_combiners", "group_connected_solve", "hardware_bill",
    "mapping_mask", "partition_indices", "power_normalize",
    "spectral_efficiency", "sps_network",
    "MappingSets", "dps_full_solve", "dps_partial_solve", "dps_phase_split",
    "dynamic_mapping_greedy", "dynamic_mapping_kmeans", "mapping_objective",
    "FpsProblem", "fps_altmin", "fps_bank_default", "fps_saturation_sweep",
    "ALGORITHMS", "ExperimentResult", "ExperimentSpec", "ResultRow", "compare", "parse_spec_file",
    "parse_spec_text", "read_results", "run", "sweep", "write_results",
    "AltMinOptions", "ManifoldState", "OmpCodebook", "mo_altmin",
    "omp_hybrid", "pe_relaxation", "riemannian_gradient",
    "sps_partial_altmin",
]
