"""Shape-adaptive multi-surface downlink beamforming simulator.

Alternating optimization of binary element-activation masks, transmit
precoding under a power budget, and unit-modulus reflection phases, plus the
fixed-shape / quantized / zero-forcing comparison schemes and a seeded
Monte-Carlo sweep harness.
"""

from .active import (
    EffectiveChannels,
    Precoder,
    bisect_mu,
    effective_channels,
    transmit_power,
    update_precoder,
    update_tau,
)
from .ao import (
    AOSolution,
    AuxState,
    SolverOptions,
    check_min_power,
    p2_objective,
    snr,
    solve,
    update_chi,
    weighted_sum_rate,
)
from .baselines import BaselineKind, quantize_phases, run_baseline, zf_precoder
from .channel import (
    ChannelSet,
    NetworkLayout,
    PathLossModel,
    build_network,
    dbm_to_watts,
    default_layout,
    draw_channel_matrix,
    path_loss_db,
)
from .config import ConfigError, SimConfig, parse_config
from .harness import SweepResult, SweepRow, read_csv, run_sweep, summarize, write_csv
from .passive import (
    PhaseConfig,
    QuadraticForm,
    assemble_quadratic,
    build_v,
    random_phases,
    solve_unit_modulus_qp,
    update_epsilon,
)
from .shapes import ShapeCatalog, ShapeMask, apply_mask, make_mask, select_shape

__version__ = "0.1.0"

__all__ = [
    "AOSolution",
    "AuxState",
    "BaselineKind",
    "ChannelSet",
    "ConfigError",
    "EffectiveChannels",
    "NetworkLayout",
    "PathLossModel",
    "PhaseConfig",
    "Precoder",
    "QuadraticForm",
    "ShapeCatalog",
    "ShapeMask",
    "SimConfig",
    "SolverOptions",
    "SweepResult",
    "SweepRow",
    "apply_mask",
    "assemble_quadratic",
    "bisect_mu",
    "build_network",
    "build_v",
    "check_min_power",
    "dbm_to_watts",
    "default_layout",
    "draw_channel_matrix",
    "effective_channels",
    "make_mask",
    "p2_objective",
    "parse_config",
    "path_loss_db",
    "quantize_phases",
    "random_phases",
    "read_csv",
    "run_baseline",
    "run_sweep",
    "select_shape",
    "snr",
    "solve",
    "solve_unit_modulus_qp",
    "summarize",
    "transmit_power",
    "update_chi",
    "update_epsilon",
    "update_precoder",
    "update_tau",
    "weighted_sum_rate",
    "write_csv",
    "zf_precoder",
]
