"""Desk-scale simulator and security analysis for a free-space
reference-frame-independent QKD link with polarisation encoding.

The pipeline turns 6x6 detector-count matrices into secret key fractions:
Monte Carlo simulation of the faint-pulse experiment (simulate), constraint
estimation with finite-size deviations (estimation), analytic and
minimisation-based key rates (keyrates, optimize), and classical
post-processing with privacy amplification and multi-photon accounting
(postprocess). The hot model evaluation runs on a compiled kernel when
available (kernel.BACKEND tells which one is active).
"""

from .core import (
    BlochVector,
    ChannelState,
    binary_entropy,
    channel_density,
    channel_eigenvalues,
    key_basis_dephase,
    project_to_channel,
    relative_entropy,
    usable_entropy,
)
from .devices import (
    DeviceParams,
    OpticsSpec,
    bloch_from_optics,
    click_distribution,
    click_probability,
    ideal_params,
    pack_params,
    params_from_optics,
    unpack_params,
)
from .estimation import ConstraintSet, CountMatrix, constraints, correlator, split_counts
from .kernel import BACKEND as KERNEL_BACKEND
from .keyrates import (
    AnalysisConfig,
    KeyrateResult,
    bb84_rate,
    bb84_rate_any_pair,
    quantity_c,
    rfi_rate,
    urfi_rate,
)
from .optimize import ConstrainedProblem, MinimizationResult, MinimizeConfig, minimize
from .postprocess import PnsConfig, RawKey, pns_reduction, qber, throughput, toeplitz_amplify
from .simulate import (
    ChannelConfig,
    DetectorConfig,
    SourceConfig,
    apply_channel,
    deadtime_filter,
    hwp_sweep_angles,
    sample_count_matrix,
    simulate_counts,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    # core
    "BlochVector",
    "ChannelState",
    "binary_entropy",
    "channel_density",
    "channel_eigenvalues",
    "key_basis_dephase",
    "project_to_channel",
    "relative_entropy",
    "usable_entropy",
    # devices
    "DeviceParams",
    "OpticsSpec",
    "bloch_from_optics",
    "click_distribution",
    "click_probability",
    "ideal_params",
    "pack_params",
    "params_from_optics",
    "unpack_params",
    # estimation
    "ConstraintSet",
    "CountMatrix",
    "constraints",
    "correlator",
    "split_counts",
    # keyrates
    "AnalysisConfig",
    "KeyrateResult",
    "bb84_rate",
    "bb84_rate_any_pair",
    "quantity_c",
    "rfi_rate",
    "urfi_rate",
    # optimize
    "ConstrainedProblem",
    "MinimizationResult",
    "MinimizeConfig",
    "minimize",
    # postprocess
    "PnsConfig",
    "RawKey",
    "pns_reduction",
    "qber",
    "throughput",
    "toeplitz_amplify",
    # simulate
    "ChannelConfig",
    "DetectorConfig",
    "SourceConfig",
    "apply_channel",
    "deadtime_filter",
    "hwp_sweep_angles",
    "sample_count_matrix",
    "simulate_counts",
]
