"""Mermin-Klyshko inequality signals for n-mode entangled coherent states."""

from .closed_form import (
    CatSpec,
    correlation_cat,
    correlation_mixture,
    ghz_limit_correlation,
    k_diag,
    k_offdiag,
    normalization,
)
from .displaced import (
    DisplacementAssignment,
    coherent_displaced_parity_element,
    correlation_displaced,
    mk_signal_displaced,
    paper_beta_schedule,
)
from .expansion import (
    AngleAssignment,
    DyadicRootCoefficient,
    MKExpansion,
    SettingChoice,
    assign_angles,
    expand,
    lhv_bound,
    lhv_bound_check,
    mk_signal_rotated,
    rescaled_signal,
)
from .optimizer import OptimizationResult, OptimizerConfig, maximize_displaced_signal

__version__ = "0.1.0"
