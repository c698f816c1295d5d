"""kpflow: pseudo-spectral simulation and analysis toolkit for the
Kadomtsev-Petviashvili equations (KP-I / KP-II)."""

from .spectral import (
    KP1,
    KP2,
    DispersionParams,
    Field2D,
    FieldST,
    Grid2D,
    RegionKind,
    RegionMask,
    ZeroModePolicy,
    bilinear_resonance,
    dispersion_symbol,
    dyadic_shell_mask,
    load_field,
    project,
    save_field,
    symbol_gradient_norm,
    weight_w,
)
from .evolution import (
    BlowupError,
    ConservedDiagnostics,
    SolverConfig,
    badrescal_check,
    conserved_diagnostics,
    critical_indices,
    linear_propagate,
    nonlinear_term,
    picard_solve,
    scaling_transform,
    simulate,
    step,
    time_cutoff,
)
from .norms import (
    NormReport,
    besov_norm,
    constant_robustness_check,
    embedding_check,
    energy_space_norm,
    weighted_besov_norm,
    xsb_norm,
    ysrb_norm,
    zsb_norm,
)

__version__ = "0.1.0"
