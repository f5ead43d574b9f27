"""Singular-value pressure estimators and dimension brackets for SFT-coded
matrix cocycles."""
from .dimension import (
    DimensionBracket,
    affinity_dimension,
    bowen_root,
    box_counting_oracle,
    caratheodory_cover_measure,
    caratheodory_dimension,
    moran_root,
    repeller_bracket,
)
from .errors import BudgetExceeded, ConfigError, InvariantViolation, PressureError
from .matrixpot import Kind, MatrixCocycle, Orientation, PotentialSpec, bottom, top
from .pressure import (
    CocycleSystem,
    Direction,
    PressureEstimate,
    Schedule,
    block_pressure,
    cylinder_sum,
    free_energy,
    lyapunov_spectrum,
    pressure_profile,
    super_power_lower,
)
from .models import (
    DiagonalToralSystem,
    PerturbationFamily,
    PiecewiseLinearMap1D,
    SelfAffineIfs,
    build_1d,
    build_ifs,
    build_toral,
    load_model,
    perturb,
    zoo,
)
from .symbolic import Sft, full_shift, validate_sft

__version__ = "0.1.0"

__all__ = [
    "DimensionBracket", "affinity_dimension", "bowen_root", "box_counting_oracle",
    "caratheodory_cover_measure", "caratheodory_dimension", "moran_root", "repeller_bracket",
    "DiagonalToralSystem", "PerturbationFamily", "PiecewiseLinearMap1D", "SelfAffineIfs",
    "build_1d", "build_ifs", "build_toral", "load_model", "perturb", "zoo",
    "BudgetExceeded", "ConfigError", "InvariantViolation", "PressureError",
    "Kind", "MatrixCocycle", "Orientation", "PotentialSpec", "bottom", "top",
    "CocycleSystem", "Direction", "PressureEstimate", "Schedule",
    "block_pressure", "cylinder_sum", "free_energy", "lyapunov_spectrum",
    "pressure_profile", "super_power_lower",
    "Sft", "full_shift", "validate_sft",
]
