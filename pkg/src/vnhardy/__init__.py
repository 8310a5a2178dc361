"""Reduction-based quantum dynamics and a machine-checked Hardy nonlocality argument."""
from . import _backend
from .operators import (
    SubsystemLayout, expm_hermitian, partial_trace, tensor, validate,
)
from .dynamics import (
    DensityOperator, EmbeddedProjector, ImpossibleOutcomeError, answer_probability,
    apply_answer, evolve, pose_question, run_trajectory, sample_reduction, subsystem_state,
)
from .hardy import (
    HardyConfiguration, NoHardyConfigurationError, born_joint, construct_from_state,
    optimize_hardy, verify_predictions,
)

__version__ = "0.1.0"


def backend() -> str:
    """Name of the active sampling kernel (``compiled`` or ``python``)."""
    return _backend.name()
