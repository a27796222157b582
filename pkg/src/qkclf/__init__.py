"""Kernel-based quantum binary classifiers: simulation, shot budgets and noise."""

from .circuits import (
    HADAMARD_ANGLES,
    ClassifierSpec,
    LabeledDataset,
    OutcomeDistribution,
    toy_dataset,
)
from .kernels import classification_score, general_expectation, htc_kernel, stc_kernel
from .moments import moments_from_distribution, plan_shots
from .noise import NoiseSpec, effective_scale
from .qstate import DensityMatrix, Observable, StateVector, amplitude_encode

__version__ = "0.1.0"
