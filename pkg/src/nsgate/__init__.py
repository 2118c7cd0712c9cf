"""Nonlinear sign gates built from concatenated beam splitters with photon-number detection."""

from .errors import (
    DegenerateMapError,
    IncompatibleBranchesError,
    InvalidDetectionError,
    LossyBranchError,
    NotACorrectionError,
    NotAGateError,
    NSGateError,
    PhotonCapError,
    ResidualToleranceError,
    SequenceParseError,
)
from .feedforward import (
    CorrectionProblem,
    FeedForwardReport,
    correction_search,
    feedforward_reports,
    table1_report,
    total_gate_probability,
)
from .fock import (
    BeamSplitter,
    ConditionalMap,
    ModeState,
    canonical_phase,
    conditional_map_oracle,
    two_mode_amplitude,
)
from .sequence import ElementSpec, SequenceSpec, branch_probability, compose, ns_residuals, success_probability
from .solver import GateSolution, ScanEntry, SolverConfig, scan_sequences, solve_ns

__all__ = [
    "BeamSplitter",
    "ConditionalMap",
    "CorrectionProblem",
    "DegenerateMapError",
    "ElementSpec",
    "FeedForwardReport",
    "GateSolution",
    "IncompatibleBranchesError",
    "InvalidDetectionError",
    "LossyBranchError",
    "ModeState",
    "NSGateError",
    "NotACorrectionError",
    "NotAGateError",
    "PhotonCapError",
    "ResidualToleranceError",
    "ScanEntry",
    "SequenceParseError",
    "SequenceSpec",
    "SolverConfig",
    "branch_probability",
    "canonical_phase",
    "compose",
    "conditional_map_oracle",
    "correction_search",
    "feedforward_reports",
    "ns_residuals",
    "scan_sequences",
    "solve_ns",
    "success_probability",
    "table1_report",
    "total_gate_probability",
    "two_mode_amplitude",
]
