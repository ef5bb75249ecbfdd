"""Thermal noise flow in linearized multimode optomechanical networks."""

from .errors import (
    ConfigError,
    IntegrationError,
    ModelError,
    NoiseflowError,
    NumericalError,
    OracleMismatchError,
    SpecError,
    TopologyError,
)
from .netmodel import (
    Convention,
    Coupling,
    DynamicalSystem,
    LinearizationInput,
    Mode,
    ModeKind,
    NetworkModel,
    build_dynamics,
    gauge_fix,
    linearize,
    loop_phase,
    plaquette,
    thermal_occupation,
    with_loop_phase,
)
from .spectral import FrequencyGrid, SpectralResult, Setup, chain_amplitude, spectrum, transfer_matrix, transmission
from .steady import FlowReport, Method, dual_cavity_limit, flow_report, occupations_lyapunov, occupations_spectral
from .conditions import ConditionReport, SupermodeBasis, check_all, supermodes
from .sweep import Axis, FigurePreset, SweepSpec, SweepTable, reproduce, run_sweep

__version__ = "0.1.0"

__all__ = [
    "Axis",
    "ConditionReport",
    "ConfigError",
    "Convention",
    "Coupling",
    "DynamicalSystem",
    "FigurePreset",
    "FlowReport",
    "FrequencyGrid",
    "IntegrationError",
    "LinearizationInput",
    "Method",
    "Mode",
    "ModeKind",
    "ModelError",
    "NetworkModel",
    "NoiseflowError",
    "NumericalError",
    "OracleMismatchError",
    "Setup",
    "SpecError",
    "SpectralResult",
    "SupermodeBasis",
    "SweepSpec",
    "SweepTable",
    "TopologyError",
    "build_dynamics",
    "chain_amplitude",
    "check_all",
    "dual_cavity_limit",
    "flow_report",
    "gauge_fix",
    "linearize",
    "loop_phase",
    "occupations_lyapunov",
    "occupations_spectral",
    "plaquette",
    "reproduce",
    "run_sweep",
    "spectrum",
    "supermodes",
    "thermal_occupation",
    "transfer_matrix",
    "transmission",
    "with_loop_phase",
]
