"""Simulation and analysis of robotic massage techniques under adaptive
admittance control."""
from .admittance import (AdmittanceParams, AdmittanceState, NonFiniteInput,
                         ReferenceKinematics, step, update_compensation)
from .analysis import (REFERENCE, ComparisonReport, TraceStats, compare_to_reference,
                       dominant_frequency, export_spectrum, trace_stats)
from .contact import ParameterError, SkinModel, contact_force
from .core_types import ForceSample, ForceTrace, Pose, read_trace_csv, validate_trace, write_trace_csv
from .kernels import BACKEND
from .sim import SimConfig, SimResult, UnstableSimulation, export_trace, run_simulation
from .techniques import (BeatParams, PressParams, PushParams, TechniqueSpec, VibrateParams,
                         beat_command, press_desired_force, push_command, vibrate_command)

__version__ = "0.1.0"
