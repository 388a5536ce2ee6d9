"""Simulation and analysis of photon-number correlations in twin beams."""
from .analysis import (
    AnalysisReport,
    ConditionalResult,
    Histogram,
    conditional_distribution,
    difference_histogram,
    gamma_profile,
    marginal_fano,
    noise_reduction,
    tail_window,
)
from .collection import CollectionModel, PumpMapping, PumpSweepPoint, apply_collection, sweep_pump
from .detection import DetectorArm, dark_run, detect_pmf, detect_shot, thin
from .oracle import (
    MomentSet,
    fit_mode_number,
    gamma0_expected,
    joint_pmf_bruteforce,
    seeded_R,
    twin_moments,
)
from .series import DarkStats, ShotSeries
from .simulation import simulate, simulate_series
from .source import PhotonShots, SourceKind, SourceModel, photon_pmf, sample_shots

__version__ = "0.1.0"
