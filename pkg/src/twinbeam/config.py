"""Experiment configuration: one JSON document, validated before any run.

Unknown keys are rejected at every level. Omitted sections fall back to the
built-in preset, which reproduces the reported operating point: detected
means of 528 (signal) and 593 (idler) electrons, electronic noise of 159
and 214 electrons r.m.s., overall efficiency 0.55 in both arms.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .collection import CollectionModel, PumpMapping
from .detection import IDLER_GAIN_UV, SIGNAL_GAIN_UV, DetectorArm
from .errors import ParameterError
from .source import SourceKind, SourceModel

CONFIG_ENV = "TWINBEAM_CONFIG"

PRESET_ETA = 0.55
PRESET_MEANS = (528.0, 593.0)
PRESET_DARK_SIGMA = (159.0, 214.0)
# mode number fitted to a corrected zero-lag correlation of 0.984 with the
# idler excess over the signal treated as uncorrelated light
PRESET_MU = 17


@dataclass(frozen=True)
class RunOptions:
    count: int = 100_000
    seed: int | None = None
    dark_count: int = 100_000
    workers: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ParameterError("run.count must be at least 1")
        if self.dark_count < 0:
            raise ParameterError("run.dark_count must be nonnegative")
        if self.workers < 1:
            raise ParameterError("run.workers must be at least 1")


@dataclass(frozen=True)
class AnalysisOptions:
    j_max: int = 10
    corrected: bool = True
    dark_covariance: bool = False
    bin_width: float = 1.0
    window: tuple[float, float] | None = None
    success: float | None = None
    window_width: float = 5.0
    window_side: str = "upper"

    def __post_init__(self):
        if self.j_max < 0:
            raise ParameterError("analysis.j_max must be nonnegative")
        if not self.bin_width > 0:
            raise ParameterError("analysis.bin_width must be positive")
        if self.window is not None:
            if len(self.window) != 2 or not self.window[0] <= self.window[1]:
                raise ParameterError("analysis.window must be [lo, hi] with lo <= hi")
            object.__setattr__(self, "window", (float(self.window[0]), float(self.window[1])))
        if self.success is not None and not 0 < self.success <= 1:
            raise ParameterError("analysis.success must lie in (0, 1]")
        if self.window_side not in ("upper", "lower"):
            raise ParameterError("analysis.window_side must be 'upper' or 'lower'")


@dataclass(frozen=True)
class SweepOptions:
    intensities: tuple[float, ...] = (0.3, 0.45, 0.6, 0.8, 1.0, 1.25, 1.5, 2.0)
    mapping: PumpMapping = field(default_factory=PumpMapping)

    def __post_init__(self):
        if len(self.intensities) == 0:
            raise ParameterError("sweep.intensities must not be empty")
        object.__setattr__(self, "intensities", tuple(float(x) for x in self.intensities))


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceModel
    arms: tuple[DetectorArm, DetectorArm]
    collection: CollectionModel = field(default_factory=CollectionModel)
    run: RunOptions = field(default_factory=RunOptions)
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)
    sweep: SweepOptions = field(default_factory=SweepOptions)

    def override(self, **changes) -> "ExperimentConfig":
        """Replace ``run``/``analysis`` fields, skipping ``None`` values."""
        run = {k: v for k, v in changes.items() if v is not None and k in _names(RunOptions)}
        ana = {k: v for k, v in changes.items() if v is not None and k in _names(AnalysisOptions)}
        return replace(self, run=replace(self.run, **run), analysis=replace(self.analysis, **ana))


def _names(cls) -> set[str]:
    return {f.name for f in fields(cls)}


def preset_config() -> ExperimentConfig:
    n_twin = PRESET_MEANS[0] / PRESET_ETA
    return ExperimentConfig(
        source=SourceModel(PRESET_MU, n_twin / PRESET_MU),
        arms=(
            DetectorArm(PRESET_ETA, PRESET_DARK_SIGMA[0], 0.0, SIGNAL_GAIN_UV),
            DetectorArm(PRESET_ETA, PRESET_DARK_SIGMA[1], 0.0, IDLER_GAIN_UV),
        ),
        collection=CollectionModel(bg_i=(PRESET_MEANS[1] - PRESET_MEANS[0]) / PRESET_ETA),
    )


def _build(cls, data: Any, where: str, base=None):
    if not isinstance(data, dict):
        raise ParameterError(f"{where} must be a JSON object")
    allowed = _names(cls)
    unknown = set(data) - allowed
    if unknown:
        raise ParameterError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    kwargs = {} if base is None else {f.name: getattr(base, f.name) for f in fields(cls)}
    kwargs.update(data)
    try:
        return cls(**kwargs)
    except ParameterError as exc:
        raise ParameterError(f"{where}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"{where}: {exc}") from None


def from_dict(data: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Build a config; sections missing from ``data`` come from ``base``."""
    base = base or preset_config()
    if not isinstance(data, dict):
        raise ParameterError("config must be a JSON object")
    unknown = set(data) - _names(ExperimentConfig)
    if unknown:
        raise ParameterError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")

    source = base.source
    if "source" in data:
        src = dict(data["source"]) if isinstance(data["source"], dict) else data["source"]
        if isinstance(src, dict) and "kind" in src:
            try:
                src["kind"] = SourceKind(src["kind"])
            except ValueError:
                raise ParameterError(f"source.kind must be one of {[k.value for k in SourceKind]}") from None
        source = _build(SourceModel, src, "source", base.source)

    arms = base.arms
    if "arms" in data:
        a = data["arms"]
        if not isinstance(a, dict) or set(a) - {"signal", "idler"}:
            raise ParameterError("arms must be an object with 'signal' and/or 'idler'")
        arms = (
            _build(DetectorArm, a.get("signal", {}), "arms.signal", base.arms[0]),
            _build(DetectorArm, a.get("idler", {}), "arms.idler", base.arms[1]),
        )

    collection = base.collection
    if "collection" in data:
        collection = _build(CollectionModel, data["collection"], "collection", _plain(base.collection))

    run = base.run
    if "run" in data:
        run = _build(RunOptions, data["run"], "run", base.run)

    analysis = base.analysis
    if "analysis" in data:
        analysis = _build(AnalysisOptions, data["analysis"], "analysis", base.analysis)

    sweep = base.sweep
    if "sweep" in data:
        sw = data["sweep"]
        if not isinstance(sw, dict):
            raise ParameterError("sweep must be a JSON object")
        sw = dict(sw)
        mapping = base.sweep.mapping
        if "mapping" in sw:
            m = dict(sw.pop("mapping"))
            if m.get("table") is not None:
                m["table"] = tuple(tuple(row) for row in m["table"])
            mapping = _build(PumpMapping, m, "sweep.mapping", base.sweep.mapping)
        sweep = _build(SweepOptions, {**sw, "mapping": mapping}, "sweep", base.sweep)

    return ExperimentConfig(source, arms, collection, run, analysis, sweep)


def _plain(collection: CollectionModel) -> CollectionModel:
    # let `edge` be re-derived when whole_modes changes
    return replace(collection, edge=None) if collection.edge == (collection.whole_modes == 0) else collection


def load_config(path: str | os.PathLike | None = None) -> ExperimentConfig:
    """Read a config file; ``None`` falls back to ``$TWINBEAM_CONFIG`` or the preset."""
    if path is None:
        path = os.environ.get(CONFIG_ENV)
    if path is None:
        return preset_config()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config {path} is not valid JSON: {exc}") from None
    return from_dict(data)


def to_dict(config: ExperimentConfig) -> dict:
    def plain(obj):
        return {f.name: getattr(obj, f.name) for f in fields(obj)}

    src = plain(config.source)
    src["kind"] = config.source.kind.value
    mapping = plain(config.sweep.mapping)
    if mapping["table"] is not None:
        mapping["table"] = [list(r) for r in mapping["table"]]
    ana = plain(config.analysis)
    if ana["window"] is not None:
        ana["window"] = list(ana["window"])
    return {
        "source": src,
        "arms": {"signal": plain(config.arms[0]), "idler": plain(config.arms[1])},
        "collection": plain(config.collection),
        "run": plain(config.run),
        "analysis": ana,
        "sweep": {"intensities": list(config.sweep.intensities), "mapping": mapping},
    }
