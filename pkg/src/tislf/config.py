"""Pipeline configuration: typed sections, a flat dotted-key surface, and
loading from simple ``key = value`` text files with override support.

Every tunable the engine exposes lives here so that runs are reproducible
from (config, inputs) alone. Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from .errors import ConfigError


@dataclass(frozen=True)
class FeatureParams:
    """Scale-space detector / descriptor settings."""

    octaves: int | None = None  # None = derive from image size
    scales_per_octave: int = 3
    contrast_thresh: float = 0.03  # on [0, 1] intensity
    edge_thresh: float = 10.0  # principal-curvature ratio
    max_keypoints: int = 2000


@dataclass(frozen=True)
class MatchParams:
    ratio: float = 0.75
    denominator: str = "second"  # second | min | union


@dataclass(frozen=True)
class RansacParams:
    epsilon_px: float = 3.0
    max_iters: int = 2000
    seed: int = 7


@dataclass(frozen=True)
class CusumParams:
    """Change detector settings. ``delta`` None means per-scene auto baseline."""

    delta: float | None = None
    alpha: float = 1.5
    warmup: int = 5
    rearm_low: float = 0.1


@dataclass(frozen=True)
class RecognitionParams:
    chunks: int = 8
    kl_thresh: float = 0.5
    min_mass: float = 0.05
    kmeans_gap: float = 0.08


@dataclass(frozen=True)
class EstimationParams:
    t_stand: int = 3
    t_lost: int = 3
    beta: float = 1.0


@dataclass(frozen=True)
class PipelineConfig:
    frames_dir: str = ""
    effective_fps: float = 1.0
    downsample_long_side: int = 320
    sift: FeatureParams = field(default_factory=FeatureParams)
    match: MatchParams = field(default_factory=MatchParams)
    ransac: RansacParams = field(default_factory=RansacParams)
    cusum: CusumParams = field(default_factory=CusumParams)
    recognition: RecognitionParams = field(default_factory=RecognitionParams)
    estimation: EstimationParams = field(default_factory=EstimationParams)


def _parse_bool_free_int(raw: Any) -> int:
    if isinstance(raw, bool):
        raise ValueError("expected integer")
    return int(raw)


def _parse_int(raw: Any, lo: int | None = None, hi: int | None = None) -> int:
    v = _parse_bool_free_int(raw)
    if lo is not None and v < lo:
        raise ValueError(f"must be >= {lo}")
    if hi is not None and v > hi:
        raise ValueError(f"must be <= {hi}")
    return v


def _parse_float(
    raw: Any,
    lo: float | None = None,
    hi: float | None = None,
    lo_open: bool = False,
) -> float:
    v = float(raw)
    if v != v:
        raise ValueError("must not be NaN")
    if lo is not None:
        if lo_open and v <= lo:
            raise ValueError(f"must be > {lo}")
        if not lo_open and v < lo:
            raise ValueError(f"must be >= {lo}")
    if hi is not None and v > hi:
        raise ValueError(f"must be <= {hi}")
    return v


def _parse_octaves(raw: Any) -> int | None:
    if raw is None or (isinstance(raw, str) and raw.strip().lower() == "auto"):
        return None
    return _parse_int(raw, lo=1, hi=10)


def _parse_delta(raw: Any) -> float | None:
    if raw is None or (isinstance(raw, str) and raw.strip().lower() == "auto"):
        return None
    return _parse_float(raw, lo=0.0, hi=1.0, lo_open=True)


def _parse_denominator(raw: Any) -> str:
    v = str(raw).strip().lower()
    if v not in ("second", "min", "union"):
        raise ValueError("must be one of: second, min, union")
    return v


# key -> ((section, field) or (None, field), parser)
_KEY_SPECS: dict[str, tuple[str | None, str, Callable[[Any], Any]]] = {
    "frames_dir": (None, "frames_dir", str),
    "effective_fps": (None, "effective_fps", lambda v: _parse_float(v, lo=0.0, lo_open=True)),
    "downsample_long_side": (None, "downsample_long_side", lambda v: _parse_int(v, lo=8)),
    "sift.octaves": ("sift", "octaves", _parse_octaves),
    "sift.scales_per_octave": ("sift", "scales_per_octave", lambda v: _parse_int(v, lo=1, hi=8)),
    "sift.contrast_thresh": ("sift", "contrast_thresh", lambda v: _parse_float(v, lo=0.0, lo_open=True)),
    "sift.edge_thresh": ("sift", "edge_thresh", lambda v: _parse_float(v, lo=1.0)),
    "sift.max_keypoints": ("sift", "max_keypoints", lambda v: _parse_int(v, lo=1)),
    "match.ratio": ("match", "ratio", lambda v: _parse_float(v, lo=0.0, hi=1.0, lo_open=True)),
    "match.denominator": ("match", "denominator", _parse_denominator),
    "ransac.epsilon_px": ("ransac", "epsilon_px", lambda v: _parse_float(v, lo=0.0, lo_open=True)),
    "ransac.max_iters": ("ransac", "max_iters", lambda v: _parse_int(v, lo=1)),
    "ransac.seed": ("ransac", "seed", lambda v: _parse_int(v, lo=0)),
    "cusum.delta": ("cusum", "delta", _parse_delta),
    "cusum.alpha": ("cusum", "alpha", lambda v: _parse_float(v, lo=0.0, lo_open=True)),
    "cusum.warmup": ("cusum", "warmup", lambda v: _parse_int(v, lo=2)),
    "cusum.rearm_low": ("cusum", "rearm_low", lambda v: _parse_float(v, lo=0.0, hi=1.0)),
    "recognition.chunks": ("recognition", "chunks", lambda v: _parse_int(v, lo=2)),
    "recognition.kl_thresh": ("recognition", "kl_thresh", lambda v: _parse_float(v, lo=0.0, lo_open=True)),
    "recognition.min_mass": ("recognition", "min_mass", lambda v: _parse_float(v, lo=0.0, hi=1.0)),
    "recognition.kmeans_gap": ("recognition", "kmeans_gap", lambda v: _parse_float(v, lo=0.0, lo_open=True)),
    "estimation.t_stand": ("estimation", "t_stand", lambda v: _parse_int(v, lo=1)),
    "estimation.t_lost": ("estimation", "t_lost", lambda v: _parse_int(v, lo=0)),
    "estimation.beta": ("estimation", "beta", lambda v: _parse_float(v, lo=0.0, lo_open=True)),
}

KNOWN_KEYS = tuple(sorted(_KEY_SPECS))


def build_config(values: Mapping[str, Any]) -> PipelineConfig:
    """Build a validated PipelineConfig from a flat dotted-key mapping.

    Raises ConfigError on unknown keys or out-of-range values.
    """
    unknown = sorted(set(values) - set(_KEY_SPECS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

    top: dict[str, Any] = {}
    sections: dict[str, dict[str, Any]] = {}
    for key, raw in values.items():
        section, fname, parser = _KEY_SPECS[key]
        try:
            parsed = parser(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid value for {key!r}: {raw!r} ({exc})") from exc
        if section is None:
            top[fname] = parsed
        else:
            sections.setdefault(section, {})[fname] = parsed

    return PipelineConfig(
        **top,
        sift=FeatureParams(**sections.get("sift", {})),
        match=MatchParams(**sections.get("match", {})),
        ransac=RansacParams(**sections.get("ransac", {})),
        cusum=CusumParams(**sections.get("cusum", {})),
        recognition=RecognitionParams(**sections.get("recognition", {})),
        estimation=EstimationParams(**sections.get("estimation", {})),
    )


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blanks ignored."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: missing key")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def load_config(
    path: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
) -> PipelineConfig:
    """Load a config file (optional) and apply overrides on top."""
    values: dict[str, Any] = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        values.update(parse_config_text(p.read_text()))
    if overrides:
        values.update(overrides)
    return build_config(values)


def to_mapping(cfg: PipelineConfig) -> dict[str, Any]:
    """Flatten a config back to its canonical dotted-key mapping."""
    out: dict[str, Any] = {}
    for key, (section, fname, _) in _KEY_SPECS.items():
        obj = cfg if section is None else getattr(cfg, section)
        out[key] = getattr(obj, fname)
    return out


def config_hash(cfg: PipelineConfig) -> str:
    """Stable hash of every config value, for report provenance."""
    items = []
    for key in KNOWN_KEYS:
        value = to_mapping(cfg)[key]
        items.append(f"{key}={value!r}")
    digest = hashlib.sha256("\n".join(items).encode("utf-8")).hexdigest()
    return digest[:16]


def replace(cfg: PipelineConfig, **top_level: Any) -> PipelineConfig:
    """dataclasses.replace passthrough, re-exported for callers."""
    return dataclasses.replace(cfg, **top_level)
