"""Run configuration: JSON file plus ``key=value`` overrides."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

from .errors import ConfigError
from .omega import OmegaParams

MODES = ("absolute", "signed")
Y_AXES = ("down", "up")


@dataclass(frozen=True)
class Thresholds:
    """Descriptor thresholds; with ``relative`` they are fractions of the s-range."""

    omega2_th: float = 0.15
    omega3_th: float = 0.15
    omega4_th: float = 0.15
    omega5_th: float = 0.25
    mode2: str = "absolute"
    mode3: str = "absolute"
    relative: bool = True

    def __post_init__(self):
        if self.mode2 not in MODES or self.mode3 not in MODES:
            raise ConfigError(f"comparison modes must be one of {MODES}")
        if not (self.omega4_th > 0 and self.omega5_th > 0):
            raise ConfigError("omega4_th and omega5_th must be positive")
        if self.mode2 == "absolute" and not self.omega2_th > 0:
            raise ConfigError("omega2_th must be positive in absolute mode")
        if self.mode3 == "absolute" and not self.omega3_th > 0:
            raise ConfigError("omega3_th must be positive in absolute mode")

    def scaled(self, factor: float) -> "Thresholds":
        """Absolute thresholds for a pattern whose s-range is ``factor``."""
        if not self.relative:
            return self
        return replace(
            self, relative=False,
            omega2_th=self.omega2_th * factor, omega3_th=self.omega3_th * factor,
            omega4_th=self.omega4_th * factor, omega5_th=self.omega5_th * factor,
        )


@dataclass(frozen=True)
class RunConfig:
    omega: OmegaParams = field(default_factory=OmegaParams)
    thresholds: Thresholds = field(default_factory=Thresholds)
    smoothing_window: int = 5
    flatness: float = 0.02  # flank-extremum prominence, fraction of the s-range
    valley_tol: float = 0.10  # second-valley depth tolerance, fraction of the s-range
    max_dropped: float = 0.2
    gray_threshold: int = 128
    y_axis: str = "down"
    baseline: float | None = None  # None: smallest lift that keeps every height invertible
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.smoothing_window < 1 or self.smoothing_window % 2 == 0:
            raise ConfigError("smoothing_window must be a positive odd integer")
        if not 0 <= self.flatness < 1:
            raise ConfigError("flatness must be in [0, 1)")
        if not 0 <= self.valley_tol < 1:
            raise ConfigError("valley_tol must be in [0, 1)")
        if not 0 <= self.max_dropped <= 1:
            raise ConfigError("max_dropped must be in [0, 1]")
        if not 0 <= self.gray_threshold <= 255:
            raise ConfigError("gray_threshold must be in 0..255")
        if self.y_axis not in Y_AXES:
            raise ConfigError(f"y_axis must be one of {Y_AXES}")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        _reject_unknown(data, cls, "config")
        try:
            omega = data.pop("omega", {})
            _reject_unknown(omega, OmegaParams, "omega")
            th = data.pop("thresholds", {})
            _reject_unknown(th, Thresholds, "thresholds")
            return cls(omega=OmegaParams(**omega), thresholds=Thresholds(**th), **data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _reject_unknown(data: dict, cls, where: str) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a JSON object")
    known = {f.name for f in fields(cls)}
    extra = sorted(set(data) - known)
    if extra:
        raise ConfigError(f"unknown {where} keys: {', '.join(extra)}")


def _coerce(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply dotted ``key=value`` overrides (values parsed as JSON when possible)."""
    data = json.loads(json.dumps(data))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        node = data
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} descends into a scalar")
        node[parts[-1]] = _coerce(value.strip())
    return data


def load_config(path: str | os.PathLike | None = None, overrides: list[str] | None = None) -> RunConfig:
    """Defaults, then the JSON file at ``path``, then ``overrides``."""
    data = RunConfig().to_dict()
    if path is not None:
        try:
            with open(path) as fh:
                file_data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        _reject_unknown(file_data, RunConfig, "config")
        for key, value in file_data.items():
            if isinstance(value, dict) and isinstance(data.get(key), dict) and key != "meta":
                data[key].update(value)
            else:
                data[key] = value
    if overrides:
        data = apply_overrides(data, overrides)
    return RunConfig.from_dict(data)
