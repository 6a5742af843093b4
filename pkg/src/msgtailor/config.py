"""Engine configuration.

The config file is INI: one section per key family, so ``timing.tau_minutes``
lives under ``[timing]`` as ``tau_minutes``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    # timing.*
    tau_minutes: float = 60.0
    slot_prior: float = 0.1
    max_slots: int = 6
    # plan.*
    messages_per_day: int = 1
    cohort_cap: int = 120
    master_seed: int = 0
    # snapshot.*
    min_dwell_seconds: float = 4.0
    # ppal.*
    activity_window_days: int = 7
    # catalog.*
    pool_size: int = 150

    def __post_init__(self) -> None:
        if self.messages_per_day < 1:
            raise ConfigError("plan.messages_per_day must be >= 1")
        if self.cohort_cap < 1:
            raise ConfigError("plan.cohort_cap must be >= 1")
        if not 1 <= self.max_slots:
            raise ConfigError("timing.max_slots must be >= 1")
        if self.tau_minutes <= 0:
            raise ConfigError("timing.tau_minutes must be > 0")
        if self.slot_prior < 0:
            raise ConfigError("timing.slot_prior must be >= 0")
        if self.activity_window_days < 1:
            raise ConfigError("ppal.activity_window_days must be >= 1")


SECTIONS: dict[str, tuple[str, ...]] = {
    "timing": ("tau_minutes", "slot_prior", "max_slots"),
    "plan": ("messages_per_day", "cohort_cap", "master_seed"),
    "snapshot": ("min_dwell_seconds",),
    "ppal": ("activity_window_days",),
    "catalog": ("pool_size",),
}

_TYPES = {f.name: f.type for f in fields(EngineConfig)}


def _coerce(name: str, raw: str):
    kind = _TYPES[name]
    try:
        return int(raw, 0) if kind == "int" else float(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {kind}") from None


def load_config(path: str | Path | None = None, **overrides) -> EngineConfig:
    """Read an INI config file (optional) and apply keyword overrides."""
    values: dict[str, object] = {}
    if path is not None:
        parser = configparser.ConfigParser()
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"{path}: {exc.strerror}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        for section in parser.sections():
            known = SECTIONS.get(section)
            if known is None:
                raise ConfigError(f"{path}: unknown section [{section}]")
            for key, raw in parser.items(section):
                if key not in known:
                    raise ConfigError(f"{path}: unknown key {section}.{key}")
                values[key] = _coerce(key, raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return replace(EngineConfig(), **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
