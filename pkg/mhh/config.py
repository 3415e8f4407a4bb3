"""
Run Configuration
Merges built-in defaults, environment variables, an optional JSON/YAML config
file (validated against schemas/run-config-schema.json) and explicit flags into
a RunConfig.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv
from jsonschema import Draft7Validator
from sympy import isprime

logger = logging.getLogger(__name__)

PACKAGE_DIR = Path(__file__).parent
PROJECT_ROOT = PACKAGE_DIR.parent
SCHEMA_FILE = PROJECT_ROOT / "schemas" / "run-config-schema.json"

COMMANDS = ("tor", "verify", "chart", "hilbert")
VARIANTS = ("integral", "mod-tau", "etale")
FORMATS = ("tsv", "json", "svg")
Y_AXES = ("weight", "chow")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

ENV_PRIME = "MHH_PRIME"
ENV_SEED = "MHH_SEED"
ENV_LOG_LEVEL = "MHH_LOG_LEVEL"


class ConfigError(ValueError):
    """Invalid configuration: bad file, schema violation or broken invariant."""


@dataclass
class RunConfig:
    command: str = "tor"
    suite: Optional[str] = None
    ring: Optional[str] = None
    prime: int = 2
    variant: str = "integral"
    stem_max: int = 12
    weight_min: int = 0
    weight_max: Optional[int] = None
    filtration_max: Optional[int] = None
    f_support_max: Optional[int] = None
    f_value_max: Optional[int] = None
    max_index: Optional[int] = None
    format: str = "tsv"
    out: Optional[str] = None
    seed: int = 0
    cases: int = 1000
    y_axis: str = "weight"
    log_level: str = "WARNING"

    @property
    def weight_window(self):
        """(weight_min, weight_max); weight_max defaults to stem_max."""
        top = self.stem_max if self.weight_max is None else self.weight_max
        return self.weight_min, top

    @property
    def variant_key(self) -> str:
        return self.variant.replace("-", "_")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


FIELD_NAMES = tuple(f.name for f in fields(RunConfig))


def load_environment(env_file: Optional[Path] = None) -> Dict[str, Any]:
    """Read MHH_* variables (after loading a .env file if present)."""
    load_dotenv(env_file or PROJECT_ROOT / ".env")
    values: Dict[str, Any] = {}
    for key, name, cast in ((ENV_PRIME, "prime", int), (ENV_SEED, "seed", int),
                            (ENV_LOG_LEVEL, "log_level", str)):
        raw = os.environ.get(key)
        if raw is None or raw == "":
            continue
        try:
            values[name] = cast(raw)
        except ValueError:
            raise ConfigError(f"environment variable {key}={raw!r} is not a valid {cast.__name__}")
    return values


def load_schema(schema_path: Optional[Path] = None) -> Dict:
    path = Path(schema_path or SCHEMA_FILE)
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"schema file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in schema file {path}: {e}")


def schema_errors(data: Any, schema: Dict) -> List[str]:
    """Schema violations formatted as '[path -> path] message'."""
    validator = Draft7Validator(schema)
    messages = []
    for error in sorted(validator.iter_errors(data), key=lambda e: list(e.path)):
        path = " -> ".join(str(p) for p in error.path) if error.path else "root"
        messages.append(f"[{path}] {error.message}")
    return messages


def load_config_file(path: str, schema: Optional[Dict] = None) -> Dict[str, Any]:
    """Parse a JSON or YAML run configuration and validate it."""
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(file_path, 'r') as f:
            if file_path.suffix in ('.yaml', '.yml'):
                data = yaml.safe_load(f)
            else:
                data = json.load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in {path}: {e}")
    if data is None:
        data = {}
    errors = schema_errors(data, schema if schema is not None else load_schema())
    if errors:
        raise ConfigError(f"{path} does not match the run-config schema: " + "; ".join(errors))
    return {key.replace("-", "_"): value for key, value in data.items()}


def validate(config: RunConfig) -> RunConfig:
    """Check the merged invariants; raise ConfigError on the first violation."""
    if not isinstance(config.prime, int) or not isprime(config.prime):
        raise ConfigError(f"modulus must be prime (got {config.prime})")
    if config.command not in COMMANDS:
        raise ConfigError(f"unknown command {config.command!r}; expected one of {', '.join(COMMANDS)}")
    if config.variant not in VARIANTS:
        raise ConfigError(f"unknown variant {config.variant!r}; expected one of {', '.join(VARIANTS)}")
    if config.format not in FORMATS:
        raise ConfigError(f"unknown format {config.format!r}; expected one of {', '.join(FORMATS)}")
    if config.y_axis not in Y_AXES:
        raise ConfigError(f"unknown y axis {config.y_axis!r}; expected weight or chow")
    if config.log_level.upper() not in LOG_LEVELS:
        raise ConfigError(f"unknown log level {config.log_level!r}")
    config.log_level = config.log_level.upper()
    for name in ("stem_max", "filtration_max", "f_support_max", "f_value_max", "max_index",
                 "seed", "cases"):
        value = getattr(config, name)
        if value is not None and value < 0:
            raise ConfigError(f"{name} must be >= 0 (got {value})")
    low, high = config.weight_window
    if low > high:
        raise ConfigError(f"empty weight window [{low}, {high}]")
    return config


def build_config(flags: Optional[Dict[str, Any]] = None, config_path: Optional[str] = None,
                 use_environment: bool = True) -> RunConfig:
    """defaults < environment < config file < flags (None flag values are ignored)."""
    merged: Dict[str, Any] = {}
    if use_environment:
        merged.update(load_environment())
    if config_path:
        merged.update(load_config_file(config_path))
    for key, value in (flags or {}).items():
        if value is not None:
            merged[key] = value
    unknown = sorted(set(merged) - set(FIELD_NAMES))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    config = RunConfig(**merged)
    logger.debug(f"run config: {config.to_dict()}")
    return validate(config)
