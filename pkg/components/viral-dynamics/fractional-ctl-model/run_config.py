"""
Run Configuration Loader

Layered, validated configuration for simulation runs.

Key Features:
- Built-in baseline defaults shipped as default_config.yaml
- User files in YAML or JSON, deep-merged over the defaults
- Environment variable overrides
- Dotted-key overrides from the command line
- Section validation with type coercion into typed run settings
"""

import copy
import json
import logging
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from ctl_model import ModelParams, ParameterError, ProliferationKind, State
from fractional_solver import SolverConfig
from parameter_sweep import AxisSpec, SweepError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent / "default_config.yaml"

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

ENV_MAPPINGS = {
    "CTL_MODEL_OUTPUT_DIR": "outputs.directory",
    "CTL_MODEL_LOG_LEVEL": "logging.level",
    "CTL_MODEL_WORKERS": "sweep.workers",
    "CTL_MODEL_STEP_SIZE": "solver.step_size",
    "CTL_MODEL_T_END": "solver.t_end",
}


class ConfigSource(Enum):
    """Configuration source types"""

    FILE = "file"
    ENVIRONMENT = "environment"
    OVERRIDE = "override"
    DEFAULT = "default"


class ConfigError(Exception):
    """Configuration-related errors with context"""

    def __init__(
        self,
        message: str,
        source: Optional[ConfigSource] = None,
        key: Optional[str] = None,
    ):
        self.source = source
        self.key = key
        super().__init__(f"{message} (source: {source}, key: {key})")


@dataclass(frozen=True)
class OutputOptions:
    directory: Path = Path("results")
    svg: bool = False


@dataclass(frozen=True)
class RunConfig:
    """Typed, validated settings for one CLI invocation"""

    params: ModelParams
    kinds: List[ProliferationKind]
    alphas: List[float]
    initial_state: State
    solver: SolverConfig
    outputs: OutputOptions
    axes: List[AxisSpec] = field(default_factory=list)
    workers: int = 4
    log_level: str = "INFO"


class ConfigValidator:
    """Section validation and type coercion"""

    @staticmethod
    def validate_model(section: Dict[str, Any]) -> Dict[str, Any]:
        parameters = section.get("parameters") or {}
        try:
            section["parameters"] = {
                name: float(value) for name, value in parameters.items()
            }
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Model parameters must be numeric: {e}") from e

        alphas = section.get("alphas", [1.0])
        if not isinstance(alphas, list):
            alphas = [alphas]
        section["alphas"] = [float(alpha) for alpha in alphas]
        if not section["alphas"]:
            raise ConfigError("At least one alpha is required", key="model.alphas")

        kinds = section.get("kinds", ["f1"])
        if not isinstance(kinds, list):
            kinds = [kinds]
        section["kinds"] = [str(kind).lower() for kind in kinds]
        if not section["kinds"]:
            raise ConfigError("At least one kind is required", key="model.kinds")
        return section

    @staticmethod
    def validate_solver(section: Dict[str, Any]) -> Dict[str, Any]:
        section["step_size"] = float(section.get("step_size", 0.005))
        section["t_end"] = float(section.get("t_end", 100.0))
        section["corrector_iterations"] = int(section.get("corrector_iterations", 1))
        tolerance = section.get("positivity_tolerance")
        section["positivity_tolerance"] = None if tolerance is None else float(tolerance)
        return section

    @staticmethod
    def validate_outputs(section: Dict[str, Any]) -> Dict[str, Any]:
        section["directory"] = str(section.get("directory", "results"))
        svg = section.get("svg", False)
        if isinstance(svg, str):
            svg = svg.lower() == "true"
        section["svg"] = bool(svg)
        return section

    @staticmethod
    def validate_sweep(section: Dict[str, Any]) -> Dict[str, Any]:
        section["workers"] = int(section.get("workers", 4))
        if section["workers"] < 1:
            raise ConfigError("sweep.workers must be >= 1", key="sweep.workers")
        axes = section.get("axes") or []
        section["axes"] = [str(axis) for axis in axes]
        return section

    @staticmethod
    def validate_logging(section: Dict[str, Any]) -> Dict[str, Any]:
        level = str(section.get("level", "INFO")).upper()
        if level not in LOG_LEVELS:
            raise ConfigError(
                f"Unknown log level {level}, expected one of {', '.join(LOG_LEVELS)}",
                key="logging.level",
            )
        section["level"] = level
        return section


class RunConfigLoader:
    """
    Loads configuration from all sources in precedence order:
    defaults < files < environment < explicit overrides.
    """

    def __init__(
        self,
        config_files: Optional[List[str]] = None,
        overrides: Optional[Dict[str, Any]] = None,
        environ: Optional[Dict[str, str]] = None,
    ):
        self.config_files = [str(path) for path in (config_files or [])]
        self.overrides = overrides or {}
        self.environ = os.environ if environ is None else environ
        self._config: Dict[str, Any] = {}
        self.validators = {
            "model": ConfigValidator.validate_model,
            "solver": ConfigValidator.validate_solver,
            "outputs": ConfigValidator.validate_outputs,
            "sweep": ConfigValidator.validate_sweep,
            "logging": ConfigValidator.validate_logging,
        }
        self._load_all_configs()

    def _load_all_configs(self):
        """Load configuration from all sources"""
        self._config = {}
        self._load_config_file(DEFAULT_CONFIG_PATH, ConfigSource.DEFAULT)

        for config_file in self.config_files:
            if not os.path.exists(config_file):
                raise ConfigError(
                    "Config file does not exist", ConfigSource.FILE, config_file
                )
            self._load_config_file(Path(config_file), ConfigSource.FILE)

        self._load_environment_overrides()

        for key_path, value in self.overrides.items():
            if value is not None:
                self._set_nested_value(key_path, value)
                logger.debug(f"Configuration override: {key_path}={value}")

        self._validate_config()
        logger.info(f"Configuration loaded from {len(self.config_files) + 1} files")

    def _load_config_file(self, file_path: Path, source: ConfigSource):
        """Load configuration from a single file"""
        content = file_path.read_text()

        if file_path.suffix.lower() == ".json":
            try:
                file_config = json.loads(content)
            except json.JSONDecodeError as e:
                logger.error(f"Invalid JSON in {file_path}: {e}")
                raise ConfigError(
                    f"Invalid JSON format: {e}", source, str(file_path)
                ) from e
        elif file_path.suffix.lower() in [".yaml", ".yml"]:
            try:
                file_config = yaml.safe_load(content)
            except yaml.YAMLError as e:
                logger.error(f"Invalid YAML in {file_path}: {e}")
                raise ConfigError(
                    f"Invalid YAML format: {e}", source, str(file_path)
                ) from e
        else:
            logger.warning(f"Unsupported file format: {file_path}")
            return

        if file_config is None:
            return
        if not isinstance(file_config, dict):
            raise ConfigError("Top level must be a mapping", source, str(file_path))

        self._deep_merge(self._config, file_config)
        logger.debug(f"Loaded configuration from {file_path}")

    def _load_environment_overrides(self):
        """Load environment variable overrides"""
        for env_var, config_key in ENV_MAPPINGS.items():
            env_value = self.environ.get(env_var)
            if env_value is not None:
                self._set_nested_value(config_key, env_value)
                logger.info(f"Configuration override from environment: {env_var}")

    def _validate_config(self):
        """Validate configuration using registered validators"""
        try:
            for section, validator in self.validators.items():
                self._config[section] = validator(self._config.get(section) or {})
        except ConfigError:
            raise
        except Exception as e:
            logger.error(f"Configuration validation failed: {e}")
            raise ConfigError(f"Validation failed: {e}") from e

    def _deep_merge(self, target: Dict[str, Any], source: Dict[str, Any]):
        """Deep merge two dictionaries"""
        for key, value in source.items():
            if (
                key in target
                and isinstance(target[key], dict)
                and isinstance(value, dict)
            ):
                self._deep_merge(target[key], value)
            else:
                target[key] = value

    def _set_nested_value(self, key_path: str, value: Any):
        """Set nested dictionary value using dot notation"""
        keys = key_path.split(".")
        current = self._config

        for key in keys[:-1]:
            if not isinstance(current.get(key), dict):
                current[key] = {}
            current = current[key]

        if isinstance(value, str):
            if value.lower() in ["true", "false"]:
                value = value.lower() == "true"
            elif value.isdigit():
                value = int(value)
            elif self._is_float(value):
                value = float(value)

        current[keys[-1]] = value

    def _is_float(self, value: str) -> bool:
        """Check if string represents a float"""
        try:
            float(value)
            return True
        except ValueError:
            return False

    def get(self, key_path: str, default: Any = None) -> Any:
        """Get configuration value by dotted key"""
        try:
            current = self._config
            for key in key_path.split("."):
                current = current[key]
            return current
        except (KeyError, TypeError):
            if default is not None:
                return default
            raise ConfigError(
                f"Configuration key not found: {key_path}", key=key_path
            ) from None

    def resolved(self) -> Dict[str, Any]:
        """Deep copy of the merged configuration"""
        return copy.deepcopy(self._config)

    def build(self) -> RunConfig:
        """Typed run settings; domain validation errors become ConfigError"""
        model = self._config["model"]
        try:
            params = ModelParams.from_dict(
                {**model["parameters"], "alpha": model["alphas"][0]}
            )
            for alpha in model["alphas"]:
                params.with_overrides(alpha=alpha)
            kinds = [ProliferationKind.parse(kind) for kind in model["kinds"]]
            initial = self._config.get("initial_state") or {}
            initial_state = State(
                T=float(initial.get("T", 1000.0)),
                I=float(initial.get("I", 0.0)),
                V=float(initial.get("V", 10.0)),
                C=float(initial.get("C", 333.0)),
            )
            solver = SolverConfig(alpha=model["alphas"][0], **self._config["solver"])
            axes = [AxisSpec.parse(spec) for spec in self._config["sweep"]["axes"]]
        except (ParameterError, SweepError, ValueError, TypeError) as e:
            raise ConfigError(f"Invalid run configuration: {e}") from e

        outputs = self._config["outputs"]
        return RunConfig(
            params=params,
            kinds=kinds,
            alphas=list(model["alphas"]),
            initial_state=initial_state,
            solver=solver,
            outputs=OutputOptions(
                directory=Path(outputs["directory"]), svg=outputs["svg"]
            ),
            axes=axes,
            workers=self._config["sweep"]["workers"],
            log_level=self._config["logging"]["level"],
        )

    def __repr__(self) -> str:
        return f"RunConfigLoader(files={self.config_files}, overrides={list(self.overrides)})"
