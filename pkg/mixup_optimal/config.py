"""Experiment configuration for the command-line interface.

An :class:`ExperimentConfig` is assembled from CLI flags and then updated
from an optional JSON or YAML file.  Its JSON form is canonical (sorted
keys), and the SHA-256 of that form names the run directory, so equal
configurations always write to the same place.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from mixup_optimal.constants import (
    DEFAULT_OUTPUT_ROOT,
    DEFAULT_QUADRATURE_NODES,
    ENV_MNIST_DIR,
    ENV_OUTPUT_ROOT,
)
from mixup_optimal.exceptions import ConfigError

logger = logging.getLogger(__name__)

COMMANDS: tuple[str, ...] = (
    "oracle",
    "train",
    "recover",
    "assumptions",
    "linear",
    "fetch-mnist",
)

# Fields that change where or how fast a run happens but not its results.
_NON_RESULT_FIELDS = frozenset({"output_root", "workers"})


def load_env() -> None:
    """Load a project ``.env`` file when python-dotenv is installed."""
    try:
        from dotenv import load_dotenv

        load_dotenv()
    except ImportError:
        pass  # python-dotenv not installed; use the real environment.


def default_output_root() -> str:
    return os.environ.get(ENV_OUTPUT_ROOT, "") or DEFAULT_OUTPUT_ROOT


def default_mnist_dir() -> str | None:
    return os.environ.get(ENV_MNIST_DIR, "") or None


@dataclass
class ExperimentConfig:
    """Every knob of every subcommand; unused fields keep their defaults."""

    command: str
    # data
    dataset: str = "x3k2"
    separation: float = 0.5
    noise_sd: float = 0.1
    n_per_class: int = 500
    fraction: float = 1.0
    mnist_dir: str | None = None
    # mixing
    kind: str = "beta"
    alphas: list[float] = field(default_factory=lambda: [1.0])
    density_csv: str | None = None
    quadrature_nodes: int = DEFAULT_QUADRATURE_NODES
    # oracle / assumptions
    eps: float | None = None
    delta: float = 0.25
    limit: bool = False
    probes: list[list[float]] = field(default_factory=list)
    grid: int | None = None
    crossover: bool = False
    tol: float = 1e-9
    tol_line: float | None = None
    n_samples: int | None = None
    # training
    modes: list[str] = field(default_factory=lambda: ["mixup"])
    seeds: int = 10
    seed: int = 0
    epochs: int | None = None
    batch_size: int | None = None
    hidden: int | None = None
    mixup_samples: int | None = None
    # recovery
    m: int = 6
    dim: int = 2
    unlabeled: bool = False
    rank_trials: int = 0
    # linear
    n: int = 20
    d: int = 650
    trials: int = 50
    same_class_terms: bool = True
    # run
    output_root: str = field(default_factory=default_output_root)
    workers: int = 1

    def __post_init__(self) -> None:
        self._coerce()
        self.validate()

    def _coerce(self) -> None:
        # PyYAML reads "1e3" as a string.
        try:
            self.alphas = [float(a) for a in self.alphas]
            self.probes = [[float(c) for c in probe] for probe in self.probes]
            for name in ("separation", "noise_sd", "fraction", "delta", "tol"):
                setattr(self, name, float(getattr(self, name)))
            for name in ("eps", "tol_line"):
                value = getattr(self, name)
                if value is not None:
                    setattr(self, name, float(value))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"non-numeric configuration value: {exc}") from exc

    # ------------------------------------------------------------------
    # Validation
    # ------------------------------------------------------------------

    def validate(self) -> None:
        """Raise :class:`ConfigError` naming the first invalid field."""
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}", field="command")
        if self.kind not in ("beta", "uniform", "tabulated"):
            raise ConfigError(f"unknown mixing kind {self.kind!r}", field="kind")
        if self.kind == "tabulated" and not self.density_csv:
            raise ConfigError("tabulated mixing needs density_csv", field="density_csv")
        if not self.alphas or any(a <= 0 for a in self.alphas):
            raise ConfigError(
                f"alphas must be positive, got {self.alphas}", field="alphas"
            )
        if self.eps is not None and not self.eps > 0:
            raise ConfigError(f"eps must be positive, got {self.eps}", field="eps")
        if not 0.0 < self.delta < 0.5:
            raise ConfigError(
                f"delta must lie in (0, 1/2), got {self.delta}", field="delta"
            )
        if not 0.0 < self.fraction <= 1.0:
            raise ConfigError(
                f"fraction must lie in (0, 1], got {self.fraction}", field="fraction"
            )
        for mode in self.modes:
            if mode not in ("erm", "mixup"):
                raise ConfigError(f"unknown training mode {mode!r}", field="modes")
        for name in ("seeds", "m", "dim", "n", "d", "trials", "workers", "n_per_class"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1", field=name)
        for name in (
            "epochs",
            "batch_size",
            "hidden",
            "mixup_samples",
            "grid",
            "n_samples",
        ):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"{name} must be >= 1", field=name)
        if self.rank_trials < 0:
            raise ConfigError("rank_trials must be >= 0", field="rank_trials")

    # ------------------------------------------------------------------
    # Serialisation
    # ------------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        """Build a config, rejecting keys that are not fields."""
        known = {f.name for f in dataclasses.fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(f"unknown configuration field {key!r}", field=key)
        if "command" not in data:
            raise ConfigError("configuration has no command", field="command")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def updated(self, overrides: dict[str, Any]) -> ExperimentConfig:
        """Copy with *overrides* applied; unknown keys raise ConfigError."""
        merged = self.to_dict()
        merged.update(overrides)
        return ExperimentConfig.from_dict(merged)

    # ------------------------------------------------------------------
    # Run directory
    # ------------------------------------------------------------------

    @property
    def run_id(self) -> str:
        """``<command>-<first 10 hex digits of the config hash>``."""
        payload = {
            k: v for k, v in self.to_dict().items() if k not in _NON_RESULT_FIELDS
        }
        canonical = json.dumps(payload, sort_keys=True).encode()
        digest = hashlib.sha256(canonical).hexdigest()
        return f"{self.command}-{digest[:10]}"

    @property
    def run_dir(self) -> Path:
        return Path(self.output_root) / self.run_id


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a JSON or YAML mapping of configuration overrides.

    Raises
    ------
    ConfigError
        If the file is missing, unparsable, or not a mapping.
    """
    p = Path(path)
    try:
        data = yaml.safe_load(p.read_text())
    except OSError as exc:
        raise ConfigError(
            f"cannot read config file {p}: {exc}", field="config"
        ) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(
            f"cannot parse config file {p}: {exc}", field="config"
        ) from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config file {p} must hold a mapping", field="config")
    logger.debug("loaded %d config overrides from %s", len(data), p)
    return data
