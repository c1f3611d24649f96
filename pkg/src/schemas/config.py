import json
from pathlib import Path
from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from src.fields.corpus import builtin_profile
from src.fields.grids import TorusGrid
from src.fields.snapshot import read_snapshot
from src.nash_moser.indices import check_hypotheses
from src.utils.config import settings
from src.utils.errors import ConfigError, SnapshotError

SCHEMA_VERSION = "CFG v1"
Mode = Literal["solve-geodesic", "disc-solve", "verify-suite", "schedule", "shift-background"]
BATTERY_MODULES = ("smoothing", "elliptic", "disc_family", "potential", "strip_geodesic", "nash_moser", "oracle",
                   "end_to_end")


class EndpointSpec(BaseModel):
    """A torus potential: a builtin profile times an amplitude, or a GFLD snapshot."""
    profile: Optional[str] = Field(default="zero", description="Builtin profile name, e.g. 'cos_x'")
    amplitude: float = 0.0
    snapshot: Optional[str] = Field(default=None, description="Path of a GFLD v1 torus snapshot")

    @model_validator(mode="after")
    def _one_source(self) -> "EndpointSpec":
        if self.snapshot is None and self.profile is None:
            raise ValueError("endpoint needs a profile or a snapshot")
        return self

    def values(self, torus: TorusGrid, seed: int = 0) -> np.ndarray:
        """
        Raises:
            SnapshotError: If the snapshot is unreadable or not on this torus
        """
        if self.snapshot is not None:
            kind, values = read_snapshot(self.snapshot)
            if values.shape != torus.shape or np.iscomplexobj(values):
                raise SnapshotError(
                    f"{self.snapshot}: expected a real {torus.shape} torus field, got {kind} {values.shape}"
                )
            return np.asarray(values, dtype=float)
        return builtin_profile(self.profile, torus, self.amplitude, seed)


class IterationSettings(BaseModel):
    """Discretization and stopping parameters shared by the modes."""
    t_points: int = Field(default=8, ge=4)
    boundary_points: int = Field(default=512, ge=64)
    max_steps: int = Field(default=20, ge=1)
    target: float = Field(default=1e-6, gt=0.0)
    epsilon: float = Field(default=1.0, gt=0.0, description="Radius of the neighbourhood |f|_b < epsilon")
    strict_smallness: bool = False
    checkpoint_every: int = Field(default=0, ge=0)
    disc_tol: float = Field(default=settings.DISC_TOL, gt=0.0)
    n_lambda: int = Field(default=8, ge=2)
    oracle_t_steps: int = Field(default=64, ge=6)


class RunConfig(BaseModel):
    """Schema-versioned run configuration (one JSON file per run)."""
    schema_version: Literal["CFG v1"] = SCHEMA_VERSION
    mode: Mode
    k: float = 5.0
    J: float = 0.1
    epsilon_amplitude: float = Field(default=0.05, ge=0.0)
    Theta: float = Field(default=settings.DEFAULT_THETA)
    resolutions: List[int] = Field(default_factory=lambda: [settings.DEFAULT_TORUS_POINTS])
    phi0: EndpointSpec = Field(default_factory=EndpointSpec)
    phi1: EndpointSpec = Field(default_factory=EndpointSpec)
    background: Optional[EndpointSpec] = None
    output_dir: str = settings.OUTPUT_DIR
    seed: int = settings.SEED
    thread_count: Optional[int] = Field(default=None, ge=1)
    iteration: IterationSettings = Field(default_factory=IterationSettings)
    only: Optional[str] = Field(default=None, description="Restrict verify-suite to one module")

    @field_validator("resolutions")
    @classmethod
    def _even_resolutions(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one resolution is required")
        for n in value:
            if n < 8 or n % 2:
                raise ValueError(f"torus resolution must be even and >= 8, got {n}")
        return value

    @field_validator("only")
    @classmethod
    def _known_module(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in BATTERY_MODULES:
            raise ValueError(f"unknown module {value!r}; choose from {', '.join(BATTERY_MODULES)}")
        return value

    @model_validator(mode="after")
    def _mode_requirements(self) -> "RunConfig":
        if self.mode == "shift-background" and self.background is None:
            raise ValueError("shift-background mode needs a background potential")
        if self.mode in ("solve-geodesic", "shift-background", "schedule"):
            try:
                check_hypotheses(self.k, self.J)
            except ConfigError as e:
                raise ValueError(str(e)) from e
            if self.Theta <= 4.0:
                raise ValueError(f"Theta must exceed 4, got {self.Theta}")
        return self

    @property
    def resolution(self) -> int:
        return self.resolutions[0]

    def effective_thread_count(self) -> Optional[int]:
        """THREAD_COUNT from the environment overrides the file."""
        return settings.THREAD_COUNT or self.thread_count


def load_config(source: Union[str, Path, dict]) -> RunConfig:
    """
    Read and validate a run configuration.

    Raises:
        ConfigError: On unreadable JSON, a wrong schema version or invalid fields
    """
    if isinstance(source, dict):
        data = source
    else:
        path = Path(source)
        try:
            data = json.loads(path.read_text())
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})") from e
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config schema {version!r}, expected {SCHEMA_VERSION!r}")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {e}") from e
