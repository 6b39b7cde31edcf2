from typing import Any, Dict, List, Literal

from pydantic import BaseModel, ConfigDict, Field


class Tolerances(BaseModel):
    """Numerical tolerances used across the pipeline."""
    model_config = ConfigDict(frozen=True)

    positivity: float = 1e-12
    symmetry: float = 1e-12
    root_radius: float = 1e-3
    root_value: float = 1e-8
    root_cluster: float = 1e-3
    kernel_imaginary: float = 1e-10
    mu_floor: float = 1e-9
    entropy_series: float = 1e-8
    mutual_information_agreement: float = 1e-6
    correlation_noise_floor: float = 1e-13
    decay_window_lengths: float = 4.0


class Limits(BaseModel):
    model_config = ConfigDict(frozen=True)

    dense_cap: int = Field(4096, gt=0)
    quadrature_min_points: int = Field(4096, gt=0)
    quadrature_points_per_order: int = Field(32, gt=0)
    min_decay_lags: int = Field(8, ge=3)


class KernelOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    backend: Literal["circulant", "dense"] = "circulant"


class ScalingOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    fit_min_block: int = 8
    szego_plateau_min_block: int = 64
    size_snap_window: int = Field(8, ge=0)
    symbol_grid: int = Field(256, ge=16)
    szego_order: int = Field(200, ge=1)


class Fig1Defaults(BaseModel):
    model_config = ConfigDict(frozen=True)

    etas: List[float] = [0.2, 0.6, 1.2, 1.6]
    n: int = 512
    sizes: str = "2:128"
    saturation_from: int = 32


class LoggingOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    level: str = "INFO"


class Settings(BaseModel):
    """Validated view of config/settings.yaml."""
    model_config = ConfigDict(frozen=True)

    tolerances: Tolerances = Tolerances()
    limits: Limits = Limits()
    kernel: KernelOptions = KernelOptions()
    scaling: ScalingOptions = ScalingOptions()
    fig1: Fig1Defaults = Fig1Defaults()
    logging: LoggingOptions = LoggingOptions()

    def with_overrides(self, overrides: Dict[str, Any]) -> "Settings":
        """Returns a copy with `name=value` overrides applied.

        Bare names address the tolerances section; dotted names
        (``limits.dense_cap``) address any section.
        """
        data = self.model_dump()
        for name, value in overrides.items():
            section, _, key = name.rpartition(".")
            section = section or "tolerances"
            if section not in data or key not in data[section]:
                raise KeyError(f"Unknown setting '{name}'")
            data[section][key] = value
        return Settings.model_validate(data)
