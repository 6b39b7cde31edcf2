"""Pydantic models for everything that crosses a serialization boundary."""

import math
from typing import ClassVar, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class CouplingEntry(BaseModel):
    """One coefficient of a coupling document."""
    lag: List[int]
    value: float


class CouplingDocument(BaseModel):
    """JSON form of a coupling spec; symmetry completion happens on build."""
    dimension: int = Field(gt=0)
    extents: List[int]
    coefficients: List[CouplingEntry]

    @model_validator(mode="after")
    def _check_shapes(self) -> "CouplingDocument":
        if len(self.extents) != self.dimension:
            raise ValueError(f"extents has {len(self.extents)} axes, dimension is {self.dimension}")
        if any(n <= 0 for n in self.extents):
            raise ValueError("extents must be positive")
        for entry in self.coefficients:
            if len(entry.lag) != self.dimension:
                raise ValueError(f"lag {entry.lag} does not have {self.dimension} components")
        return self


class EtaChainParams(BaseModel):
    """Parameters of the next-nearest-neighbour example chain."""
    model_config = ConfigDict(frozen=True)

    eta: float = Field(gt=0)
    n: int = Field(ge=5)


class RootInfo(BaseModel):
    model_config = ConfigDict(frozen=True)

    angle: float = Field(ge=0, lt=2 * math.pi)
    multiplicity: int = Field(gt=0)


class SpectralClassification(BaseModel):
    """Regular/Singular verdict with unit-circle roots of the spectral function.

    ``multiplicity`` counts the order of vanishing of lambda^{1/2}, so the
    spectral function carries the factor (2 - 2cos(theta - angle))^multiplicity.
    """
    model_config = ConfigDict(frozen=True)

    kind: Literal["Regular", "Singular"]
    roots: List[RootInfo] = []
    widom_coefficient: float = 0.0

    @model_validator(mode="after")
    def _kind_matches_roots(self) -> "SpectralClassification":
        if (self.kind == "Singular") != bool(self.roots):
            raise ValueError("kind must be Singular exactly when roots are present")
        return self

    @property
    def is_regular(self) -> bool:
        return self.kind == "Regular"


class CorrelationEstimate(BaseModel):
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    xi: float
    decay_class: Literal["Exponential", "PowerLaw", "Zero"]
    fit_window: Optional[Tuple[int, int]] = None
    fit_residual: Optional[float] = None
    slope: Optional[float] = None


class EntanglementReport(BaseModel):
    """Entropy, mutual information and bounds for one partition."""
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    n_sites: int
    extents: List[int]
    block: List[int]
    mu_spectrum: List[float]
    entropy: float
    mutual_information: float
    det_lower_bound: float
    negativity_upper_bound: float
    szego_lower_bound: Optional[float] = None
    correlation: Optional[CorrelationEstimate] = None

    CSV_HEADER: ClassVar[Tuple[str, ...]] = ("N", "N1", "S", "I", "lower", "upper", "xi", "decay_class")

    @property
    def block_size(self) -> int:
        return math.prod(self.block)

    @property
    def lower_bound(self) -> float:
        if self.szego_lower_bound is not None:
            return self.szego_lower_bound
        return self.det_lower_bound

    def csv_row(self) -> Tuple:
        xi = self.correlation.xi if self.correlation else float("nan")
        decay = self.correlation.decay_class if self.correlation else ""
        return (
            self.n_sites,
            self.block_size,
            f"{self.entropy:.12g}",
            f"{self.mutual_information:.12g}",
            f"{self.lower_bound:.12g}",
            f"{self.negativity_upper_bound:.12g}",
            f"{xi:.12g}",
            decay,
        )


class ScalingFit(BaseModel):
    """Least-squares description of a quantity against ln x, x, or a plateau."""
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    model: Literal["LogGrowth", "Saturation", "Linear"]
    slope: float = 0.0
    intercept: float = 0.0
    slope_stderr: float = 0.0
    plateau: Optional[float] = None
    r_squared: float = Field(ge=0.0, le=1.0)
    max_residual: float
    x_min: float
    x_max: float
    n_points: int
    reference: Optional[float] = None
    xs: List[float] = []
    ys: List[float] = []

    @property
    def deviation(self) -> Optional[float]:
        """Fitted slope (or plateau) minus the reference value, if any."""
        if self.reference is None:
            return None
        value = self.plateau if self.model == "Saturation" else self.slope
        return value - self.reference


class AreaLawRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    entropy: float
    entropy_per_boundary: float
    boundary_excess: float
    excess_per_boundary: float
    reference_available: bool = True
