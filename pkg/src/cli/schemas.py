import hashlib
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, model_validator

from src.config import get_settings
from src.config.settings import Settings
from src.core.errors import SpecSourceError
from src.core.lattice_model import CouplingSpec, eta_chain_builder
from src.core.scaling import SpecBuilder
from src.core.spec_loader import SpecLoader


def parse_sizes(text: str) -> List[int]:
    """``a:b[:step]`` -> [a, a+step, ..., <= b]."""
    try:
        parts = [int(p) for p in text.split(":")]
    except ValueError as e:
        raise SpecSourceError(f"sizes must look like a:b[:step], got '{text}'") from e
    if len(parts) not in (2, 3):
        raise SpecSourceError(f"sizes must look like a:b[:step], got '{text}'")
    start, stop = parts[0], parts[1]
    step = parts[2] if len(parts) == 3 else 1
    if start < 1 or stop < start or step < 1:
        raise SpecSourceError(f"sizes '{text}' do not describe an ascending positive range")
    return list(range(start, stop + 1, step))


def parse_overrides(pairs: Optional[List[str]]) -> Dict[str, str]:
    overrides: Dict[str, str] = {}
    for pair in pairs or []:
        name, sep, value = pair.partition("=")
        if not sep or not name.strip():
            raise SpecSourceError(f"tolerance override must look like name=value, got '{pair}'")
        overrides[name.strip()] = value.strip()
    return overrides


class RunConfig(BaseModel):
    """Everything one command invocation depends on."""
    model_config = ConfigDict(frozen=True)

    command: str
    eta: Optional[float] = Field(None, gt=0)
    etas: List[PositiveFloat] = []
    n: Optional[int] = Field(None, ge=5)
    spec_path: Optional[Path] = None
    n1: Optional[int] = Field(None, ge=1)
    sizes: Optional[str] = None
    out_dir: Optional[Path] = None
    tol_overrides: Dict[str, str] = {}

    @model_validator(mode="after")
    def _one_spec_source(self) -> "RunConfig":
        if self.eta is not None and self.spec_path is not None:
            raise ValueError("give either --eta or --spec, not both")
        return self

    @classmethod
    def build(cls, **fields) -> "RunConfig":
        try:
            return cls(**fields)
        except ValidationError as e:
            raise SpecSourceError(str(e)) from e

    def config_hash(self) -> str:
        """Short hash of every input except the output location."""
        payload = self.model_dump_json(exclude={"out_dir"})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]

    def settings(self) -> Settings:
        try:
            return get_settings().with_overrides(self.tol_overrides)
        except KeyError as e:
            raise SpecSourceError(str(e)) from e
        except ValidationError as e:
            raise SpecSourceError(f"invalid override: {e}") from e

    def spec_builder(self) -> SpecBuilder:
        """n -> spec for the configured source."""
        if self.eta is not None:
            return eta_chain_builder(self.eta, self.settings().tolerances)
        if self.spec_path is not None:
            loader = SpecLoader(self.settings().tolerances)
            return lambda n: loader.load(self.spec_path, n)
        raise SpecSourceError("no spec source: give --eta with --n, or --spec")

    def spec(self) -> CouplingSpec:
        if self.spec_path is not None:
            return SpecLoader(self.settings().tolerances).load(self.spec_path, self.n)
        if self.eta is None:
            raise SpecSourceError("no spec source: give --eta with --n, or --spec")
        if self.n is None:
            raise SpecSourceError("--eta needs --n")
        return self.spec_builder()(self.n)

    def size_list(self, default: str) -> List[int]:
        return parse_sizes(self.sizes or default)
