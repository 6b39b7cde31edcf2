import json
from pathlib import Path
from typing import Optional, Sequence, Union

from pydantic import ValidationError

from src.config.settings import Tolerances
from src.core.errors import SpecSourceError
from src.core.lattice_model import CouplingSpec, spec_from_document
from src.core.schemas import CouplingDocument
from src.utils.logger import get_logger

logger = get_logger(__name__)


class SpecLoader:
    """
    Reads coupling documents from JSON files and turns them into validated
    coupling specs.
    """

    def __init__(self, tolerances: Optional[Tolerances] = None):
        self.tolerances = tolerances

    def read_document(self, path: Union[str, Path]) -> CouplingDocument:
        """
        Parses a JSON coupling document.

        Raises:
            FileNotFoundError: If the file doesn't exist
            SpecSourceError: If the file is not a valid coupling document
        """
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                return CouplingDocument.model_validate(json.load(f))
        except FileNotFoundError:
            logger.error(f"Spec file not found at: {path}")
            raise
        except json.JSONDecodeError as e:
            logger.error(f"Error parsing JSON in spec file: {e}")
            raise SpecSourceError(f"Invalid JSON in spec file {path}: {e}") from e
        except ValidationError as e:
            logger.error(f"Invalid coupling document {path}: {e}")
            raise SpecSourceError(f"Invalid coupling document {path}: {e}") from e

    def load(self, path: Union[str, Path], extents: Optional[Union[int, Sequence[int]]] = None) -> CouplingSpec:
        """Loads a spec, optionally placing its coefficients on other extents."""
        document = self.read_document(path)
        if extents is not None:
            extents = [extents] * document.dimension if isinstance(extents, int) else list(extents)
            document = document.model_copy(update={"extents": extents})
        spec = spec_from_document(document, self.tolerances)
        logger.debug(f"Loaded spec {spec.fingerprint()} from {path}")
        return spec

    @staticmethod
    def save(spec: CouplingSpec, path: Union[str, Path]) -> None:
        Path(path).write_text(spec.to_document().model_dump_json(indent=2) + "\n", encoding="utf-8")
