import yaml
from pathlib import Path
from typing import Any, Dict

from pydantic import ValidationError

from src.config.settings import Settings
from src.utils.logger import get_logger

logger = get_logger(__name__)


class SettingsManager:
    """Manages loading and validation of the YAML settings file."""

    def __init__(self, settings_file: Path):
        """
        Initializes the SettingsManager with the path to the settings file.

        Args:
            settings_file: Path to the YAML file holding tolerances and defaults
        """
        self.settings_file = Path(settings_file)
        self.raw = self._load_raw()

    def _load_raw(self) -> Dict[str, Any]:
        """
        Loads the raw mapping from the YAML file.

        Raises:
            FileNotFoundError: If the settings file doesn't exist
            ValueError: If there's an error parsing the YAML
        """
        try:
            with open(self.settings_file, 'r', encoding='utf-8') as f:
                raw = yaml.safe_load(f) or {}
                logger.debug(f"Loaded {len(raw)} settings sections from {self.settings_file}")
                return raw
        except FileNotFoundError as e:
            logger.error(f"Settings file not found at: {self.settings_file}")
            raise FileNotFoundError(f"Settings file not found: {self.settings_file}") from e
        except yaml.YAMLError as e:
            logger.error(f"Error parsing YAML in settings file: {e}")
            raise ValueError(f"Invalid YAML in settings file: {e}") from e

    def settings(self) -> Settings:
        """Validates the raw mapping into a Settings model."""
        try:
            return Settings.model_validate(self.raw)
        except ValidationError as e:
            logger.error(f"Invalid settings in {self.settings_file}: {e}")
            raise ValueError(f"Invalid settings in {self.settings_file}: {e}") from e
