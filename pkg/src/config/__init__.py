import os
from contextlib import contextmanager
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Optional

from dotenv import load_dotenv

from src.config.manager import SettingsManager
from src.config.settings import Settings, Tolerances

load_dotenv()

# Build a robust path to the project root
BASE_DIR = Path(__file__).resolve().parent.parent.parent

_active: Optional[Settings] = None


@lru_cache(maxsize=None)
def _load_settings() -> Settings:
    path = Path(os.getenv("HARM_ENT_SETTINGS", BASE_DIR / "config/settings.yaml"))
    return SettingsManager(path).settings()


def get_settings() -> Settings:
    """Returns the active settings: an installed override, else the YAML file (loaded once)."""
    return _active if _active is not None else _load_settings()


@contextmanager
def settings_override(settings: Settings) -> Iterator[Settings]:
    """Installs ``settings`` for the duration of the block."""
    global _active
    previous, _active = _active, settings
    try:
        yield settings
    finally:
        _active = previous


def resolve_tolerances(tolerances: Optional[Tolerances]) -> Tolerances:
    return tolerances if tolerances is not None else get_settings().tolerances


def thread_cap() -> int:
    """Parallelism cap from HARM_ENT_THREADS (1 when unset or invalid)."""
    try:
        return max(1, int(os.getenv("HARM_ENT_THREADS", "1")))
    except ValueError:
        return 1


__all__ = [
    "BASE_DIR",
    "Settings",
    "Tolerances",
    "get_settings",
    "resolve_tolerances",
    "settings_override",
    "thread_cap",
]
