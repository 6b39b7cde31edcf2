import sys
from pathlib import Path

# Add the project root to the Python path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.cli.commands import app  # noqa: E402

# --- Entry point ---
if __name__ == "__main__":
    app()
