import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

from jinja2 import Environment, FileSystemLoader, select_autoescape
from pydantic import BaseModel

from src import __version__
from src.config import BASE_DIR
from src.core.schemas import EntanglementReport
from src.utils.logger import get_logger

logger = get_logger(__name__)

SWEEP_HEADER = ("sweep_id", "N", "N1", "eta_or_spec_hash", "S", "I", "lower", "upper", "xi", "decay_class")
KERNEL_ROWS_HEADER = ("lag", "sqrt_value", "inv_sqrt_value")

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

templates = Environment(
    loader=FileSystemLoader(str(BASE_DIR / "templates")),
    autoescape=select_autoescape(["svg", "j2"]),
    trim_blocks=True,
    lstrip_blocks=True,
)


def provenance_line(config_hash: str) -> str:
    return f"# harmonic-entanglement {__version__} config={config_hash}"


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]], config_hash: str) -> str:
    """Provenance comment, header and rows, newline-terminated."""
    buffer = io.StringIO()
    buffer.write(provenance_line(config_hash) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]], config_hash: str) -> Path:
    return write_text(path, csv_text(header, rows, config_hash))


def json_text(payload: Any) -> str:
    if isinstance(payload, BaseModel):
        return payload.model_dump_json(indent=2) + "\n"
    if isinstance(payload, list) and payload and isinstance(payload[0], BaseModel):
        return "[\n" + ",\n".join(item.model_dump_json(indent=2) for item in payload) + "\n]\n"
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def sweep_rows(sweep_id: str, label: str, reports: Sequence[EntanglementReport]) -> List[tuple]:
    """CSV rows of a sweep; the report's own columns after id and source label."""
    rows = []
    for report in reports:
        n, n1, s, i, lower, upper, xi, decay = report.csv_row()
        rows.append((sweep_id, n, n1, label, s, i, lower, upper, xi, decay))
    return rows


def _scale(values: Sequence[float], low: float, high: float, start: float, stop: float) -> List[float]:
    span = (high - low) or 1.0
    return [start + (v - low) / span * (stop - start) for v in values]


def render_entropy_plot(curves: Dict[str, Sequence[tuple]], title: str, width: int = 640, height: int = 420) -> str:
    """S against N1 as one polyline per labelled curve of (N1, S) points."""
    margin = {"left": 60, "right": 140, "top": 40, "bottom": 50}
    xs = [x for points in curves.values() for x, _ in points] or [0.0, 1.0]
    ys = [y for points in curves.values() for _, y in points] or [0.0, 1.0]
    x_low, x_high = min(xs), max(xs)
    y_low, y_high = 0.0, max(max(ys), 1e-12) * 1.05
    left, right = margin["left"], width - margin["right"]
    top, bottom = margin["top"], height - margin["bottom"]

    series = []
    for index, (label, points) in enumerate(curves.items()):
        px = _scale([x for x, _ in points], x_low, x_high, left, right)
        py = _scale([y for _, y in points], y_low, y_high, bottom, top)
        series.append({
            "label": label,
            "color": _PALETTE[index % len(_PALETTE)],
            "points": " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py)),
            "legend_y": top + 20 * index,
        })
    x_ticks = [(f"{v:g}", p) for v, p in zip(_ticks(x_low, x_high), _scale(_ticks(x_low, x_high), x_low, x_high, left, right))]
    y_ticks = [(f"{v:.3g}", p) for v, p in zip(_ticks(y_low, y_high), _scale(_ticks(y_low, y_high), y_low, y_high, bottom, top))]
    return templates.get_template("fig1.svg.j2").render(
        title=title,
        width=width,
        height=height,
        left=left,
        right=right,
        top=top,
        bottom=bottom,
        series=series,
        x_ticks=x_ticks,
        y_ticks=y_ticks,
        x_label="N1",
        y_label="S (nats)",
    )


def _ticks(low: float, high: float, count: int = 5) -> List[float]:
    step = (high - low) / (count - 1) if high > low else 1.0
    return [low + i * step for i in range(count)]
