import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from polaron_lab.schemas.reports import to_jsonable  # noqa: E402

logger = logging.getLogger(__name__)

# Fixed salt and no date metadata keep SVG bytes reproducible
plt.rcParams["svg.hashsalt"] = "polaron-lab"


def _cell(value: Any) -> Any:
    value = to_jsonable(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return " ".join(str(_cell(item)) for item in value)
    return value


def write_csv(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    config_source: str = "",
    generated: str = "",
) -> Path:
    """Line 1 is the timestamp comment, then the config echo as comments, then the table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        handle.write(f"# generated {generated}\n")
        for line in config_source.splitlines():
            handle.write(f"# {line}\n")
        writer = csv.writer(handle, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    logger.info(f"CSV written at: {path}")
    return path


def write_json(path: Path, payload: Dict[str, Any], header: Optional[Dict[str, Any]] = None) -> Path:
    """JSON with the volatile header (timestamp, runtimes) confined to the first line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if "header" in payload:
        raise ValueError("payload key 'header' is reserved")
    head = json.dumps(to_jsonable(header or {}), sort_keys=True, separators=(",", ":"), allow_nan=False)
    body = json.dumps(to_jsonable(payload), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False)
    if payload:
        text = '{"header": ' + head + "," + body[1:] + "\n"
    else:
        text = '{"header": ' + head + "}\n"
    path.write_text(text, encoding="utf-8")
    logger.info(f"JSON written at: {path}")
    return path


def write_line_plot(
    path: Path,
    x: Sequence[float],
    series: Dict[str, Sequence[float]],
    xlabel: str,
    ylabel: str,
    title: str = "",
    markers: bool = False,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, values in series.items():
        points = [(a, b) for a, b in zip(x, values) if b is not None]
        if not points:
            continue
        xs, ys = zip(*points)
        ax.plot(xs, ys, marker="o" if markers else None, linestyle="-" if not markers else ":", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, ls=":", alpha=0.4)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Plot written at: {path}")
    return path
