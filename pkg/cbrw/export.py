"""CSV, JSON and SVG writers"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np
import structlog

from cbrw.front import FrontSample
from cbrw.malthus import MalthusSolution
from cbrw.simulate.engine import ParticleSnapshot, SimulationTrace
from cbrw.utils import format_float, format_floats, jsonable

logger = structlog.get_logger()

SVG_PADDING = 0.05


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    logger.info("CSV written", path=str(path))
    return path


def write_front_csv(sample: FrontSample, path: Path) -> Path:
    """One row per direction: u_1..u_d, r_1..r_d, z_1..z_d"""
    return write_csv(path, sample.header(), (format_floats(row) for row in sample.rows()))


def write_snapshots_csv(snapshots: Sequence[ParticleSnapshot], path: Path) -> Path:
    dimension = snapshots[0].positions.shape[1] if snapshots else 1
    header = ["replicate", "t", "particle_index"] + [f"x_{i}" for i in range(1, dimension + 1)]

    def rows():
        for snapshot in snapshots:
            time = format_float(snapshot.time)
            for index, position in enumerate(snapshot.positions.tolist()):
                yield [snapshot.replicate, time, index] + position

    return write_csv(path, header, rows())


def write_json(payload: Any, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    logger.info("JSON written", path=str(path))
    return path


def front_svg(sample: FrontSample) -> str:
    """Closed polyline through the z points in a viewBox with 5% padding"""
    if sample.dimension != 2:
        raise ValueError(f"SVG export needs d = 2, got d = {sample.dimension}")
    points = np.column_stack([sample.z[:, 0], -sample.z[:, 1]])
    low = points.min(axis=0)
    high = points.max(axis=0)
    pad = SVG_PADDING * np.maximum(high - low, np.finfo(float).eps)
    low, size = low - pad, high - low + 2.0 * pad
    closed = np.vstack([points, points[:1]])
    coordinates = " ".join(f"{format_float(x)},{format_float(y)}" for x, y in closed)
    view_box = " ".join(format_floats([low[0], low[1], size[0], size[1]]))
    lines: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{view_box}">',
        f'  <polyline points="{coordinates}" fill="none" stroke="black" '
        f'stroke-width="{format_float(0.002 * max(size))}"/>',
        "</svg>",
    ]
    return "\n".join(lines) + "\n"


def write_front_svg(sample: FrontSample, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(front_svg(sample), encoding="utf-8")
    logger.info("SVG written", path=str(path))
    return path


# ============================================================================
# Documents
# ============================================================================

def malthus_document(solution: MalthusSolution, metadata: Dict[str, Any]) -> Dict[str, Any]:
    return {**solution.to_json(), "metadata": metadata}


def traces_document(traces: Sequence[SimulationTrace], metadata: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "traces": [trace.summary() for trace in traces],
        "capped": sum(trace.capped for trace in traces),
        "metadata": metadata,
    }


def front_document(sample: FrontSample, metadata: Dict[str, Any]) -> Dict[str, Any]:
    return {
        **sample.metadata(),
        "columns": sample.header(),
        "rows": sample.rows(),
        "metadata": metadata,
    }
