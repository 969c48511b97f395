"""
Run artifacts: atomic CSV / JSON writers, the run manifest and SVG plots.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import re
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from config import get_logger  # noqa: E402
from errors import DomainError  # noqa: E402

log = get_logger("reports")

TOOL_VERSION = "0.1.0"

_SNAKE = re.compile(r"^[a-z][a-z0-9_]*$")


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """snake_case one-line header, floats with 17 significant digits."""
    for name in header:
        if not _SNAKE.match(name):
            raise DomainError(f"CSV column {name!r} is not snake_case")
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise DomainError(f"row has {len(row)} fields, header has {len(header)}")
        lines.append(",".join(format_value(v) for v in row))
    path = Path(path)
    _atomic_write(path, ("\n".join(lines) + "\n").encode("utf-8"))
    return path


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def _finite(obj: Any) -> Any:
    # JSON has no inf/nan
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def to_jsonable(obj: Any) -> Any:
    return _finite(json.loads(json.dumps(obj, default=_json_default)))


def write_json(path: Path, payload: Any) -> Path:
    text = json.dumps(to_jsonable(payload), indent=2, sort_keys=True)
    path = Path(path)
    _atomic_write(path, (text + "\n").encode("utf-8"))
    return path


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    command_line: List[str]
    config: Dict[str, Any] = field(default_factory=dict)
    catalog_keys: List[str] = field(default_factory=list)
    seeds: List[int] = field(default_factory=list)
    tool_version: str = TOOL_VERSION
    started: str = field(default_factory=_now)
    finished: Optional[str] = None
    outputs: List[Dict[str, str]] = field(default_factory=list)

    @classmethod
    def start(cls, config: Optional[Dict[str, Any]] = None, argv: Optional[Sequence[str]] = None) -> "RunManifest":
        config = dict(config or {})
        keys = [config["exponent"]] if config.get("exponent") else []
        seeds = [int(config["seed"])] if config.get("seed") is not None else []
        return cls(list(argv if argv is not None else sys.argv), config, keys, seeds)

    def add_output(self, path: Path) -> None:
        path = Path(path)
        self.outputs = [o for o in self.outputs if o["path"] != str(path)]
        self.outputs.append({"path": str(path), "sha256": sha256_file(path)})

    def verify(self) -> List[str]:
        """Paths that are missing or whose content no longer matches."""
        bad = []
        for item in self.outputs:
            p = Path(item["path"])
            if not p.exists() or sha256_file(p) != item["sha256"]:
                bad.append(item["path"])
        return bad

    def finish(self, path: Path) -> Path:
        self.finished = _now()
        write_json(path, asdict(self))
        return Path(path)


# -----------------------------
# Plots
# -----------------------------
@dataclass(frozen=True)
class PlotSpec:
    x: str
    y: Sequence[str]
    kind: str = "line"
    logx: bool = False
    logy: bool = False
    title: str = ""
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in ("line", "scatter"):
            raise DomainError(f"plot kind must be 'line' or 'scatter', got {self.kind!r}")
        if not self.y:
            raise DomainError("at least one y column is needed")


def read_csv_columns(csv_path: Path) -> Dict[str, np.ndarray]:
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DomainError(f"{csv_path} is empty")
        rows = [row for row in reader if row]
    if not rows:
        raise DomainError(f"{csv_path} has no data rows")
    columns: Dict[str, np.ndarray] = {}
    for i, name in enumerate(header):
        try:
            columns[name] = np.array([float(row[i]) for row in rows])
        except ValueError:
            columns[name] = np.array([row[i] for row in rows], dtype=object)
    return columns


def emit_plot(csv_path: Path, spec: PlotSpec, out_path: Optional[Path] = None) -> Path:
    """SVG of the named columns; output depends only on the inputs."""
    columns = read_csv_columns(Path(csv_path))
    for name in [spec.x, *spec.y]:
        if name not in columns:
            raise DomainError(f"column {name!r} not found in {csv_path}; available: {', '.join(columns)}")
    out_path = Path(out_path) if out_path else Path(csv_path).with_suffix(".svg")

    with plt.rc_context({"svg.hashsalt": "sbm", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.4))
        x = columns[spec.x]
        for name in spec.y:
            if spec.kind == "line":
                ax.plot(x, columns[name], marker="o", markersize=3, label=name)
            else:
                ax.scatter(x, columns[name], s=12, label=name)
        if spec.logx:
            ax.set_xscale("log")
        if spec.logy:
            ax.set_yscale("log")
        ax.set_xlabel(spec.xlabel or spec.x)
        ax.set_ylabel(spec.ylabel or (spec.y[0] if len(spec.y) == 1 else "value"))
        if spec.title:
            ax.set_title(spec.title)
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        out_path.parent.mkdir(parents=True, exist_ok=True)
        tmp = out_path.with_name(f".{out_path.name}.tmp")
        fig.savefig(tmp, format="svg", metadata={"Date": None})
        plt.close(fig)
        os.replace(tmp, out_path)
    log.info(f"plot written: {out_path} series={len(spec.y)}")
    return out_path
