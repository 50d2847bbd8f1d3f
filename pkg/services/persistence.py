"""On-disk artefacts of a run: checkpoints, CSV series, report and manifest."""
import csv
import hashlib
import json
import logging
import os
import struct
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from services.semigroup_ops import Trajectory
from services.spectral_core import Grid, SobolevIndex, SpectralField, sobolev_norm

logger = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"LANS"
CHECKPOINT_VERSION = 1
# magic, version, n, N, t, alpha, nu
HEADER = struct.Struct("<4sIIIddd")
DEFAULT_NORMS: Tuple[Tuple[float, float], ...] = ((0.0, 2.0), (1.0, 2.0), (2.0, 2.0), (3.0, 2.0))


class CheckpointError(Exception):
    pass


def write_checkpoint(path: Path, field: SpectralField, t: float, alpha: float, nu: float):
    """Header followed by interleaved little-endian float64 (re, im) pairs, row-major."""
    path = Path(path)
    grid = field.grid
    try:
        header = HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, grid.dim,
                             grid.points_per_axis, float(t), float(alpha), float(nu))
        payload = np.ascontiguousarray(field.coeffs, dtype="<c16").tobytes(order="C")
        with open(path, "wb") as f:
            f.write(header)
            f.write(payload)
        logger.info(f"Wrote checkpoint {path.name} (t={t})")
    except OSError as e:
        logger.error(f"Failed to write checkpoint {path}: {e}")
        raise


def read_checkpoint(path: Path) -> Tuple[SpectralField, Dict[str, float]]:
    path = Path(path)
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < HEADER.size:
        raise CheckpointError(f"{path} is too short to be a checkpoint")
    magic, version, n, points, t, alpha, nu = HEADER.unpack_from(raw)
    if magic != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint (magic {magic!r})")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version}")
    grid = Grid(n, points)
    expected = n * grid.total_modes * 16
    if len(raw) - HEADER.size != expected:
        raise CheckpointError(
            f"{path} holds {len(raw) - HEADER.size} payload bytes, expected {expected}"
        )
    coeffs = np.frombuffer(raw, dtype="<c16", offset=HEADER.size).reshape((n,) + grid.shape)
    field = SpectralField(grid, coeffs.astype(np.complex128))
    return field, {"t": t, "alpha": alpha, "nu": nu, "version": version}


def _fmt(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, fieldnames: Sequence[str], rows: Iterable[Dict[str, Any]]):
    try:
        with open(path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(fieldnames), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({key: _fmt(row.get(key, "")) for key in fieldnames})
        logger.info(f"Wrote {path.name}")
    except OSError as e:
        logger.error(f"Failed to write {path}: {e}")
        raise


def norm_column(s: float, p: float) -> str:
    return f"norm_{s:g}_{p:g}"


def write_trajectory_csv(path: Path, trajectory: Trajectory,
                         norms: Sequence[Tuple[float, float]] = DEFAULT_NORMS):
    columns = [norm_column(s, p) for s, p in norms]
    rows = []
    for t, state in zip(trajectory.times, trajectory.states):
        row = {"t": float(t)}
        for column, (s, p) in zip(columns, norms):
            row[column] = sobolev_norm(state, SobolevIndex(s=s, p=p))
        rows.append(row)
    _write_csv(Path(path), ["t"] + columns, rows)


def write_diagnostics_csv(path: Path, rows: List[Dict[str, Any]]):
    _write_csv(Path(path), ["iteration", "e_norm", "difference", "ratio", "residual"], rows)


def write_scan_csv(path: Path, rows: List[Dict[str, Any]]):
    if not rows:
        _write_csv(Path(path), ["kind"], [])
        return
    _write_csv(Path(path), list(rows[0].keys()), rows)


def write_json(path: Path, payload: Any):
    try:
        with open(path, "w") as f:
            json.dump(payload, f, indent=2, sort_keys=True, allow_nan=True)
            f.write("\n")
        logger.info(f"Wrote {Path(path).name}")
    except OSError as e:
        logger.error(f"Failed to write {path}: {e}")
        raise


def config_digest(config: Dict[str, Any]) -> str:
    encoded = json.dumps(config, sort_keys=True).encode()
    return hashlib.sha256(encoded).hexdigest()[:12]


class RunStore:
    """Directory of run folders; an existing folder is never overwritten."""

    def __init__(self, root: str = None):
        self.root = Path(root or os.environ.get("LANS_RUNS_ROOT", "runs"))
        self.root.mkdir(parents=True, exist_ok=True)

    def create_run_dir(self, experiment_id: str, config: Dict[str, Any]) -> Path:
        base = f"{experiment_id}-{config_digest(config)}"
        candidate = self.root / base
        suffix = 1
        while candidate.exists():
            candidate = self.root / f"{base}-{suffix}"
            suffix += 1
        candidate.mkdir(parents=True)
        logger.info(f"Created run directory {candidate}")
        return candidate

    def load_report(self, run_dir: str) -> List[Dict[str, Any]]:
        path = Path(run_dir) / "report.json"
        with open(path) as f:
            return json.load(f)
