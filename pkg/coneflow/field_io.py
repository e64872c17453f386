"""Field, residual-history and manifest files.

Text field files start with a comment line "# coneflow-field v1 n1=<n1> n2=<n2>" followed
by CSV with the FIELD_COLUMNS header, one row per cell in row-major (i, j) order. The
binary twin holds an 8-byte magic, uint32 version, n1, n2 and column count, then the
same table as little-endian float64.
"""
import logging
import os
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from coneflow.classify import characteristic_types
from coneflow.exceptions import ConeFlowError
from coneflow.gas import GasModel
from coneflow.memoizer import json_dumps
from coneflow.solver.mesh import Mesh
from coneflow.state import crossflow_speed_squared

logger = logging.getLogger(__name__)

FIELD_COLUMNS = ["xi1", "xi2", "rho", "v1", "v2", "V3", "e", "P", "q_c", "c", "margin"]
PRIMITIVE_COLUMNS = ["rho", "v1", "v2", "V3", "e"]
BINARY_MAGIC = b"CONEFLOW"
FORMAT_VERSION = 1
_HEADER = re.compile(r"#\s*coneflow-field v(\d+) n1=(\d+) n2=(\d+)")


class FieldFormatError(ConeFlowError, ValueError):
    """Malformed field file."""


@dataclass
class FieldData:
    n1: int
    n2: int
    table: pd.DataFrame

    def column(self, name: str) -> np.ndarray:
        return self.table[name].values.reshape(self.n1, self.n2)

    @property
    def primitive(self) -> np.ndarray:
        return np.stack([self.column(c) for c in PRIMITIVE_COLUMNS], axis=-1)


def field_table(p: np.ndarray, mesh: Mesh, gas: GasModel) -> pd.DataFrame:
    xi1, xi2 = mesh.centers()
    P = gas.pressure(p[..., 0], p[..., 4])[0]
    _, margin = characteristic_types(p, mesh.cell_metric, gas)
    q = np.sqrt(np.maximum(crossflow_speed_squared(p, mesh.cell_metric), 0.0))
    c = gas.sound_speed(p[..., 0], p[..., 4])
    cols = [xi1, xi2] + [p[..., k] for k in range(5)] + [P, q, c, margin]
    return pd.DataFrame({name: col.ravel() for name, col in zip(FIELD_COLUMNS, cols)})


def write_field(path: str, p: np.ndarray, mesh: Mesh, gas: GasModel, fmt: str = "text") -> str:
    """Write primitives p (n1, n2, 5) with derived columns; returns the path written."""
    table = field_table(p, mesh, gas)
    if fmt == "text":
        with open(path, "w") as f:
            f.write(f"# coneflow-field v{FORMAT_VERSION} n1={mesh.n1} n2={mesh.n2}\n")
            table.to_csv(f, index=False, float_format="%.17g")
    elif fmt == "binary":
        header = np.array([FORMAT_VERSION, mesh.n1, mesh.n2, len(FIELD_COLUMNS)], dtype="<u4")
        with open(path, "wb") as f:
            f.write(BINARY_MAGIC)
            f.write(header.tobytes())
            f.write(table.values.astype("<f8").tobytes())
    else:
        raise ValueError(f'Unknown field format {fmt!r}; valid values are "text", "binary"')
    logger.info(f"Wrote {fmt} field {path}")
    return path


def _read_binary(path: str) -> FieldData:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:8] != BINARY_MAGIC or len(raw) < 24:
        raise FieldFormatError(f"{path}: not a coneflow binary field")
    version, n1, n2, ncols = (int(x) for x in np.frombuffer(raw[8:24], dtype="<u4"))
    if version != FORMAT_VERSION or ncols != len(FIELD_COLUMNS):
        raise FieldFormatError(f"{path}: unsupported field version {version} with {ncols} columns")
    data = np.frombuffer(raw[24:], dtype="<f8")
    if data.size != n1 * n2 * ncols:
        raise FieldFormatError(f"{path}: expected {n1 * n2 * ncols} values, found {data.size}")
    return FieldData(n1, n2, pd.DataFrame(data.reshape(n1 * n2, ncols), columns=FIELD_COLUMNS))


def read_field(path: str) -> FieldData:
    """Read a text or binary field file, detected from its first bytes.

    Raises:
        FieldFormatError: on a missing header, wrong columns or a cell count mismatch
    """
    with open(path, "rb") as f:
        start = f.read(8)
    if start == BINARY_MAGIC:
        return _read_binary(path)
    with open(path) as f:
        first = f.readline()
    m = _HEADER.match(first)
    if m is None:
        raise FieldFormatError(f"{path}:1: missing '# coneflow-field' header")
    version, n1, n2 = (int(x) for x in m.groups())
    if version != FORMAT_VERSION:
        raise FieldFormatError(f"{path}:1: unsupported field version {version}")
    try:
        table = pd.read_csv(path, skiprows=1, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise FieldFormatError(f"{path}: {e}")
    if list(table.columns) != FIELD_COLUMNS:
        raise FieldFormatError(f"{path}:2: expected columns {FIELD_COLUMNS}, got {list(table.columns)}")
    if len(table) != n1 * n2:
        raise FieldFormatError(f"{path}: header says {n1 * n2} cells, found {len(table)}")
    try:
        table = table.astype(float)
    except ValueError:
        raise FieldFormatError(f"{path}: non-numeric values")
    if not np.all(np.isfinite(table.values)):
        raise FieldFormatError(f"{path}: non-finite values")
    return FieldData(n1, n2, table)


def write_residual_history(path: str, history: pd.DataFrame) -> str:
    cols = ["iteration", "r_mass", "r_mom1", "r_mom2", "r_mom_r", "r_energy"]
    history[cols].to_csv(path, index=False, float_format="%.10e")
    return path


def write_manifest(path: str, config: dict, summary: dict, config_hash: Optional[str] = None) -> str:
    """Run manifest: complete config echo, its hash and the convergence summary."""
    manifest = {"config": config, "config_hash": config_hash, "summary": summary}
    with open(path, "w") as f:
        f.write(json_dumps(manifest, indent=2))
        f.write("\n")
    return path


def output_path(directory: str, name: str) -> str:
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, name)
