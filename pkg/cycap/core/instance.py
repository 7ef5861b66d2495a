"""
cycap - Instance Module
TSPLIB and CSV matrix parsing into complete directed cost matrices.

Vertices are 0-based inside an Instance. TSPLIB and CSV files are row/column
ordered, so matrix index i is the file's vertex i + 1.
"""

import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from cycap.config import Limits
from cycap.errors import InstanceFormatError

logger = logging.getLogger(__name__)

Coordinate = tuple[float, float]

_SUPPORTED_TYPES = {"TSP", "ATSP"}
_SUPPORTED_WEIGHTS = {"EXPLICIT", "EUC_2D"}
_HEADER = re.compile(r"^\s*([A-Za-z_]+)\s*:\s*(.*?)\s*$")
_NUMERIC_START = re.compile(r"^[-+.\d]")


@dataclass(frozen=True, eq=False)
class Instance:
    """Complete directed instance with a penalised diagonal."""

    name: str
    cost: np.ndarray
    penalty: int
    symmetric: bool

    @property
    def n(self) -> int:
        return int(self.cost.shape[0])

    def c(self, i: int, j: int) -> int:
        return int(self.cost[i, j])

    def max_offdiag(self) -> int:
        return _max_offdiag(self.cost)


def _max_offdiag(cost: np.ndarray) -> int:
    mask = ~np.eye(cost.shape[0], dtype=bool)
    return int(cost[mask].max()) if mask.any() else 0


def build_instance(name: str, matrix: Union[np.ndarray, list[list[int]]]) -> Instance:
    """Validate a square integer matrix and penalise its diagonal."""
    cost = np.array(matrix, dtype=np.int64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise InstanceFormatError(f"cost matrix must be square, got shape {cost.shape}")
    n = cost.shape[0]
    if n < Limits.MIN_VERTICES:
        raise InstanceFormatError(f"n must be ≥ {Limits.MIN_VERTICES}, got {n}")

    offdiag = ~np.eye(n, dtype=bool)
    if (cost[offdiag] < 0).any():
        raise InstanceFormatError("negative arc costs are not supported")

    penalty = n * _max_offdiag(cost) + 1
    np.fill_diagonal(cost, penalty)
    symmetric = bool(np.array_equal(cost, cost.T))
    cost.setflags(write=False)
    return Instance(name=name, cost=cost, penalty=penalty, symmetric=symmetric)


def euc2d_cost(p: Coordinate, q: Coordinate) -> int:
    """TSPLIB EUC_2D distance: Euclidean distance rounded by nint."""
    d = math.hypot(p[0] - q[0], p[1] - q[1])
    return int(math.floor(d + 0.5))


def _tokens(lines: list[tuple[int, str]]) -> list[tuple[int, str]]:
    out: list[tuple[int, str]] = []
    for lineno, line in lines:
        for tok in line.split():
            out.append((lineno, tok))
    return out


def _to_number(lineno: int, tok: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise InstanceFormatError(f"non-numeric token {tok!r}", lineno) from None


def parse_tsplib(text: Union[str, Iterable[str]], name: str = "") -> Instance:
    """Parse TSPLIB TSP/ATSP text (EXPLICIT FULL_MATRIX or EUC_2D)."""
    raw = text.splitlines() if isinstance(text, str) else [ln.rstrip("\n") for ln in text]
    header: dict[str, str] = {}
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None

    for lineno, line in enumerate(raw, 1):
        stripped = line.strip()
        if not stripped:
            continue
        upper = stripped.upper()
        if upper == "EOF":
            break
        keyword = upper.split(":")[0].split()[0]
        if keyword.endswith("_SECTION"):
            current = keyword
            sections[current] = []
            continue
        if current is not None and _NUMERIC_START.match(stripped):
            sections[current].append((lineno, stripped))
            continue
        match = _HEADER.match(stripped)
        if not match:
            raise InstanceFormatError(f"malformed header line {stripped[:40]!r}", lineno)
        header[match.group(1).upper()] = match.group(2)
        current = None

    if "DIMENSION" not in header:
        raise InstanceFormatError("malformed header: DIMENSION missing")
    try:
        n = int(header["DIMENSION"])
    except ValueError:
        raise InstanceFormatError(f"malformed header: DIMENSION {header['DIMENSION']!r}") from None

    kind = header.get("TYPE", "TSP").split()[0].upper()
    if kind not in _SUPPORTED_TYPES:
        raise InstanceFormatError(f"unsupported TYPE {kind}")
    weight_type = header.get("EDGE_WEIGHT_TYPE", "").upper()
    if weight_type not in _SUPPORTED_WEIGHTS:
        raise InstanceFormatError(f"unsupported EDGE_WEIGHT_TYPE {weight_type or '(missing)'}")

    name = name or header.get("NAME", "").strip() or "instance"

    if weight_type == "EXPLICIT":
        fmt = header.get("EDGE_WEIGHT_FORMAT", "").upper()
        if fmt != "FULL_MATRIX":
            raise InstanceFormatError(f"unsupported EDGE_WEIGHT_FORMAT {fmt or '(missing)'}")
        if "EDGE_WEIGHT_SECTION" not in sections:
            raise InstanceFormatError("EDGE_WEIGHT_SECTION missing")
        toks = _tokens(sections["EDGE_WEIGHT_SECTION"])
        if len(toks) != n * n:
            last = toks[-1][0] if toks else None
            raise InstanceFormatError(
                f"matrix length mismatch: DIMENSION {n} needs {n * n} weights, found {len(toks)}", last
            )
        values = [int(round(_to_number(ln, tok))) for ln, tok in toks]
        matrix = np.array(values, dtype=np.int64).reshape(n, n)
    else:
        if "NODE_COORD_SECTION" not in sections:
            raise InstanceFormatError("NODE_COORD_SECTION missing")
        coords: list[Coordinate] = []
        for lineno, line in sections["NODE_COORD_SECTION"]:
            parts = line.split()
            if len(parts) < 3:
                raise InstanceFormatError("coordinate line needs index, x and y", lineno)
            coords.append((_to_number(lineno, parts[1]), _to_number(lineno, parts[2])))
        if len(coords) != n:
            raise InstanceFormatError(f"coordinate count mismatch: DIMENSION {n}, found {len(coords)}")
        matrix = np.zeros((n, n), dtype=np.int64)
        for i in range(n):
            for j in range(i + 1, n):
                matrix[i, j] = matrix[j, i] = euc2d_cost(coords[i], coords[j])

    if kind == "TSP":
        upper = np.triu(matrix, 1)
        matrix = upper + upper.T

    logger.info("parsed %s: n=%d type=%s weights=%s", name, n, kind, weight_type)
    return build_instance(name, matrix)


def parse_matrix_csv(text: Union[str, Iterable[str]], name: str = "matrix") -> Instance:
    """Parse n rows of n comma- or whitespace-separated integers."""
    raw = text.splitlines() if isinstance(text, str) else list(text)
    rows: list[list[int]] = []
    for lineno, line in enumerate(raw, 1):
        stripped = line.strip()
        if not stripped:
            continue
        row = []
        for tok in re.split(r"[,\s]+", stripped):
            if not tok:
                continue
            try:
                row.append(int(tok))
            except ValueError:
                raise InstanceFormatError(f"non-numeric token {tok!r}", lineno) from None
        if rows and len(row) != len(rows[0]):
            raise InstanceFormatError(f"ragged row: expected {len(rows[0])} values, found {len(row)}", lineno)
        rows.append(row)

    n = len(rows)
    if n < Limits.MIN_VERTICES:
        raise InstanceFormatError(f"n must be ≥ {Limits.MIN_VERTICES}, got {n}")
    if len(rows[0]) != n:
        raise InstanceFormatError(f"matrix is {n}x{len(rows[0])}, expected square")
    return build_instance(name, rows)


def to_matrix_csv(instance: Instance) -> str:
    """Serialise the cost matrix as CSV with a zero diagonal."""
    matrix = instance.cost.copy()
    np.fill_diagonal(matrix, 0)
    return "\n".join(",".join(str(int(v)) for v in row) for row in matrix) + "\n"


def figure3_instance() -> Instance:
    """Ten-vertex instance on which a cancel beats 2-opt and 3-opt.

    Arc pairs (i, i+1) cost 12 for odd i and 2 for even i, pairs (i, i+5)
    cost 7, everything else costs the prohibitive value (1-based labels,
    indices mod 10).
    """
    n = 10
    prohibitive = Limits.FIGURE3_PROHIBITIVE
    matrix = np.full((n, n), prohibitive, dtype=np.int64)
    for label in range(1, n + 1):
        i = label - 1
        j = label % n
        matrix[i, j] = matrix[j, i] = 12 if label % 2 == 1 else 2
    for label in range(1, 6):
        i = label - 1
        j = label + 4
        matrix[i, j] = matrix[j, i] = 7
    return build_instance("fig3", matrix)


def load_instance(source: str) -> Instance:
    """Load a built-in fixture by name, or a TSPLIB / CSV file by path."""
    from cycap.core.fixtures import FIXTURES

    if source in FIXTURES:
        return FIXTURES[source]()

    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(f"file not found: {source}")
    text = path.read_text(encoding="utf-8", errors="replace")
    if re.search(r"^\s*DIMENSION\s*:", text, re.MULTILINE | re.IGNORECASE):
        return parse_tsplib(text, name="")
    return parse_matrix_csv(text, name=path.stem)
