"""TSP instances: the TSPLIB EUC_2D reader/writer and dense distance matrices.

Only the subset of TSPLIB needed here is supported: a header with ``NAME``,
``DIMENSION`` and ``EDGE_WEIGHT_TYPE : EUC_2D`` followed by a
``NODE_COORD_SECTION``.  Two distance conventions are offered:

* ``real`` -- plain Euclidean distances (the default);
* ``rounded`` -- TSPLIB's ``nint`` convention, every entry rounded to the
  nearest integer, which is what the published TSPLIB optima refer to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

REAL = "real"
ROUNDED = "rounded"
METRICS = (REAL, ROUNDED)

BUNDLED = ("oliver30", "eil101")


class TsplibParseError(ValueError):
    """Raised for malformed or unsupported TSPLIB input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class TspInstance:
    name: str
    coords: tuple[tuple[float, float], ...]
    metric: str = REAL

    def __post_init__(self):
        if len(self.coords) < 1:
            raise ValueError("an instance needs at least one city")
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")

    @property
    def n(self) -> int:
        return len(self.coords)

    def with_metric(self, metric: str) -> "TspInstance":
        return TspInstance(self.name, self.coords, metric)


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Dense symmetric distance matrix.

    ``d`` is the read-only numpy array; ``rows`` holds the same values as
    nested Python lists, which is much faster for scalar lookups in the
    inner loops of the tour operators.
    """

    d: np.ndarray
    rows: list[list[float]] = field(repr=False)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    @classmethod
    def from_array(cls, d) -> "DistanceMatrix":
        arr = np.array(d, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("distance matrix must be square")
        arr.setflags(write=False)
        return cls(arr, arr.tolist())


def distance_matrix(instance: TspInstance) -> DistanceMatrix:
    xy = np.asarray(instance.coords, dtype=float)
    diff = xy[:, None, :] - xy[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    if instance.metric == ROUNDED:
        # TSPLIB nint(): round half up, not numpy's round-half-even
        d = np.floor(d + 0.5)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix.from_array(d)


def _number(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise TsplibParseError(f"non-numeric value {token!r}", lineno) from None
    if not math.isfinite(value):
        raise TsplibParseError(f"non-finite value {token!r}", lineno)
    return value


def parse_tsplib(text: str, metric: str = REAL) -> TspInstance:
    """Parse the contents of a TSPLIB ``EUC_2D`` file.

    Cities are re-indexed ``0..n-1`` in file order.  Errors carry the
    offending line number.
    """
    header: dict[str, str] = {}
    coords: list[tuple[float, float]] = []
    in_coords = False
    dimension = None
    last_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.strip()
        if not line:
            continue
        if line.upper() == "EOF":
            break
        if in_coords:
            parts = line.split()
            if len(parts) != 3:
                if ":" in line or line.upper().endswith("_SECTION"):
                    break
                raise TsplibParseError(f"expected 'index x y', got {line!r}", lineno)
            _number(parts[0], lineno)
            coords.append((_number(parts[1], lineno), _number(parts[2], lineno)))
            if len(coords) > dimension:
                raise TsplibParseError(
                    f"more coordinate rows than DIMENSION={dimension}", lineno)
            continue
        if line.upper().startswith("NODE_COORD_SECTION"):
            if dimension is None:
                raise TsplibParseError("NODE_COORD_SECTION before DIMENSION", lineno)
            if "NAME" not in header:
                raise TsplibParseError("missing NAME header", lineno)
            ewt = header.get("EDGE_WEIGHT_TYPE")
            if ewt is None:
                raise TsplibParseError("missing EDGE_WEIGHT_TYPE header", lineno)
            if ewt.upper() != "EUC_2D":
                raise TsplibParseError(f"unsupported EDGE_WEIGHT_TYPE {ewt}", lineno)
            in_coords = True
            continue
        if ":" not in line:
            raise TsplibParseError(f"malformed header line {line!r}", lineno)
        key, _, value = line.partition(":")
        key, value = key.strip().upper(), value.strip()
        header[key] = value
        if key == "DIMENSION":
            try:
                dimension = int(value)
            except ValueError:
                raise TsplibParseError(f"bad DIMENSION {value!r}", lineno) from None
            if dimension < 1:
                raise TsplibParseError(f"bad DIMENSION {value!r}", lineno)

    if not in_coords:
        raise TsplibParseError("missing NODE_COORD_SECTION", last_line)
    if len(coords) != dimension:
        raise TsplibParseError(
            f"DIMENSION={dimension} but {len(coords)} coordinate rows", last_line)
    return TspInstance(header["NAME"], tuple(coords), metric)


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def to_tsplib(instance: TspInstance) -> str:
    lines = [
        f"NAME : {instance.name}",
        "TYPE : TSP",
        f"DIMENSION : {instance.n}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        "NODE_COORD_SECTION",
    ]
    lines += [f"{i} {_fmt(x)} {_fmt(y)}" for i, (x, y) in enumerate(instance.coords, 1)]
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def load_tsplib(path, metric: str = REAL) -> TspInstance:
    return parse_tsplib(Path(path).read_text(), metric)


def bundled(name: str, metric: str = REAL) -> TspInstance:
    """One of the instances shipped with the package (``oliver30``, ``eil101``)."""
    if name not in BUNDLED:
        raise KeyError(f"no bundled instance {name!r}; have {BUNDLED}")
    text = resources.files("decafsa.data").joinpath(f"{name}.tsp").read_text()
    return parse_tsplib(text, metric)


def resolve_instance(ref: str, metric: str = REAL) -> TspInstance:
    """Accept either a file path or the name of a bundled instance."""
    if ref in BUNDLED and not Path(ref).exists():
        return bundled(ref, metric)
    return load_tsplib(ref, metric)


def bundled_optimal_tour(name: str) -> list[int]:
    """Zero-based optimal tour shipped alongside a bundled instance."""
    text = resources.files("decafsa.data").joinpath(f"{name}.opt.tour").read_text()
    tour, in_section = [], False
    for line in text.splitlines():
        line = line.strip()
        if line == "TOUR_SECTION":
            in_section = True
        elif in_section:
            for tok in line.split():
                if tok in ("-1", "EOF"):
                    return tour
                tour.append(int(tok) - 1)
    return tour


def from_points(points: Sequence[Sequence[float]], name: str = "points",
                metric: str = REAL) -> TspInstance:
    return TspInstance(name, tuple((float(x), float(y)) for x, y in points), metric)
