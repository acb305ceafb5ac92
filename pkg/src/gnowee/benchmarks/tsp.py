"""TSPLIB95 parsing and EUC_2D tour lengths."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TsplibError",
    "TspInstance",
    "UnsupportedEdgeWeightType",
    "distance_matrix",
    "parse_tsplib",
    "tour_length",
]


class TsplibError(ValueError):
    """Malformed TSPLIB text."""


class UnsupportedEdgeWeightType(TsplibError):
    pass


@dataclass(frozen=True)
class TspInstance:
    name: str
    coords: np.ndarray
    edge_weight_type: str = "EUC_2D"
    best_known: int | None = None
    _dist: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise TsplibError("coordinates must be (x, y) pairs")
        if len(coords) < 3:
            raise TsplibError(f"a TSP instance needs at least 3 nodes, got {len(coords)}")
        if not np.all(np.isfinite(coords)):
            raise TsplibError("coordinates must be finite")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "_dist", distance_matrix(coords))

    @property
    def dimension(self) -> int:
        return len(self.coords)

    @property
    def distances(self) -> np.ndarray:
        return self._dist

    def tour_length(self, perm) -> int:
        return tour_length(self, perm)


def distance_matrix(coords) -> np.ndarray:
    """EUC_2D distances: Euclidean distance rounded to the nearest integer."""
    c = np.asarray(coords, dtype=float)
    diff = c[:, None, :] - c[None, :, :]
    # nint(x) = (int)(x + 0.5) in the TSPLIB reference code
    return np.floor(np.sqrt(np.sum(diff * diff, axis=-1)) + 0.5).astype(np.int64)


def tour_length(instance: TspInstance, perm) -> int:
    """Length of the closed tour visiting nodes in ``perm`` order."""
    p = np.asarray(perm)
    n = instance.dimension
    if p.shape != (n,) or not np.array_equal(np.sort(p), np.arange(n)):
        raise ValueError(f"tour is not a permutation of 0..{n - 1}")
    p = p.astype(int)
    return int(instance.distances[p, np.roll(p, -1)].sum())


_KEYWORD = re.compile(r"^\s*([A-Z_]+)\s*:?\s*(.*?)\s*$")


def parse_tsplib(text: str, best_known: int | None = None) -> TspInstance:
    """Parse a TSPLIB95 ``EUC_2D`` instance; node ids become 0-based positions."""
    header: dict[str, str] = {}
    lines = text.splitlines()
    coords = None
    i = 0
    while i < len(lines):
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        if raw == "EOF":
            break
        if raw.startswith("NODE_COORD_SECTION"):
            coords, i = _read_coords(lines, i, header)
            continue
        m = _KEYWORD.match(raw)
        if m is None:
            raise TsplibError(f"line {i}: cannot parse {raw!r}")
        header[m.group(1)] = m.group(2)
    ewt = header.get("EDGE_WEIGHT_TYPE", "").strip()
    if ewt != "EUC_2D":
        raise UnsupportedEdgeWeightType(f"edge weight type {ewt or '(missing)'!r} is not supported; only EUC_2D is")
    if coords is None:
        raise TsplibError("missing NODE_COORD_SECTION")
    return TspInstance(header.get("NAME", "unnamed").strip(), coords, "EUC_2D", best_known)


def _read_coords(lines, i, header):
    try:
        dim = int(header["DIMENSION"])
    except (KeyError, ValueError):
        raise TsplibError(f"line {i}: NODE_COORD_SECTION before a valid DIMENSION") from None
    coords = np.full((dim, 2), np.nan)
    seen = 0
    while seen < dim:
        if i >= len(lines):
            raise TsplibError(f"expected {dim} coordinate rows, found {seen}")
        raw = lines[i].strip()
        i += 1
        if not raw:
            continue
        parts = raw.split()
        try:
            if len(parts) != 3:
                raise ValueError
            node = int(parts[0])
            xy = float(parts[1]), float(parts[2])
        except ValueError:
            raise TsplibError(f"line {i}: malformed coordinate row {raw!r}") from None
        if not 1 <= node <= dim or not np.isnan(coords[node - 1, 0]):
            raise TsplibError(f"line {i}: node id {node} out of range or repeated")
        coords[node - 1] = xy
        seen += 1
    return coords, i
