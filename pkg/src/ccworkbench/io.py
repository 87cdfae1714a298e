"""Flat-file formats: positions, distances and solution JSON."""

from __future__ import annotations

import json

import numpy as np

from .dziobek import CCSolution
from .errors import DimensionMismatch
from .geometry import Configuration, MassVector, SquaredDistanceMatrix


def read_positions(path) -> tuple[Configuration, MassVector | None]:
    """Read ``{"dim": d, "points": [[...], ...], "masses": [...]}``."""
    with open(path) as fh:
        data = json.load(fh)
    return parse_positions(data)


def parse_positions(data: dict) -> tuple[Configuration, MassVector | None]:
    config = Configuration(np.asarray(data["points"], dtype=float))
    if "dim" in data and int(data["dim"]) != config.dim:
        raise DimensionMismatch(f"dim {data['dim']} but points have dimension {config.dim}")
    masses = MassVector(data["masses"]) if data.get("masses") is not None else None
    if masses is not None and masses.n != config.n:
        raise DimensionMismatch(f"{masses.n} masses for {config.n} points")
    return config, masses


def positions_dict(config: Configuration, masses: MassVector | None = None) -> dict:
    out = {"dim": config.dim, "points": [[float(x) for x in row] for row in config.points]}
    if masses is not None:
        out["masses"] = [float(x) for x in masses.masses]
    return out


def read_distances(path) -> tuple[SquaredDistanceMatrix, int | None]:
    """Read ``{"s": [[...]], "dim": d}`` (dim optional)."""
    with open(path) as fh:
        data = json.load(fh)
    dim = data.get("dim")
    return SquaredDistanceMatrix(data["s"]), None if dim is None else int(dim)


def read_solution(path) -> CCSolution:
    with open(path) as fh:
        return CCSolution.from_dict(json.load(fh))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, default=_default)


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
