"""Mixed search spaces for the mask-profile parameters.

A space is an ordered list of named dimensions, each categorical
(finite enumerated choices), integer (inclusive bounds) or continuous
(closed interval).  Points are plain dicts keyed by dimension name.

For the surrogate model, points are encoded into real vectors:
categoricals one-hot, integers and continuous min-max scaled to
[0, 1].
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .geometry import CHUNK_LEVELS
from .stroke import KERNEL_SIZES

TYPE1 = "type1"
TYPE2 = "type2"
MODEL_TYPES = (TYPE1, TYPE2)


@dataclass(frozen=True)
class CategoricalDim:
    name: str
    choices: tuple

    kind = "categorical"

    def contains(self, value) -> bool:
        return not isinstance(value, float) and value in self.choices

    @property
    def encoded_width(self) -> int:
        return len(self.choices)

    def encode(self, value) -> np.ndarray:
        vec = np.zeros(len(self.choices))
        vec[self.choices.index(value)] = 1.0
        return vec

    def decode(self, vec: np.ndarray):
        return self.choices[int(np.argmax(vec))]


@dataclass(frozen=True)
class IntegerDim:
    name: str
    lo: int
    hi: int

    kind = "integer"

    def contains(self, value) -> bool:
        return isinstance(value, (int, np.integer)) and self.lo <= value <= self.hi

    @property
    def encoded_width(self) -> int:
        return 1

    def encode(self, value) -> np.ndarray:
        return np.array([(value - self.lo) / (self.hi - self.lo)])

    def decode(self, vec: np.ndarray):
        raw = vec[0] * (self.hi - self.lo) + self.lo
        return int(min(self.hi, max(self.lo, round(raw))))


@dataclass(frozen=True)
class ContinuousDim:
    name: str
    lo: float
    hi: float

    kind = "continuous"

    def contains(self, value) -> bool:
        return isinstance(value, (int, float, np.floating)) and self.lo <= value <= self.hi

    @property
    def encoded_width(self) -> int:
        return 1

    def encode(self, value) -> np.ndarray:
        return np.array([(value - self.lo) / (self.hi - self.lo)])

    def decode(self, vec: np.ndarray):
        return float(min(self.hi, max(self.lo, vec[0] * (self.hi - self.lo) + self.lo)))


class ParamSpace:
    """Ordered collection of dimensions with point encoding/decoding."""

    def __init__(self, dimensions):
        self.dimensions = list(dimensions)
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate dimension names: {names}")

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dimensions]

    @property
    def encoded_width(self) -> int:
        return sum(d.encoded_width for d in self.dimensions)

    def __getitem__(self, name: str):
        for dim in self.dimensions:
            if dim.name == name:
                return dim
        raise KeyError(name)

    def contains(self, point: dict) -> bool:
        if set(point) != set(self.names):
            return False
        return all(d.contains(point[d.name]) for d in self.dimensions)

    def validate(self, point: dict) -> None:
        if set(point) != set(self.names):
            raise ValueError(f"point keys {sorted(point)} != dimensions {sorted(self.names)}")
        for dim in self.dimensions:
            if not dim.contains(point[dim.name]):
                raise ValueError(f"{dim.name}={point[dim.name]!r} outside domain")

    def encode(self, point: dict) -> np.ndarray:
        self.validate(point)
        return np.concatenate([d.encode(point[d.name]) for d in self.dimensions])

    def decode(self, vec: np.ndarray) -> dict:
        point, offset = {}, 0
        for dim in self.dimensions:
            point[dim.name] = dim.decode(np.asarray(vec)[offset : offset + dim.encoded_width])
            offset += dim.encoded_width
        return point

    def random_point(self, rng: np.random.Generator) -> dict:
        point = {}
        for dim in self.dimensions:
            if dim.kind == "categorical":
                point[dim.name] = dim.choices[rng.integers(len(dim.choices))]
            elif dim.kind == "integer":
                point[dim.name] = int(rng.integers(dim.lo, dim.hi + 1))
            else:
                point[dim.name] = float(rng.uniform(dim.lo, dim.hi))
        return point

    def iter_points(self, steps: int = 11):
        """Lexicographic enumeration; continuous dims are sampled on a grid."""
        axes = []
        for dim in self.dimensions:
            if dim.kind == "categorical":
                axes.append(dim.choices)
            elif dim.kind == "integer":
                axes.append(range(dim.lo, dim.hi + 1))
            else:
                axes.append(tuple(np.linspace(dim.lo, dim.hi, steps)))
        for combo in itertools.product(*axes):
            yield dict(zip(self.names, combo))


def type1_space() -> ParamSpace:
    return ParamSpace(
        [
            CategoricalDim("s_chunk", CHUNK_LEVELS),
            ContinuousDim("s_scale", 1.0, 1.5),
            ContinuousDim("s_round", 0.0, 1.0),
        ]
    )


def type2_space() -> ParamSpace:
    return ParamSpace(
        [
            IntegerDim("t_thres", 1, 100),
            IntegerDim("t_times", -5, 5),
            CategoricalDim("t_kernel", KERNEL_SIZES),
        ]
    )


_INIT_GRIDS = {
    "type1": (
        ("s_chunk", (0, 1, 2)),
        ("s_scale", (1.0, 1.25, 1.5)),
        ("s_round", (0.0, 0.5, 1.0)),
    ),
    "type2": (
        ("t_thres", (15, 25, 35, 45, 55)),
        ("t_times", (-3, 0, 3)),
        ("t_kernel", (1, 7)),
    ),
}


def space_for(model_type: str) -> ParamSpace:
    if model_type == TYPE1:
        return type1_space()
    if model_type == TYPE2:
        return type2_space()
    raise ValueError(f"model_type must be 'type1' or 'type2', got {model_type!r}")


def grid_init(model_type: str) -> list[dict]:
    """Initial parameter grid, full Cartesian product in lexicographic order."""
    if model_type not in _INIT_GRIDS:
        raise ValueError(f"model_type must be 'type1' or 'type2', got {model_type!r}")
    names = [name for name, _ in _INIT_GRIDS[model_type]]
    axes = [values for _, values in _INIT_GRIDS[model_type]]
    return [dict(zip(names, combo)) for combo in itertools.product(*axes)]
