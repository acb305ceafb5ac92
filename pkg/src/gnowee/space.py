"""Design spaces mixing continuous, integer, binary, discrete-set and permutation variables.

Inside the optimizer a design is held in three slices:

* ``cont`` -- continuous values, in variable order;
* ``disc`` -- integer/binary/discrete-set variables as *indices* into their
  ordered value sets (an integer variable on ``[lo, hi]`` is the set
  ``lo, lo+1, ..., hi``);
* ``perm`` -- the single permutation variable, if any.

The user-facing form is the aligned value list returned by
:meth:`DesignSpace.decode`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "DesignSpace",
    "DesignVector",
    "Kind",
    "SpaceError",
    "VariableSpec",
]


class SpaceError(ValueError):
    """Invalid variable specification or a value vector of the wrong length."""


class Kind(str, enum.Enum):
    CONTINUOUS = "continuous"
    INTEGER = "integer"
    BINARY = "binary"
    DISCRETE = "discrete"
    COMBINATORIAL = "combinatorial"


@dataclass(frozen=True)
class VariableSpec:
    kind: Kind
    lower: float | None = None
    upper: float | None = None
    values: tuple[float, ...] | None = None
    length: int | None = None
    looping: bool = True
    name: str = ""

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in (Kind.CONTINUOUS, Kind.INTEGER):
            if self.lower is None or self.upper is None:
                raise SpaceError(f"{kind.value} variable needs lower and upper bounds")
            if not float(self.lower) < float(self.upper):
                raise SpaceError(f"lower bound {self.lower} must be below upper {self.upper}")
            if kind is Kind.INTEGER and (self.lower != int(self.lower) or self.upper != int(self.upper)):
                raise SpaceError("integer variable bounds must be integral")
        elif kind is Kind.DISCRETE:
            if not self.values:
                raise SpaceError("discrete variable needs a non-empty value list")
            vals = tuple(float(v) for v in self.values)
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise SpaceError("discrete values must be strictly ascending")
            object.__setattr__(self, "values", vals)
        elif kind is Kind.COMBINATORIAL:
            if self.length is None or int(self.length) < 2:
                raise SpaceError("permutation length must be at least 2")
            object.__setattr__(self, "length", int(self.length))

    @classmethod
    def continuous(cls, lower, upper, name=""):
        return cls(Kind.CONTINUOUS, lower=float(lower), upper=float(upper), name=name)

    @classmethod
    def integer(cls, lower, upper, name=""):
        return cls(Kind.INTEGER, lower=int(lower), upper=int(upper), name=name)

    @classmethod
    def binary(cls, name=""):
        return cls(Kind.BINARY, name=name)

    @classmethod
    def discrete(cls, values, name=""):
        return cls(Kind.DISCRETE, values=tuple(values), name=name)

    @classmethod
    def combinatorial(cls, length, looping=True, name=""):
        return cls(Kind.COMBINATORIAL, length=length, looping=looping, name=name)

    @property
    def is_discrete_family(self) -> bool:
        return self.kind in (Kind.INTEGER, Kind.BINARY, Kind.DISCRETE)

    def value_set(self) -> np.ndarray:
        """Ordered allowed values of a discrete-family variable."""
        if self.kind is Kind.INTEGER:
            return np.arange(int(self.lower), int(self.upper) + 1, dtype=float)
        if self.kind is Kind.BINARY:
            return np.array([0.0, 1.0])
        if self.kind is Kind.DISCRETE:
            return np.asarray(self.values, dtype=float)
        raise SpaceError(f"{self.kind.value} variable has no value set")

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.name:
            d["name"] = self.name
        if self.kind in (Kind.CONTINUOUS, Kind.INTEGER):
            d["lower"], d["upper"] = self.lower, self.upper
        elif self.kind is Kind.DISCRETE:
            d["values"] = list(self.values)
        elif self.kind is Kind.COMBINATORIAL:
            d["length"], d["looping"] = self.length, self.looping
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "VariableSpec":
        try:
            kind = Kind(d["kind"])
        except (KeyError, ValueError) as exc:
            raise SpaceError(f"bad or missing variable kind in {d!r}") from exc
        name = d.get("name", "")
        if kind is Kind.CONTINUOUS:
            return cls.continuous(d["lower"], d["upper"], name)
        if kind is Kind.INTEGER:
            return cls.integer(d["lower"], d["upper"], name)
        if kind is Kind.BINARY:
            return cls.binary(name)
        if kind is Kind.DISCRETE:
            if "values" in d:
                return cls.discrete(d["values"], name)
            # multiples of a step inside [lower, upper]
            step = float(d["step"])
            k0 = math.ceil(float(d["lower"]) / step - 1e-9)
            k1 = math.floor(float(d["upper"]) / step + 1e-9)
            return cls.discrete([k * step for k in range(k0, k1 + 1)], name)
        return cls.combinatorial(d["length"], d.get("looping", True), name)


@dataclass
class DesignVector:
    """One candidate, partitioned into continuous, discrete-index and permutation slices."""

    cont: np.ndarray
    disc: np.ndarray
    perm: np.ndarray | None = None

    def copy(self) -> "DesignVector":
        return DesignVector(
            self.cont.copy(), self.disc.copy(), None if self.perm is None else self.perm.copy()
        )

    def __eq__(self, other):
        if not isinstance(other, DesignVector):
            return NotImplemented
        if (self.perm is None) != (other.perm is None):
            return False
        return (
            np.array_equal(self.cont, other.cont)
            and np.array_equal(self.disc, other.disc)
            and (self.perm is None or np.array_equal(self.perm, other.perm))
        )


@dataclass
class DesignSpace:
    variables: list[VariableSpec]
    cont_index: np.ndarray = field(init=False, repr=False)
    disc_index: np.ndarray = field(init=False, repr=False)
    perm_index: int | None = field(init=False, repr=False)

    def __post_init__(self):
        self.variables = list(self.variables)
        if not self.variables:
            raise SpaceError("design space has no variables")
        kinds = [v.kind for v in self.variables]
        perms = [i for i, k in enumerate(kinds) if k is Kind.COMBINATORIAL]
        if len(perms) > 1:
            raise SpaceError("at most one combinatorial variable is supported")
        self.perm_index = perms[0] if perms else None
        self.cont_index = np.array([i for i, k in enumerate(kinds) if k is Kind.CONTINUOUS], dtype=int)
        self.disc_index = np.array(
            [i for i, v in enumerate(self.variables) if v.is_discrete_family], dtype=int
        )
        cont = [self.variables[i] for i in self.cont_index]
        self.lower = np.array([v.lower for v in cont], dtype=float)
        self.upper = np.array([v.upper for v in cont], dtype=float)
        self.value_sets = [self.variables[i].value_set() for i in self.disc_index]
        self.cardinality = np.array([len(s) for s in self.value_sets], dtype=int)
        self._simple_cont = self.perm_index is None and len(self.disc_index) == 0 and np.array_equal(
            self.cont_index, np.arange(len(self.variables))
        )

    # sizes -------------------------------------------------------------
    def __len__(self):
        return len(self.variables)

    @property
    def n_cont(self) -> int:
        return len(self.cont_index)

    @property
    def n_disc(self) -> int:
        return len(self.disc_index)

    @property
    def perm_length(self) -> int:
        return 0 if self.perm_index is None else self.variables[self.perm_index].length

    @property
    def looping(self) -> bool:
        return self.perm_index is not None and self.variables[self.perm_index].looping

    @property
    def design_length(self) -> int:
        """Scalar variables plus permutation length."""
        return self.n_cont + self.n_disc + self.perm_length

    # conversions -------------------------------------------------------
    def decode(self, vec: DesignVector):
        """Aligned values: a float array, or a list when a permutation is present."""
        if self._simple_cont:
            return vec.cont
        if self.perm_index is None:
            out = np.empty(len(self.variables))
            out[self.cont_index] = vec.cont
            for k, i in enumerate(self.disc_index):
                out[i] = self.value_sets[k][vec.disc[k]]
            return out
        out: list = [None] * len(self.variables)
        for k, i in enumerate(self.cont_index):
            out[i] = float(vec.cont[k])
        for k, i in enumerate(self.disc_index):
            out[i] = float(self.value_sets[k][vec.disc[k]])
        out[self.perm_index] = vec.perm
        return out

    def _check_length(self, values):
        if len(values) != len(self.variables):
            raise SpaceError(f"expected {len(self.variables)} values, got {len(values)}")

    def encode(self, values) -> DesignVector:
        """Partition an aligned value list; values must already be valid."""
        ok, why = self.validate(values)
        if not ok:
            raise SpaceError(why)
        cont = np.array([float(values[i]) for i in self.cont_index], dtype=float)
        disc = np.array(
            [int(np.searchsorted(s, float(values[i]))) for s, i in zip(self.value_sets, self.disc_index)],
            dtype=int,
        )
        perm = None if self.perm_index is None else np.asarray(values[self.perm_index], dtype=int).copy()
        return DesignVector(cont, disc, perm)

    # checks ------------------------------------------------------------
    def validate(self, values) -> tuple[bool, str | None]:
        """``(True, None)`` if every variable holds an admissible value."""
        self._check_length(values)
        for i, (spec, v) in enumerate(zip(self.variables, values)):
            label = spec.name or f"#{i}"
            if spec.kind is Kind.COMBINATORIAL:
                p = np.asarray(v)
                if p.shape != (spec.length,) or not np.array_equal(np.sort(p), np.arange(spec.length)):
                    return False, f"variable {label} (index {i}) is not a permutation of 0..{spec.length - 1}"
                continue
            try:
                x = float(v)
            except (TypeError, ValueError):
                return False, f"variable {label} (index {i}) is not a number: {v!r}"
            if spec.kind is Kind.CONTINUOUS:
                if not spec.lower <= x <= spec.upper:
                    return False, f"variable {label} (index {i}) = {x} outside [{spec.lower}, {spec.upper}]"
            else:
                s = spec.value_set()
                j = int(np.searchsorted(s, x))
                if j >= len(s) or s[j] != x:
                    return False, f"variable {label} (index {i}) = {x} is not an allowed value"
        return True, None

    def repair_to_bounds(self, values) -> list:
        """Clamp continuous values, snap discrete ones to the nearest member (ties go low)."""
        self._check_length(values)
        out = list(values)
        for i, spec in enumerate(self.variables):
            if spec.kind is Kind.COMBINATORIAL:
                continue
            x = float(out[i])
            if spec.kind is Kind.CONTINUOUS:
                out[i] = min(max(x, spec.lower), spec.upper)
            elif spec.kind is Kind.INTEGER:
                out[i] = float(min(max(math.floor(x + 0.5), spec.lower), spec.upper))
            else:
                out[i] = float(_snap(spec.value_set(), x))
        return out

    # array-level repair used by the operators --------------------------
    def clip_cont(self, cont: np.ndarray) -> np.ndarray:
        return np.clip(cont, self.lower, self.upper)

    def round_disc(self, disc: np.ndarray) -> np.ndarray:
        """Round fractional indices half-up and clamp them into each value set."""
        idx = np.floor(np.asarray(disc, dtype=float) + 0.5)
        return np.clip(idx, 0, self.cardinality - 1).astype(int)

    # sampling ----------------------------------------------------------
    def lhc_initialize(self, count: int, rng: np.random.Generator) -> list[DesignVector]:
        """Latin hypercube sample: each scalar dimension has one point per stratum."""
        if count < 1:
            raise ValueError("count must be at least 1")
        n_scalar = self.n_cont + self.n_disc
        u = np.empty((count, n_scalar))
        for j in range(n_scalar):
            u[:, j] = (rng.permutation(count) + rng.random(count)) / count
        return self._from_unit(u, rng)

    def uniform_initialize(self, count: int, rng: np.random.Generator) -> list[DesignVector]:
        if count < 1:
            raise ValueError("count must be at least 1")
        return self._from_unit(rng.random((count, self.n_cont + self.n_disc)), rng)

    def _from_unit(self, u: np.ndarray, rng) -> list[DesignVector]:
        count = u.shape[0]
        cont = self.lower + u[:, : self.n_cont] * (self.upper - self.lower)
        disc = np.minimum(
            np.floor(u[:, self.n_cont :] * self.cardinality).astype(int), self.cardinality - 1
        )
        out = []
        for r in range(count):
            perm = None if self.perm_index is None else rng.permutation(self.perm_length)
            out.append(DesignVector(cont[r].copy(), disc[r].copy(), perm))
        return out

    # documents ---------------------------------------------------------
    def to_dict(self) -> dict:
        return {"variables": [v.to_dict() for v in self.variables]}

    @classmethod
    def from_dict(cls, d: dict) -> "DesignSpace":
        if "variables" not in d:
            raise SpaceError("problem document has no 'variables' list")
        return cls([VariableSpec.from_dict(v) for v in d["variables"]])


def _snap(values: Sequence[float] | np.ndarray, x: float) -> float:
    s = np.asarray(values, dtype=float)
    j = int(np.searchsorted(s, x))
    if j == 0:
        return s[0]
    if j >= len(s):
        return s[-1]
    lo, hi = s[j - 1], s[j]
    return lo if x - lo <= hi - x else hi
