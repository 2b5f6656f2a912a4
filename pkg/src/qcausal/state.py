"""Core state model: lattice space, fields, and multi-path quantum objects.

A quantum object is a rectangular table.  Each row is one path (one
alternative history) and carries a single complex amplitude; each column is
one particle.  A table cell is a path state: the set of lattice points the
particle occupies on that path, its momentum and angular momentum, and a
spin direction given as a planar angle in degrees.  Squared amplitude
moduli over the rows sum to one.  Entanglement is nothing but row sharing:
reducing the table to one row collapses every particle in the object at
once.

Objects also carry two bookkeeping blocks: global attributes (position,
momentum summaries) and conserved quantities (energy, momentum, angular
momentum).  The conserved block is authoritative for conservation checks;
the global block is a convenience summary.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .engine import RngState
from .errors import ConfigError, DegenerateObjectError, InvariantViolation, UnknownObjectError

NORM_TOL = 1e-9  # squared amplitude moduli must sum to 1 within this


class ObjectKind(enum.Enum):
    PARTICLE = "Particle"
    PARTICLE_COLLECTION = "ParticleCollection"
    INTERACTION_OBJECT = "InteractionObject"


@dataclass(frozen=True)
class Space:
    """Discrete lattice: 1 to 3 dimensions, extent cells per axis, spacing delta_x."""

    dims: int
    extent: tuple[int, ...]
    delta_x: float

    def __post_init__(self):
        if self.dims not in (1, 2, 3):
            raise ConfigError(f"space.dims must be 1, 2 or 3, got {self.dims}")
        if len(self.extent) != self.dims:
            raise ConfigError(f"space.extent needs {self.dims} entries, got {self.extent}")
        if any(int(e) <= 0 for e in self.extent):
            raise ConfigError(f"space.extent entries must be > 0, got {self.extent}")
        if not self.delta_x > 0:
            raise ConfigError(f"space.delta_x must be > 0, got {self.delta_x}")

    def contains(self, point: tuple[int, ...]) -> bool:
        return len(point) == self.dims and all(
            0 <= c < e for c, e in zip(point, self.extent)
        )


@dataclass
class FieldGrid:
    """A named field with one (real or complex) value per lattice cell."""

    name: str
    values: np.ndarray

    def check(self, space: Space):
        if tuple(self.values.shape) != space.extent:
            raise ConfigError(
                f"field {self.name!r}: shape {self.values.shape} does not match extent {space.extent}"
            )
        if not np.all(np.isfinite(self.values.view(float) if np.iscomplexobj(self.values) else self.values)):
            raise ConfigError(f"field {self.name!r}: non-finite value")


def _norm_angle(deg: float) -> float:
    a = math.fmod(float(deg), 360.0)
    return a + 360.0 if a < 0 else a


@dataclass(frozen=True)
class PathState:
    """One particle's state on one path: occupied cells, momenta, spin angle."""

    spacepoints: frozenset
    momentum: tuple[float, ...]
    angularmomentum: tuple[float, ...]
    spindir: float = 0.0

    def __post_init__(self):
        if not self.spacepoints:
            raise ConfigError("pathstate.spacepoints must be non-empty")
        object.__setattr__(self, "spacepoints", frozenset(tuple(p) for p in self.spacepoints))
        object.__setattr__(self, "momentum", tuple(float(v) for v in self.momentum))
        object.__setattr__(self, "angularmomentum", tuple(float(v) for v in self.angularmomentum))
        object.__setattr__(self, "spindir", _norm_angle(self.spindir))


@dataclass(frozen=True)
class Path:
    """One table row: a complex amplitude plus one PathState per particle."""

    amplitude: complex
    pathstates: tuple[PathState, ...]

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "pathstates", tuple(self.pathstates))

    @property
    def weight(self) -> float:
        """Squared amplitude modulus (the probability weight of this row)."""
        return abs(self.amplitude) ** 2


@dataclass(frozen=True)
class ParticleInfo:
    """Particle column metadata: a type tag and a rest mass."""

    type: str
    mass: float = 0.0


def _zeros(n: int) -> tuple[float, ...]:
    return (0.0,) * n


@dataclass(frozen=True)
class QuantumObject:
    """A rectangular path table plus global and conserved attribute blocks."""

    object_id: str
    kind: ObjectKind
    particles: tuple[ParticleInfo, ...]
    paths: tuple[Path, ...]
    global_attrs: dict = field(default_factory=dict)
    conserved: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "particles", tuple(self.particles))
        object.__setattr__(self, "paths", tuple(self.paths))
        ncols = len(self.particles)
        if ncols == 0:
            raise DegenerateObjectError(f"object {self.object_id!r}: no particles")
        if not self.paths:
            raise DegenerateObjectError(f"object {self.object_id!r}: no paths")
        for i, p in enumerate(self.paths):
            if len(p.pathstates) != ncols:
                raise ConfigError(
                    f"object {self.object_id!r}: path {i} has {len(p.pathstates)} "
                    f"pathstates for {ncols} particles (table must be rectangular)"
                )

    @property
    def n_paths(self) -> int:
        return len(self.paths)

    def amplitude_norm(self) -> float:
        return sum(p.weight for p in self.paths)

    def check_normalized(self, tol: float = NORM_TOL):
        norm = self.amplitude_norm()
        if abs(norm - 1.0) > tol:
            raise InvariantViolation(
                f"object {self.object_id!r}: squared amplitudes sum to {norm!r}, expected 1"
            )


def normalize_amplitudes(obj: QuantumObject) -> QuantumObject:
    """Rescale row amplitudes so squared moduli sum to one.

    Raises DegenerateObjectError when every amplitude is zero.  A table
    already normalized within NORM_TOL is returned with amplitudes
    unchanged, so normalization is idempotent bit for bit.
    """
    norm = obj.amplitude_norm()
    if norm <= 0.0:
        raise DegenerateObjectError(f"object {obj.object_id!r}: all amplitudes zero")
    if abs(norm - 1.0) <= NORM_TOL:
        return obj
    scale = 1.0 / math.sqrt(norm)
    new_paths = tuple(replace(p, amplitude=p.amplitude * scale) for p in obj.paths)
    return replace(obj, paths=new_paths)


def reduce_to_path(obj: QuantumObject, path_index: int) -> QuantumObject:
    """Collapse the table to one row, renormalized to modulus 1.

    Collapsing applies to every particle column at once; this is where
    entangled partners get reduced together.  Idempotent: reducing an
    already single-row object to row 0 returns an equal object.
    """
    if not 0 <= path_index < len(obj.paths):
        raise IndexError(
            f"object {obj.object_id!r}: path index {path_index} out of range 0..{len(obj.paths) - 1}"
        )
    chosen = obj.paths[path_index]
    mod = abs(chosen.amplitude)
    if mod == 0.0:
        raise DegenerateObjectError(
            f"object {obj.object_id!r}: cannot reduce to zero-amplitude path {path_index}"
        )
    new = replace(chosen, amplitude=chosen.amplitude / mod)
    return replace(obj, paths=(new,))


def object_footprint(obj: QuantumObject) -> frozenset:
    """Union of occupied lattice points over all paths and particles."""
    points = set()
    for path in obj.paths:
        for ps in path.pathstates:
            points |= ps.spacepoints
    return frozenset(points)


def path_support(path: Path) -> frozenset:
    """Union of occupied lattice points over one row's particles."""
    points = set()
    for ps in path.pathstates:
        points |= ps.spacepoints
    return frozenset(points)


@dataclass
class SystemState:
    """Everything the laws act on: space, fields, objects, clock, RNG.

    The clock is recomputed as step_count * delta_t on every advance, so t
    is an exact multiple of delta_t with no floating accumulation drift.
    """

    space: Space
    fields: dict = field(default_factory=dict)
    objects: dict = field(default_factory=dict)
    rng: RngState = field(default_factory=lambda: RngState(0))
    step_count: int = 0
    t: float = 0.0
    delta_t: float = 1.0
    event_log: list = field(default_factory=list)

    def advance_clock(self, delta_t: float):
        self.delta_t = delta_t
        self.step_count += 1
        self.t = self.step_count * delta_t

    def add_object(self, obj: QuantumObject):
        if obj.object_id in self.objects:
            raise ConfigError(f"duplicate object id {obj.object_id!r}")
        self.objects[obj.object_id] = obj

    def get_object(self, object_id: str) -> QuantumObject:
        try:
            return self.objects[object_id]
        except KeyError:
            raise UnknownObjectError(object_id) from None

    def invariant_problem(self):
        """Cheap post-law validation; returns a description or None."""
        for obj in self.objects.values():
            ncols = len(obj.particles)
            for i, p in enumerate(obj.paths):
                if len(p.pathstates) != ncols:
                    return f"object {obj.object_id!r} path {i} not rectangular"
            for pt in object_footprint(obj):
                if not self.space.contains(pt):
                    return f"object {obj.object_id!r} occupies {pt} outside the lattice"
        return None


def build_system_state(config) -> SystemState:
    """Assemble a SystemState from a parsed ExperimentConfig.

    Validates lattice bounds and table shapes; invalid values raise
    ConfigError naming the offending field.
    """
    space = config.space
    state = SystemState(space=space, rng=RngState(config.engine.seed), delta_t=config.engine.delta_t)
    for name, grid in config.fields.items():
        grid.check(space)
        state.fields[name] = grid
    for obj in config.objects:
        for pt in object_footprint(obj):
            if not space.contains(pt):
                raise ConfigError(
                    f"object {obj.object_id!r}: spacepoint {pt} outside extent {space.extent}"
                )
        norm = obj.amplitude_norm()
        if abs(norm - 1.0) > NORM_TOL:
            raise ConfigError(
                f"object {obj.object_id!r}: squared amplitudes sum to {norm}, expected 1"
            )
        state.add_object(obj)
    return state


def total_conserved(objects: Iterable[QuantumObject]) -> dict:
    """Elementwise sums of the conserved blocks over a set of objects."""
    total = {"energy": 0.0, "momentum": None, "angularmomentum": None}
    for obj in objects:
        c = obj.conserved
        total["energy"] += c.get("energy", 0.0)
        for key in ("momentum", "angularmomentum"):
            vec = tuple(c.get(key, ()))
            if total[key] is None:
                total[key] = vec
            elif vec:
                total[key] = tuple(a + b for a, b in zip(total[key], vec))
    for key in ("momentum", "angularmomentum"):
        if total[key] is None:
            total[key] = ()
    return total
