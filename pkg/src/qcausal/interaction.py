"""Interaction pipeline for quantum objects.

Two objects can interact wherever a path of one and a path of the other
occupy a common lattice point.  Every such (path, path, point) triple is a
candidate, weighted by the product of the two rows' squared amplitude
moduli.  One candidate is then drawn at random with probability
proportional to its weight: squared moduli are the probability measure
for selection, selection is the only stochastic element, and at most one
interaction per object pair is performed in a step.

Performing the selected candidate runs a fixed sequence:

  1. create_interaction_object: a bookkeeping object at the shared point
     that absorbs the interacting particles' conserved quantities,
  2. drop_particle on each interacting particle (its owning object
     disappears when its last particle is dropped),
  3. eliminate_unaffected_paths on each surviving owner: the shared path
     table collapses to the interacting row, which is what reduces an
     entangled partner to the matching alternative,
  4. process_interaction_object: a configured outcome table (rows of out
     particles, path states, complex amplitude) becomes the single out
     ParticleCollection; no dynamics are computed here, outcomes are
     entirely table-driven.

Conserved quantities flow additively: the out collection carries exactly
the sums recorded on the interaction object.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from .engine import RngState, random_draw
from .errors import ConfigError, DegenerateObjectError, InvariantViolation
from .state import (
    NORM_TOL,
    ObjectKind,
    ParticleInfo,
    Path,
    PathState,
    QuantumObject,
    SystemState,
    normalize_amplitudes,
    path_support,
    reduce_to_path,
)


@dataclass(frozen=True)
class InteractionCandidate:
    """One possible interaction: a shared point, one path of each object."""

    position: tuple[int, ...]
    path_index_1: int
    path_index_2: int
    joint_weight: float
    # which particle column of each object actually covers the point
    particle_index_1: int = 0
    particle_index_2: int = 0


@dataclass(frozen=True)
class OutcomeRow:
    """One possible interaction product: particles, their states, an amplitude."""

    particles: tuple[ParticleInfo, ...]
    pathstates: tuple[PathState, ...]
    amplitude: complex

    def __post_init__(self):
        if len(self.particles) != len(self.pathstates):
            raise ConfigError("outcome row: particles and pathstates differ in length")


@dataclass(frozen=True)
class OutcomeTable:
    """Configured interaction outcomes; squared amplitudes must sum to 1."""

    name: str
    rows: tuple[OutcomeRow, ...]

    def __post_init__(self):
        if not self.rows:
            raise ConfigError(f"outcome table {self.name!r}: no rows")
        norm = sum(abs(r.amplitude) ** 2 for r in self.rows)
        if abs(norm - 1.0) > NORM_TOL:
            raise ConfigError(
                f"outcome table {self.name!r}: squared amplitudes sum to {norm}, expected 1"
            )
        widths = {len(r.particles) for r in self.rows}
        if len(widths) != 1:
            raise ConfigError(f"outcome table {self.name!r}: rows differ in particle count")


@dataclass(frozen=True)
class Provenance:
    object_ids: tuple[str, str]
    path_indices: tuple[int, int]
    position: tuple[int, ...]


@dataclass
class InteractionObject:
    """Transient record of one selected interaction, pre-processing."""

    core: QuantumObject  # kind INTERACTION_OBJECT, single path at the position
    provenance: Provenance
    outcome_table: OutcomeTable | None = None


def determine_potential_interactions(a: QuantumObject, b: QuantumObject) -> list[InteractionCandidate]:
    """Enumerate candidates for every (path of a, path of b, shared point).

    Weight is |amp_a * amp_b|^2; zero-weight combinations are not emitted.
    Objects with disjoint footprints yield an empty list.
    """
    if a.object_id == b.object_id:
        raise ConfigError(f"object {a.object_id!r} cannot interact with itself")
    out = []
    b_supports = [path_support(p) for p in b.paths]
    for i, pa in enumerate(a.paths):
        wa = pa.weight
        if wa == 0.0:
            continue
        sa = path_support(pa)
        for j, pb in enumerate(b.paths):
            w = wa * pb.weight
            if w == 0.0:
                continue
            shared = sa & b_supports[j]
            for point in sorted(shared):
                out.append(
                    InteractionCandidate(
                        position=point,
                        path_index_1=i,
                        path_index_2=j,
                        joint_weight=w,
                        particle_index_1=_covering_column(pa, point),
                        particle_index_2=_covering_column(pb, point),
                    )
                )
    return out


def _covering_column(path: Path, point) -> int:
    for k, ps in enumerate(path.pathstates):
        if point in ps.spacepoints:
            return k
    raise InvariantViolation(f"no particle column covers {point}")


def select_interaction(candidates: list[InteractionCandidate], rng: RngState) -> InteractionCandidate:
    """Draw one candidate with probability proportional to its joint weight."""
    if not candidates:
        raise ConfigError("select_interaction: empty candidate list")
    total = sum(c.joint_weight for c in candidates)
    probs = [c.joint_weight / total for c in candidates]
    return random_draw(candidates, probs, rng)


def _column_contribution(obj: QuantumObject, path_index: int, particle_index: int) -> dict:
    """Conserved-quantity share of one interacting particle column."""
    ps = obj.paths[path_index].pathstates[particle_index]
    return {
        "energy": obj.particles[particle_index].mass,
        "momentum": ps.momentum,
        "angularmomentum": ps.angularmomentum,
    }


def _vec(c: dict, key: str, like: tuple) -> tuple:
    v = tuple(c.get(key, ()))
    return v if v else (0.0,) * len(like)


def _add_conserved(x: dict, y: dict) -> dict:
    return {
        "energy": x.get("energy", 0.0) + y.get("energy", 0.0),
        "momentum": tuple(a + b for a, b in zip(_vec(x, "momentum", y["momentum"]), y["momentum"])),
        "angularmomentum": tuple(
            a + b
            for a, b in zip(_vec(x, "angularmomentum", y["angularmomentum"]), y["angularmomentum"])
        ),
    }


def _sub_conserved(x: dict, y: dict) -> dict:
    return {
        "energy": x.get("energy", 0.0) - y.get("energy", 0.0),
        "momentum": tuple(a - b for a, b in zip(_vec(x, "momentum", y["momentum"]), y["momentum"])),
        "angularmomentum": tuple(
            a - b
            for a, b in zip(_vec(x, "angularmomentum", y["angularmomentum"]), y["angularmomentum"])
        ),
    }


_ia_counter = itertools.count()


def create_interaction_object(
    a: QuantumObject,
    b: QuantumObject,
    candidate: InteractionCandidate,
    outcome_table: OutcomeTable | None = None,
    tag: str | None = None,
) -> InteractionObject:
    """Record the selected interaction at its position.

    Conserved quantities are the sums of the two interacting particles'
    rest energies, momenta and angular momenta, taken from the selected
    rows.  Provenance (object ids, selected path indices, position) is kept
    for traces and the conservation ledger.  tag names the interaction
    object deterministically; without one, a process-wide counter is used.
    """
    pos = candidate.position
    for obj, idx in ((a, candidate.path_index_1), (b, candidate.path_index_2)):
        if not 0 <= idx < len(obj.paths):
            raise IndexError(f"object {obj.object_id!r}: selected path {idx} out of range")
        if pos not in path_support(obj.paths[idx]):
            raise ConfigError(
                f"object {obj.object_id!r}: selected path {idx} does not cover {pos}"
            )
    conserved = _add_conserved(
        _column_contribution(a, candidate.path_index_1, candidate.particle_index_1),
        _column_contribution(b, candidate.path_index_2, candidate.particle_index_2),
    )
    core = QuantumObject(
        object_id=f"ia-{tag if tag is not None else next(_ia_counter)}",
        kind=ObjectKind.INTERACTION_OBJECT,
        particles=(ParticleInfo("interaction", conserved["energy"]),),
        paths=(
            Path(
                amplitude=1.0,
                pathstates=(
                    PathState(
                        spacepoints=frozenset({pos}),
                        momentum=conserved["momentum"],
                        angularmomentum=conserved["angularmomentum"],
                    ),
                ),
            ),
        ),
        global_attrs={"position": pos},
        conserved=conserved,
    )
    prov = Provenance(
        object_ids=(a.object_id, b.object_id),
        path_indices=(candidate.path_index_1, candidate.path_index_2),
        position=pos,
    )
    return InteractionObject(core=core, provenance=prov, outcome_table=outcome_table)


def drop_particle(
    state: SystemState, object_id: str, particle_index: int = 0, row_index: int = 0
) -> QuantumObject | None:
    """Destroy one particle column; remove the object when none remain.

    Returns the surviving owner (with the column removed and its conserved
    share subtracted) or None when the object was removed outright.
    row_index names the row whose pathstate carries the departing conserved
    share (the interacting row).  The drop is recorded in the state's event
    log.  Dropping from a missing id raises, so a double drop is an error.
    """
    obj = state.get_object(object_id)
    if not 0 <= particle_index < len(obj.particles):
        raise IndexError(f"object {object_id!r}: particle index {particle_index} out of range")
    state.event_log.append({"event": "drop_particle", "object": object_id, "particle": particle_index})
    if len(obj.particles) == 1:
        del state.objects[object_id]
        return None
    share = _column_contribution(obj, row_index, particle_index)
    particles = obj.particles[:particle_index] + obj.particles[particle_index + 1 :]
    paths = tuple(
        replace(p, pathstates=p.pathstates[:particle_index] + p.pathstates[particle_index + 1 :])
        for p in obj.paths
    )
    survivor = replace(
        obj,
        particles=particles,
        paths=paths,
        conserved=_sub_conserved(obj.conserved, share) if obj.conserved else {},
    )
    state.objects[object_id] = survivor
    return survivor


def eliminate_unaffected_paths(obj: QuantumObject, path_index: int) -> QuantumObject:
    """Collapse an owner's table to the interacting row (all particles at once)."""
    return reduce_to_path(obj, path_index)


def process_interaction_object(ia: InteractionObject) -> QuantumObject:
    """Turn the interaction into its configured products.

    The outcome table's rows become the paths of a single out
    ParticleCollection positioned at the interaction point; conserved
    quantities are copied from the interaction object unchanged.
    """
    table = ia.outcome_table
    if table is None:
        raise ConfigError(f"interaction {ia.core.object_id!r}: no outcome table configured")
    particles = table.rows[0].particles
    paths = tuple(Path(amplitude=r.amplitude, pathstates=r.pathstates) for r in table.rows)
    result = QuantumObject(
        object_id=ia.core.object_id.replace("ia-", "out-"),
        kind=ObjectKind.PARTICLE_COLLECTION,
        particles=particles,
        paths=paths,
        global_attrs={"position": ia.provenance.position},
        conserved=dict(ia.core.conserved),
    )
    return normalize_amplitudes(result)


def perform_interaction(
    state: SystemState,
    a_id: str,
    b_id: str,
    candidate: InteractionCandidate,
    outcome_table: OutcomeTable,
) -> QuantumObject:
    """Run the full pipeline for one selected candidate.

    Order: create the interaction object, drop both interacting particles,
    eliminate unaffected paths on every surviving owner (reducing partner
    particles to the matching row), process the outcome table.  The out
    collection is added to the state and returned.
    """
    a = state.get_object(a_id)
    b = state.get_object(b_id)
    # event-log length is unique per interaction within a state, so the id
    # is reproducible run to run (a global counter would not be)
    ia = create_interaction_object(a, b, candidate, outcome_table, tag=str(len(state.event_log)))
    survivor_a = drop_particle(state, a_id, candidate.particle_index_1, candidate.path_index_1)
    survivor_b = drop_particle(state, b_id, candidate.particle_index_2, candidate.path_index_2)
    if survivor_a is not None:
        state.objects[a_id] = eliminate_unaffected_paths(survivor_a, candidate.path_index_1)
    if survivor_b is not None:
        state.objects[b_id] = eliminate_unaffected_paths(survivor_b, candidate.path_index_2)
    result = process_interaction_object(ia)
    state.add_object(result)
    state.event_log.append(
        {
            "event": "interaction",
            "participants": [a_id, b_id],
            "position": candidate.position,
            "result": result.object_id,
        }
    )
    return result


def apply_qft_interactions(state: SystemState, table_for, rng: RngState) -> list[QuantumObject]:
    """One engine-step sweep: at most one interaction per object pair.

    table_for(a, b, candidate) supplies the outcome table for a selected
    candidate (or None to veto the pair).  Pairs are visited in sorted id
    order; each object participates in at most one interaction per sweep.
    Returns the out collections created this sweep.
    """
    results = []
    consumed: set[str] = set()
    ids = sorted(state.objects)
    for i, a_id in enumerate(ids):
        for b_id in ids[i + 1 :]:
            if a_id in consumed or b_id in consumed:
                continue
            if a_id not in state.objects or b_id not in state.objects:
                continue
            cands = determine_potential_interactions(state.objects[a_id], state.objects[b_id])
            if not cands:
                continue
            chosen = select_interaction(cands, rng)
            table = table_for(state.objects[a_id], state.objects[b_id], chosen)
            if table is None:
                continue
            results.append(perform_interaction(state, a_id, b_id, chosen, table))
            consumed.update((a_id, b_id))
    return results
