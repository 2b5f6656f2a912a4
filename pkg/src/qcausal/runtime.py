"""Decentralized runtime: per-object engines, a space mediator, rounds.

The centralized drivers scan the whole object set to find interactions.
Here each object is advanced by its own engine, and engines never read
another object's state.  Coordination runs through a mediator board of
advertisements: in every round each engine publishes, per path and per
occupied cell, an (object, path, cell, weight) advertisement.  Detection
reads the previous round's board, so both parties of an overlap see the
same picture and propose the same event; the one-round lag is the price
of symmetry.

A round has four phases:

  1. detect: every engine intersects its own advertisements with the
     board and proposes an event per overlapping object.  Proposals are
     keyed by the (sorted) participant pair; the mediator checks the two
     sides submitted identical shared-cell lists.
  2. grant: events are ordered by (position, participant ids), or
     shuffled under the randomized scheduler, and granted greedily; an
     object joins at most one interaction per round, later events with a
     busy participant are rejected and retried naturally next round.
     A granted event is claimed: the policy's prepare hook runs (an
     analyzer reweighting its target, for instance), live candidates are
     recomputed from the prepared objects, one is selected by squared
     amplitude weight, and the policy supplies its outcome table (or
     vetoes).  The interaction pipeline is the same one the centralized
     drivers use, so the selection distribution is identical by
     construction.  Every interaction appends a ledger check: conserved
     totals over the participants before must equal survivors plus the
     out collection after, exactly.
  3. propagate: engines that did not interact and have been alive for
     PROPAGATION_DELAY rounds ask the policy to advance their object
     (drift, a fan to the screen).  The delay guarantees an overlap
     standing at spawn time is detected before anyone moves.
  4. publish: live objects advertise, the board flips.

Consumed objects retire their engines; interaction products get fresh
ones.  All per-round iteration is in sorted order and every random draw
comes from substreams of one root, so a run is reproducible bit for bit
under both schedulers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import RngState
from .errors import ConfigError, InvariantViolation
from .experiments import bell as _bell
from .experiments import doubleslit as _ds
from .interaction import (
    OutcomeTable,
    determine_potential_interactions,
    perform_interaction,
    select_interaction,
)
from .state import QuantumObject, SystemState, total_conserved

SCHEDULERS = ("round-robin", "randomized")
# rounds an object must sit on the board before it may move; detection of
# a standing overlap takes one round of lag plus one to act on it
PROPAGATION_DELAY = 2


@dataclass(frozen=True)
class Advertisement:
    """One (path, cell) occupancy notice on the mediator board."""

    object_id: str
    path_index: int
    cell: tuple[int, ...]
    weight: float


@dataclass
class ObjectEngine:
    """Worker owning exactly one object; sees the world only via RoundView."""

    object_id: str
    rng: RngState
    proper_time: int = 0

    def detect(self, view: "RoundView"):
        """Propose one event per object overlapping my advertised cells."""
        mine = {ad.cell for ad in view.own_ads()}
        partners: dict[str, set] = {}
        for cell in sorted(mine):
            for ad in view.ads_at(cell):
                if ad.object_id != self.object_id:
                    partners.setdefault(ad.object_id, set()).add(cell)
        for other_id in sorted(partners):
            view.propose(other_id, tuple(sorted(partners[other_id])))


class RoundView:
    """The only aperture an engine gets onto the shared world."""

    def __init__(self, mediator: "SpaceMediator", object_id: str):
        self._mediator = mediator
        self._object_id = object_id

    def own_ads(self) -> list[Advertisement]:
        return self._mediator.board_by_object.get(self._object_id, [])

    def ads_at(self, cell) -> list[Advertisement]:
        return self._mediator.board.get(cell, [])

    def propose(self, other_id: str, cells: tuple):
        self._mediator.submit_proposal(self._object_id, other_id, cells)


@dataclass
class ProposedEvent:
    pair: tuple[str, str]
    cells: tuple


@dataclass
class LedgerEntry:
    """Conservation check for one interaction; totals must match exactly."""

    round_index: int
    position: tuple[int, ...]
    participants: tuple[str, str]
    out_id: str
    before: dict
    after: dict

    @property
    def balanced(self) -> bool:
        return _conserved_signature(self.before) == _conserved_signature(self.after)


def _conserved_signature(c: dict) -> tuple:
    return (
        c.get("energy", 0.0),
        tuple(c.get("momentum") or ()),
        tuple(c.get("angularmomentum") or ()),
    )


class SpaceMediator:
    """Advertisement board plus event bookkeeping.

    board holds last round's advertisements (cell -> ads, object -> ads);
    next_board collects this round's publications and becomes the board at
    the flip.  Proposals are checked pairwise for symmetry: both parties
    must name the same shared cells, anything else is a protocol bug.
    """

    def __init__(self, rng: RngState, scheduler: str = "round-robin"):
        if scheduler not in SCHEDULERS:
            raise ConfigError(f"scheduler must be one of {SCHEDULERS}, got {scheduler!r}")
        self.rng = rng
        self.scheduler = scheduler
        self.board: dict[tuple, list[Advertisement]] = {}
        self.board_by_object: dict[str, list[Advertisement]] = {}
        self._next: list[Advertisement] = []
        self._proposals: dict[tuple[str, str], dict[str, tuple]] = {}
        self.granted = 0
        self.rejections: list[dict] = []

    def publish(self, ad: Advertisement):
        self._next.append(ad)

    def flip(self):
        self.board = {}
        self.board_by_object = {}
        for ad in self._next:
            self.board.setdefault(ad.cell, []).append(ad)
            self.board_by_object.setdefault(ad.object_id, []).append(ad)
        self._next = []
        self._proposals = {}

    def submit_proposal(self, proposer: str, other: str, cells: tuple):
        if proposer == other:
            raise ConfigError(f"object {proposer!r} proposed an event with itself")
        pair = (proposer, other) if proposer < other else (other, proposer)
        self._proposals.setdefault(pair, {})[proposer] = cells

    def collect_events(self) -> list[ProposedEvent]:
        """Paired, symmetry-checked proposals in grant order."""
        events = []
        for pair, sides in sorted(self._proposals.items()):
            if set(sides) != set(pair):
                missing = [p for p in pair if p not in sides]
                raise InvariantViolation(
                    f"asymmetric proposal for {pair}: no submission from {missing}"
                )
            ca, cb = sides[pair[0]], sides[pair[1]]
            if ca != cb:
                raise InvariantViolation(
                    f"proposal mismatch for {pair}: {ca} vs {cb}"
                )
            events.append(ProposedEvent(pair=pair, cells=ca))
        events.sort(key=lambda e: (e.cells[0], e.pair))
        if self.scheduler == "randomized":
            self._shuffle(events)
        return events

    def _shuffle(self, items: list):
        for i in range(len(items) - 1, 0, -1):
            j = int(self.rng.random() * (i + 1))
            items[i], items[j] = items[j], items[i]

    def reject(self, event: ProposedEvent, round_index: int, reason: str):
        self.rejections.append(
            {"round": round_index, "pair": list(event.pair), "reason": reason}
        )


class RoundPolicy:
    """What the world means: outcome tables, motion, completion.

    The runtime is generic; everything experiment-specific hangs off these
    hooks.  prepare may rewrite a participant before candidates are
    recomputed (measurement devices do), table_for returns the outcome
    table for a selected candidate or None to veto, propagate returns a
    moved replacement object or None to stand still.
    """

    def prepare(self, state: SystemState, a_id: str, b_id: str):
        pass

    def table_for(self, state: SystemState, a_id: str, b_id: str, candidate) -> OutcomeTable | None:
        raise NotImplementedError

    def propagate(self, state: SystemState, object_id: str) -> QuantumObject | None:
        return None

    def on_interaction(self, state: SystemState, a_id: str, b_id: str, candidate, out: QuantumObject):
        pass

    def done(self, state: SystemState) -> bool:
        return not state.objects


class RefinedRuntime:
    """Round loop driver over a store, engines, mediator, and policy."""

    def __init__(
        self,
        state: SystemState,
        policy: RoundPolicy,
        rng: RngState,
        scheduler: str = "round-robin",
        keep_ledger: bool = False,
    ):
        self.state = state
        self.policy = policy
        self.rng = rng
        self.mediator = SpaceMediator(rng.substream("events"), scheduler)
        self.keep_ledger = keep_ledger
        self.ledger: list[LedgerEntry] = []
        self.ledger_checks = 0
        self.interactions = 0
        self.round_index = 0
        self.engines: dict[str, ObjectEngine] = {}
        for object_id in sorted(state.objects):
            self.spawn_engine(object_id)

    def spawn_engine(self, object_id: str):
        if object_id in self.engines:
            raise ConfigError(f"engine for {object_id!r} already exists")
        self.engines[object_id] = ObjectEngine(
            object_id=object_id, rng=self.rng.substream("obj", object_id)
        )

    def retire_missing_engines(self):
        for object_id in [oid for oid in self.engines if oid not in self.state.objects]:
            del self.engines[object_id]

    # -- round phases ------------------------------------------------------

    def run_round(self):
        busy = self.detect_and_grant()
        self.propagate_phase(busy)
        self.publish_phase()
        for engine in self.engines.values():
            engine.proper_time += 1
        self.round_index += 1

    def detect_and_grant(self) -> set:
        for object_id in sorted(self.engines):
            self.engines[object_id].detect(RoundView(self.mediator, object_id))
        busy: set[str] = set()
        for event in self.mediator.collect_events():
            a_id, b_id = event.pair
            if a_id in busy or b_id in busy:
                self.mediator.reject(event, self.round_index, "participant busy")
                continue
            if a_id not in self.state.objects or b_id not in self.state.objects:
                self.mediator.reject(event, self.round_index, "participant gone")
                continue
            if self.claim_and_interact(event):
                busy.update(event.pair)
        return busy

    def claim_and_interact(self, event: ProposedEvent) -> bool:
        """Prepare, reselect from live objects, interact, check the ledger."""
        a_id, b_id = event.pair
        self.policy.prepare(self.state, a_id, b_id)
        a = self.state.objects[a_id]
        b = self.state.objects[b_id]
        candidates = determine_potential_interactions(a, b)
        if not candidates:
            self.mediator.reject(event, self.round_index, "no live candidates")
            return False
        chosen = select_interaction(candidates, self.mediator.rng)
        table = self.policy.table_for(self.state, a_id, b_id, chosen)
        if table is None:
            self.mediator.reject(event, self.round_index, "vetoed")
            return False
        before = total_conserved([a, b])
        out = perform_interaction(self.state, a_id, b_id, chosen, table)
        survivors = [self.state.objects[i] for i in event.pair if i in self.state.objects]
        after = total_conserved(survivors + [out])
        entry = LedgerEntry(
            round_index=self.round_index,
            position=chosen.position,
            participants=event.pair,
            out_id=out.object_id,
            before=before,
            after=after,
        )
        if not entry.balanced:
            raise InvariantViolation(
                f"conservation ledger unbalanced at {event.pair}: "
                f"{entry.before} -> {entry.after}"
            )
        self.ledger_checks += 1
        self.interactions += 1
        self.mediator.granted += 1
        if self.keep_ledger:
            self.ledger.append(entry)
        self.retire_missing_engines()
        self.spawn_engine(out.object_id)
        self.policy.on_interaction(self.state, a_id, b_id, chosen, out)
        return True

    def propagate_phase(self, busy: set):
        for object_id in sorted(self.engines):
            if object_id in busy or object_id not in self.state.objects:
                continue
            if self.engines[object_id].proper_time < PROPAGATION_DELAY:
                continue
            moved = self.policy.propagate(self.state, object_id)
            if moved is not None:
                if moved.object_id != object_id:
                    raise ConfigError("propagation must keep the object id")
                self.state.objects[object_id] = moved
        problem = self.state.invariant_problem()
        if problem is not None:
            raise InvariantViolation(f"after propagation: {problem}")

    def publish_phase(self):
        for object_id in sorted(self.state.objects):
            obj = self.state.objects[object_id]
            for i, path in enumerate(obj.paths):
                w = path.weight
                if w == 0.0:
                    continue
                cells = set()
                for ps in path.pathstates:
                    cells.update(ps.spacepoints)
                for cell in sorted(cells):
                    self.mediator.publish(
                        Advertisement(object_id=object_id, path_index=i, cell=cell, weight=w)
                    )
        self.mediator.flip()

    def run(self, max_rounds: int = 64) -> int:
        """Rounds until the policy reports completion; returns the count."""
        while not self.policy.done(self.state):
            if self.round_index >= max_rounds:
                raise InvariantViolation(
                    f"run did not complete within {max_rounds} rounds"
                )
            self.run_round()
        return self.round_index


def run_refined(
    state: SystemState,
    policy: RoundPolicy,
    rng: RngState,
    scheduler: str = "round-robin",
    max_rounds: int = 64,
    keep_ledger: bool = False,
) -> RefinedRuntime:
    """Convenience wrapper: build the runtime, run to completion, return it."""
    runtime = RefinedRuntime(state, policy, rng, scheduler, keep_ledger=keep_ledger)
    runtime.run(max_rounds)
    return runtime


# -- entangled-pair world under the decentralized runtime ---------------------------


def _particle_types(obj: QuantumObject) -> set:
    return {p.type for p in obj.particles}


class BellRoundPolicy(RoundPolicy):
    """Source, drift, and two analyzer screens, one wing measured per round.

    The pump pair becomes the two-row entangled collection (emission
    direction drawn at the source event), the collection drifts one cell
    per column momentum, and each screen claim applies the analyzer
    reweighting to the live pair before candidates are recomputed, which
    is exactly the centralized measurement sequence.
    """

    def __init__(self, angle_a: float, angle_b: float, spindir_policy, rng: RngState):
        self.angles = {"screen-a": angle_a, "screen-b": angle_b}
        self.spindir_policy = spindir_policy
        self.rng = rng.substream("source")
        self.theta: float | None = None
        self.cases: dict[str, bool] = {}

    def _pair_and_screen(self, state: SystemState, a_id: str, b_id: str):
        a, b = state.objects[a_id], state.objects[b_id]
        if "half" in _particle_types(a) and b_id in self.angles:
            return a_id, b_id
        if "half" in _particle_types(b) and a_id in self.angles:
            return b_id, a_id
        return None, None

    def prepare(self, state: SystemState, a_id: str, b_id: str):
        pair_id, screen_id = self._pair_and_screen(state, a_id, b_id)
        if pair_id is None:
            return
        state.objects[pair_id] = _bell.apply_stern_gerlach(
            state.objects[pair_id], 0, self.angles[screen_id]
        )

    def table_for(self, state: SystemState, a_id: str, b_id: str, candidate):
        types_a = _particle_types(state.objects[a_id])
        types_b = _particle_types(state.objects[b_id])
        if types_a == {"pump"} and types_b == {"pump"}:
            self.theta = _bell.draw_emission_direction(self.spindir_policy, self.rng)
            return _bell.pair_table(self.theta)
        pair_id, screen_id = self._pair_and_screen(state, a_id, b_id)
        if pair_id is not None:
            row = candidate.path_index_1 if a_id == pair_id else candidate.path_index_2
            case1 = row == 0
            angle = self.angles[screen_id]
            axis = angle if case1 else angle + 90.0
            self.cases[screen_id] = case1
            return _bell.absorb_table(candidate.position, axis)
        return None

    def propagate(self, state: SystemState, object_id: str):
        obj = state.objects[object_id]
        if "half" not in _particle_types(obj):
            return None
        at_source = all(
            ps.spacepoints == frozenset({_bell.SOURCE_CELL})
            for path in obj.paths
            for ps in path.pathstates
        )
        return _bell.drift(obj) if at_source else None

    def done(self, state: SystemState) -> bool:
        return len(self.cases) == 2


def _bell_world(rng: RngState) -> SystemState:
    state = _bell.fresh_state(rng)
    state.add_object(_bell.make_pump("pump-1"))
    state.add_object(_bell.make_pump("pump-2"))
    state.add_object(_bell.make_screen("screen-a", _bell.WING_A_CELL))
    state.add_object(_bell.make_screen("screen-b", _bell.WING_B_CELL))
    return state


def run_bell_refined(cfg) -> "_bell.BellResult":
    """Joint statistics for one angle pair under the decentralized runtime."""
    root = RngState(cfg.seed)
    stats = _bell.JointStats()
    for trial in range(cfg.trials):
        rng = root.substream(trial)
        policy = BellRoundPolicy(cfg.angle_a, cfg.angle_b, cfg.spindir_policy, rng)
        runtime = RefinedRuntime(_bell_world(rng), policy, rng, cfg.scheduler)
        runtime.run(max_rounds=16)
        stats.record(policy.cases["screen-a"], policy.cases["screen-b"])
    return _bell.BellResult(config=cfg, stats=stats)


# -- two-slit world under the decentralized runtime ---------------------------------


class DoubleSlitRoundPolicy(RoundPolicy):
    """Slit-plane marking (optional), fan to the screen, absorption.

    The marker interaction, when present, happens in the first detection
    round, strictly before the particle is allowed to move; a marked
    collection then fans out from its single slit, an unmarked particle
    from both coherently.
    """

    def __init__(self, geometry: "_ds.SlitGeometry"):
        self.geometry = geometry
        self.slit_of = {geometry.slit_cells[s]: s for s in (0, 1)}
        self.hit_cell: int | None = None

    def _photon_bearer(self, state: SystemState, a_id: str, b_id: str):
        if "photon" in _particle_types(state.objects[a_id]):
            return a_id, b_id
        if "photon" in _particle_types(state.objects[b_id]):
            return b_id, a_id
        return None, None

    def table_for(self, state: SystemState, a_id: str, b_id: str, candidate):
        bearer_id, other_id = self._photon_bearer(state, a_id, b_id)
        if bearer_id is None:
            return None
        other_types = _particle_types(state.objects[other_id])
        if other_types == {"marker-atom"}:
            return _ds.continue_table(self.geometry, self.slit_of[candidate.position[0]])
        if other_types == {"screen-atom"}:
            self.hit_cell = candidate.position[0]
            return _ds.absorb_table(candidate.position)
        return None

    def propagate(self, state: SystemState, object_id: str):
        obj = state.objects[object_id]
        if "photon" not in _particle_types(obj):
            return None
        col = _ds.photon_column(obj)
        plane = next(iter(obj.paths[0].pathstates[col].spacepoints))[1]
        if plane != _ds.SLIT_PLANE:
            return None
        return _ds.propagate_to_screen(obj, self.geometry)

    def done(self, state: SystemState) -> bool:
        return self.hit_cell is not None


def run_doubleslit_refined(
    marker: bool,
    trials: int,
    geometry: "_ds.SlitGeometry",
    seed: int = 0,
    scheduler: str = "round-robin",
) -> "_ds.ScreenHistogram":
    """Screen histogram under the decentralized runtime."""
    root = RngState(seed)
    counts = np.zeros(geometry.n_cells, dtype=np.int64)
    for trial in range(trials):
        rng = root.substream(trial)
        state = SystemState(space=geometry.space(), rng=rng)
        state.add_object(_ds.photon_at_slits(geometry))
        if marker:
            state.add_object(_ds.marker_object(geometry))
        state.add_object(_ds.screen_object(geometry))
        policy = DoubleSlitRoundPolicy(geometry)
        runtime = RefinedRuntime(state, policy, rng, scheduler)
        runtime.run(max_rounds=16)
        counts[policy.hit_cell] += 1
    return _ds.ScreenHistogram(
        geometry=geometry,
        marker=marker,
        trials=trials,
        seed=seed,
        counts=counts,
        runtime="refined",
    )
