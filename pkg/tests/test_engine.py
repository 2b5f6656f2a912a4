"""Engine core: deterministic RNG, random_draw, guarded-law stepping."""

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcausal.engine import (
    EngineConfig,
    Law,
    RngState,
    RunTrace,
    random_draw,
    resolve_termination,
    run,
    step,
)
from qcausal.errors import ConfigError, InvariantViolation
from qcausal.state import (
    ObjectKind,
    ParticleInfo,
    Path,
    PathState,
    QuantumObject,
    Space,
    SystemState,
)


def test_rng_same_seed_same_sequence():
    a = RngState(42)
    b = RngState(42)
    assert [a.random() for _ in range(20)] == [b.random() for _ in range(20)]


def test_rng_different_seeds_diverge():
    a = RngState(1)
    b = RngState(2)
    assert [a.random() for _ in range(5)] != [b.random() for _ in range(5)]


def test_rng_draw_counter():
    rng = RngState(0)
    assert rng.draws == 0
    for _ in range(7):
        rng.random()
    assert rng.draws == 7


def test_substream_derivation_is_pure():
    # Deriving a child before or after parent draws must give the same stream.
    root = RngState(9)
    early = root.substream("obj", 3)
    for _ in range(100):
        root.random()
    late = root.substream("obj", 3)
    assert [early.random() for _ in range(10)] == [late.random() for _ in range(10)]


def test_substreams_are_independent():
    root = RngState(9)
    a = root.substream("a")
    b = root.substream("b")
    seq_a = [a.random() for _ in range(8)]
    seq_b = [b.random() for _ in range(8)]
    assert seq_a != seq_b
    # Child draws do not perturb the parent.
    fresh = RngState(9)
    assert [root.random() for _ in range(8)] == [fresh.random() for _ in range(8)]


def test_substream_key_nesting():
    root = RngState(5)
    assert root.substream("x", 1).key == ("x", 1)
    assert root.substream("x").substream(1).key == ("x", 1)
    one = root.substream("x", 1)
    two = root.substream("x").substream(1)
    assert [one.random() for _ in range(4)] == [two.random() for _ in range(4)]


def test_rng_uniformity_smoke():
    rng = RngState(123)
    xs = [rng.random() for _ in range(20000)]
    mean = sum(xs) / len(xs)
    assert abs(mean - 0.5) < 0.01  # se ~ 0.002
    assert all(0.0 <= x < 1.0 for x in xs)


def test_random_draw_discrete_certain():
    rng = RngState(0)
    for _ in range(50):
        assert random_draw(["only"], [1.0], rng) == "only"
    assert random_draw(["a", "b"], [0.0, 1.0], rng) == "b"
    assert random_draw(["a", "b"], [1.0, 0.0], rng) == "a"


def test_random_draw_discrete_frequencies():
    rng = RngState(7)
    n = 40000
    hits = sum(random_draw([1, 0], [0.25, 0.75], rng) for _ in range(n))
    assert abs(hits / n - 0.25) < 0.01  # se ~ 0.002


def test_random_draw_uniform_interval():
    rng = RngState(3)
    xs = [random_draw((2.0, 5.0), "uniform", rng) for _ in range(1000)]
    assert all(2.0 <= x < 5.0 for x in xs)
    assert abs(sum(xs) / len(xs) - 3.5) < 0.1


def test_random_draw_is_deterministic():
    xs = [random_draw(["p", "m"], [0.5, 0.5], RngState(11, ("t", i))) for i in range(64)]
    ys = [random_draw(["p", "m"], [0.5, 0.5], RngState(11, ("t", i))) for i in range(64)]
    assert xs == ys
    assert set(xs) == {"p", "m"}


def test_random_draw_validation():
    rng = RngState(0)
    with pytest.raises(ConfigError):
        random_draw([], [], rng)
    with pytest.raises(ConfigError):
        random_draw([1, 2], [0.5], rng)
    with pytest.raises(ConfigError):
        random_draw([1, 2], [0.7, 0.7], rng)  # sums to 1.4
    with pytest.raises(ConfigError):
        random_draw([1, 2], [-0.1, 1.1], rng)
    with pytest.raises(ConfigError):
        random_draw((0.0, 1.0), "gaussian", rng)
    with pytest.raises(ConfigError):
        random_draw((1.0, 0.0), "uniform", rng)


def test_random_draw_logs_when_recording():
    rng = RngState(0)
    rng.log = []
    random_draw(["a"], [1.0], rng)
    random_draw((0.0, 1.0), "uniform", rng)
    assert rng.log[0] == "a"
    assert 0.0 <= rng.log[1] < 1.0


@given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=6))
@settings(max_examples=100)
def test_random_draw_respects_support(weights):
    # Whatever the weights, the drawn value is always one of the values.
    total = sum(weights)
    if total == 0.0:
        weights = [1.0] * len(weights)
        total = float(len(weights))
    probs = [w / total for w in weights]
    values = list(range(len(probs)))
    rng = RngState(1)
    for _ in range(10):
        assert random_draw(values, probs, rng) in values


# --- guarded-law stepping -------------------------------------------------

def _point_object(object_id, cell=(0,)):
    ps = PathState(frozenset({cell}), (0.0,), (0.0,))
    return QuantumObject(
        object_id=object_id,
        kind=ObjectKind.PARTICLE,
        particles=(ParticleInfo("marble", 1.0),),
        paths=(Path(1.0 + 0j, (ps,)),),
    )


def _fresh_state(n_objects=3):
    state = SystemState(space=Space(1, (8,), 1.0))
    for i in range(n_objects):
        state.add_object(_point_object(f"m-{i}", (i,)))
    return state


def _decay_law():
    def cond(state):
        return bool(state.objects)

    def trans(state):
        first = sorted(state.objects)[0]
        del state.objects[first]
        return state

    return Law("decay", cond, trans)


def test_step_applies_laws_in_order():
    order = []
    mk = lambda name: Law(
        name,
        lambda s: True,
        lambda s, name=name: (order.append(name), s)[1],
    )
    state = _fresh_state(0)
    state, fired = step(state, 1.0, [mk("first"), mk("second")])
    assert order == ["first", "second"]
    assert fired == ["first", "second"]
    assert state.step_count == 1 and state.t == 1.0


def test_step_skips_false_guards():
    state = _fresh_state(1)
    law = Law("never", lambda s: False, lambda s: pytest.fail("guard was false"))
    state, fired = step(state, 0.5, [law])
    assert fired == []
    assert state.t == 0.5


def test_step_detects_broken_invariant():
    state = _fresh_state(1)

    def escape(s):
        s.objects["m-0"] = _point_object("m-0", (99,))  # outside extent 8
        return s

    with pytest.raises(InvariantViolation, match="break|outside|invariant"):
        step(state, 1.0, [Law("escape", lambda s: True, escape)])


def test_run_until_no_objects():
    state = _fresh_state(3)
    cfg = EngineConfig(delta_t=1.0, max_steps=10, termination="no_objects")
    state, trace = run(state, cfg, [_decay_law()])
    assert state.objects == {}
    assert state.step_count == 3
    assert [rec["fired"] for rec in trace.steps] == [["decay"]] * 3


def test_run_max_steps_cap():
    state = _fresh_state(2)
    cfg = EngineConfig(delta_t=0.25, max_steps=5)
    state, trace = run(state, cfg, [Law("idle", lambda s: False, lambda s: s)])
    assert state.step_count == 5
    assert state.t == 5 * 0.25
    assert all(rec["fired"] == [] for rec in trace.steps)


def test_run_termination_checked_before_first_step():
    state = _fresh_state(0)
    cfg = EngineConfig(delta_t=1.0, max_steps=10, termination="no_objects")
    state, trace = run(state, cfg, [_decay_law()])
    assert state.step_count == 0
    assert trace.steps == []


def test_run_rejects_duplicate_law_ids():
    state = _fresh_state(1)
    cfg = EngineConfig(delta_t=1.0, max_steps=1)
    laws = [Law("x", lambda s: False, lambda s: s), Law("x", lambda s: False, lambda s: s)]
    with pytest.raises(ConfigError):
        run(state, cfg, laws)


def test_clock_is_exact_multiple_of_delta_t():
    # t is recomputed as step_count * delta_t, never accumulated.
    state = _fresh_state(0)
    cfg = EngineConfig(delta_t=0.1, max_steps=1000)
    state, _ = run(state, cfg, [])
    assert state.t == 1000 * 0.1
    assert state.t != math.fsum([0.1] * 999) + 0.1 or state.t == 1000 * 0.1


def test_engine_config_validation():
    with pytest.raises(ConfigError):
        EngineConfig(delta_t=0.0, max_steps=1)
    with pytest.raises(ConfigError):
        EngineConfig(delta_t=1.0, max_steps=-1)
    with pytest.raises(ConfigError):
        resolve_termination("heat_death")
    assert resolve_termination(None)(None) is False
    pred = lambda s: True
    assert resolve_termination(pred) is pred


def test_trace_records_draws(tmp_path):
    state = _fresh_state(1)

    def flip(s):
        random_draw(["h", "t"], [0.5, 0.5], s.rng)
        return s

    cfg = EngineConfig(delta_t=1.0, max_steps=4, seed=0)
    state, trace = run(state, cfg, [Law("flip", lambda s: True, flip)])
    assert len(trace.steps) == 4
    assert all(rec["draws"][0] in ("h", "t") for rec in trace.steps)

    out = tmp_path / "trace.jsonl"
    trace.write_jsonl(out)
    lines = [json.loads(line) for line in out.read_text().splitlines()]
    assert lines[0]["laws"] == ["flip"]
    assert len(lines) == 5  # header + 4 steps
    assert lines[1]["t"] == 1.0


def test_trace_runs_reproduce_bit_for_bit(tmp_path):
    def make():
        state = _fresh_state(2)
        state.rng = RngState(77)

        def jiggle(s):
            random_draw((0.0, 1.0), "uniform", s.rng)
            return s

        cfg = EngineConfig(delta_t=1.0, max_steps=6, seed=77)
        _, trace = run(state, cfg, [Law("jiggle", lambda s: True, jiggle)])
        return trace.to_records()

    assert make() == make()
