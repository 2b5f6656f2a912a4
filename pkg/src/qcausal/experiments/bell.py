"""Entangled spin pairs, measurement correlations, and the Bell bound.

The spin model is planar: a spin direction is an angle in degrees, and an
analyzer at angle g responds to a particle with spin s with

    P(case1) = cos^2(s - g)

so 0, 30 and 60 degrees of misalignment give probabilities 1, 3/4 and 1/4.
Under this response law two directions 90 degrees apart are perfectly
distinguishable (orthogonal), and measurement outcomes map to ports:
case1 leaves the spin at the analyzer angle g, case2 at g + 90.

A source emits a two-particle collection whose path table has two rows,
both particles sharing the emission direction theta in row 0 and its
orthogonal partner theta + 90 in row 1, each row at amplitude 1/sqrt(2).
An analyzer reweights the two rows by the projection factors
(cos(theta - g), sin(theta - g)); the screen interaction then selects a
row with probability equal to its squared amplitude and collapses the
shared table, which is what forces the partner particle onto the matching
alternative with its spin set to the measured axis.  Measuring both wings
at the same angle therefore agrees exactly, trial by trial, while the
correlation across angles is E(a, b) = 2 cos^2(a - b) - 1 = cos 2(a - b),
which violates the classical three-angle bound checked by lhv_oracle.

Angles at exact multiples of 90 degrees use exact projections (0.0, 1.0),
so equal-angle agreement is an exact model property, not a float accident.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

from ..engine import RngState, random_draw
from ..errors import ConfigError
from ..interaction import (
    OutcomeRow,
    OutcomeTable,
    determine_potential_interactions,
    perform_interaction,
    select_interaction,
)
from ..state import (
    ObjectKind,
    ParticleInfo,
    Path,
    PathState,
    QuantumObject,
    Space,
    SystemState,
)

SQRT_HALF = 1.0 / math.sqrt(2.0)


def cos_deg(deg: float) -> float:
    """cos of an angle in degrees; exact 0/±1 at multiples of 90."""
    a = deg % 360.0
    if a == 0.0:
        return 1.0
    if a == 90.0 or a == 270.0:
        return 0.0
    if a == 180.0:
        return -1.0
    return math.cos(math.radians(a))


def sin_deg(deg: float) -> float:
    """sin of an angle in degrees; exact 0/±1 at multiples of 90."""
    a = deg % 360.0
    if a == 0.0 or a == 180.0:
        return 0.0
    if a == 90.0:
        return 1.0
    if a == 270.0:
        return -1.0
    return math.sin(math.radians(a))


def spin_probability(delta_deg: float) -> float:
    """P(case1) for misalignment delta between spin and analyzer, cos^2(delta)."""
    c = cos_deg(delta_deg)
    return c * c


# -- world construction --------------------------------------------------------

SOURCE_CELL = (1,)
WING_A_CELL = (0,)
WING_B_CELL = (2,)


def fresh_state(seed_rng: RngState) -> SystemState:
    """Minimal 3-cell world: source in the middle, one wing per side."""
    return SystemState(space=Space(dims=1, extent=(3,), delta_x=1.0), rng=seed_rng)


@lru_cache(maxsize=None)
def make_pump(object_id: str, cell=SOURCE_CELL, mass: float = 0.5) -> QuantumObject:
    return QuantumObject(
        object_id=object_id,
        kind=ObjectKind.PARTICLE,
        particles=(ParticleInfo("pump", mass),),
        paths=(
            Path(
                amplitude=1.0,
                pathstates=(
                    PathState(spacepoints=frozenset({cell}), momentum=(0.0,), angularmomentum=(0.0,)),
                ),
            ),
        ),
        conserved={"energy": mass, "momentum": (0.0,), "angularmomentum": (0.0,)},
    )


@lru_cache(maxsize=None)
def make_screen(object_id: str, cell, mass: float = 1.0) -> QuantumObject:
    return QuantumObject(
        object_id=object_id,
        kind=ObjectKind.PARTICLE,
        particles=(ParticleInfo("screen-atom", mass),),
        paths=(
            Path(
                amplitude=1.0,
                pathstates=(
                    PathState(spacepoints=frozenset({cell}), momentum=(0.0,), angularmomentum=(0.0,)),
                ),
            ),
        ),
        conserved={"energy": mass, "momentum": (0.0,), "angularmomentum": (0.0,)},
    )


def pair_table(theta: float, cell=SOURCE_CELL) -> OutcomeTable:
    """Source outcome table: two rows, both particles spin theta / theta+90.

    Row amplitudes are 1/sqrt(2) each; the particles leave in opposite
    directions (momentum -1 and +1 cells per tick).
    """

    # column masses must sum to the incoming conserved energy (two pumps of
    # 0.5), or consuming the collection column by column strands the excess
    def row(spin: float) -> OutcomeRow:
        return OutcomeRow(
            particles=(ParticleInfo("half", 0.5), ParticleInfo("half", 0.5)),
            pathstates=(
                PathState(frozenset({cell}), (-1.0,), (0.0,), spindir=spin),
                PathState(frozenset({cell}), (1.0,), (0.0,), spindir=spin),
            ),
            amplitude=SQRT_HALF,
        )

    return OutcomeTable(name="pair-source", rows=(row(theta), row(theta + 90.0)))


@lru_cache(maxsize=None)
def absorb_table(cell, axis: float) -> OutcomeTable:
    """Screen absorption: one detection row at the hit cell."""
    return OutcomeTable(
        name="screen-capture",
        rows=(
            OutcomeRow(
                particles=(ParticleInfo("detection", 0.0),),
                pathstates=(PathState(frozenset({cell}), (0.0,), (0.0,), spindir=axis),),
                amplitude=1.0,
            ),
        ),
    )


def emit_entangled_pair(state: SystemState, theta: float, rng: RngState) -> str:
    """Source step: two pump particles interact into the two-row pair."""
    state.add_object(make_pump("pump-1"))
    state.add_object(make_pump("pump-2"))
    cands = determine_potential_interactions(state.objects["pump-1"], state.objects["pump-2"])
    chosen = select_interaction(cands, rng)
    pair = perform_interaction(state, "pump-1", "pump-2", chosen, pair_table(theta))
    return pair.object_id


def drift(obj: QuantumObject) -> QuantumObject:
    """Translate every pathstate by its own momentum (whole cells per tick)."""
    new_paths = []
    for path in obj.paths:
        states = tuple(
            replace(
                ps,
                spacepoints=frozenset(
                    tuple(int(c + round(m)) for c, m in zip(pt, ps.momentum)) for pt in ps.spacepoints
                ),
            )
            for ps in path.pathstates
        )
        new_paths.append(replace(path, pathstates=states))
    return replace(obj, paths=tuple(new_paths))


def apply_stern_gerlach(obj: QuantumObject, particle_index: int, angle: float) -> QuantumObject:
    """Analyzer at `angle`: rewrite the table into the two outcome ports.

    Row 0 becomes the case1 port (spin angle, weight cos^2(s - angle)) and
    row 1 the case2 port (spin angle + 90, weight sin^2).  A one-row object
    is split into the two ports; a two-row table (an entangled pair, row 1
    being the orthogonal alternative) is reweighted in place.  The spin
    adjustment applies to every particle in the row, which is how the
    measured axis propagates to an entangled partner on collapse.
    """
    s = obj.paths[0].pathstates[particle_index].spindir
    c = cos_deg(s - angle)
    sn = sin_deg(s - angle)
    up_axis = angle % 360.0
    down_axis = (angle + 90.0) % 360.0

    def retagged(path: Path, axis: float, amplitude: complex) -> Path:
        states = tuple(replace(ps, spindir=axis) for ps in path.pathstates)
        return Path(amplitude=amplitude, pathstates=states)

    if len(obj.paths) == 1:
        base = obj.paths[0]
        ports = (
            retagged(base, up_axis, base.amplitude * c),
            retagged(base, down_axis, base.amplitude * sn),
        )
    elif len(obj.paths) == 2:
        phase0 = _unit_phase(obj.paths[0].amplitude)
        phase1 = _unit_phase(obj.paths[1].amplitude)
        ports = (
            retagged(obj.paths[0], up_axis, phase0 * c),
            retagged(obj.paths[1], down_axis, phase1 * sn),
        )
    else:
        raise ConfigError(
            f"object {obj.object_id!r}: analyzer defined for 1- or 2-row tables, not {len(obj.paths)}"
        )
    return replace(obj, paths=ports)


def _unit_phase(amplitude: complex) -> complex:
    mod = abs(amplitude)
    return amplitude / mod if mod > 0.0 else 1.0


def measure_wing(
    state: SystemState,
    obj_id: str,
    particle_index: int,
    screen_cell,
    angle: float,
    rng: RngState,
    wing_tag: str,
) -> bool:
    """Analyzer plus screen at one wing; returns True for case1.

    The analyzer ports reweight the table, the screen interaction selects a
    port by squared amplitude and runs the full pipeline, collapsing the
    shared table (and so the partner particle) to the selected row.
    """
    obj = apply_stern_gerlach(state.get_object(obj_id), particle_index, angle)
    state.objects[obj_id] = obj
    screen_id = f"screen-{wing_tag}"
    state.add_object(make_screen(screen_id, screen_cell))
    cands = determine_potential_interactions(obj, state.objects[screen_id])
    chosen = select_interaction(cands, rng)
    case1 = chosen.path_index_1 == 0
    axis = angle if case1 else angle + 90.0
    perform_interaction(state, obj_id, screen_id, chosen, absorb_table(screen_cell, axis))
    return case1


# -- statistics ----------------------------------------------------------------


@dataclass
class JointStats:
    """Tallies over the four joint outcomes (case1 = +, case2 = -)."""

    n_pp: int = 0
    n_pm: int = 0
    n_mp: int = 0
    n_mm: int = 0

    def record(self, case_a: bool, case_b: bool):
        if case_a:
            if case_b:
                self.n_pp += 1
            else:
                self.n_pm += 1
        elif case_b:
            self.n_mp += 1
        else:
            self.n_mm += 1

    @property
    def n(self) -> int:
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm

    @property
    def p_same(self) -> float:
        return (self.n_pp + self.n_mm) / self.n

    @property
    def correlation(self) -> float:
        """E = P(same) - P(different)."""
        return (self.n_pp + self.n_mm - self.n_pm - self.n_mp) / self.n

    @property
    def correlation_se(self) -> float:
        e = self.correlation
        return math.sqrt(max(0.0, 1.0 - e * e) / self.n)

    def marginal_a(self) -> float:
        return (self.n_pp + self.n_pm) / self.n

    def marginal_b(self) -> float:
        return (self.n_pp + self.n_mp) / self.n

    def frequencies(self) -> dict:
        n = self.n
        return {"pp": self.n_pp / n, "pm": self.n_pm / n, "mp": self.n_mp / n, "mm": self.n_mm / n}

    def counts(self) -> dict:
        return {"pp": self.n_pp, "pm": self.n_pm, "mp": self.n_mp, "mm": self.n_mm}

    def tv_distance(self, other: "JointStats") -> float:
        f, g = self.frequencies(), other.frequencies()
        return 0.5 * sum(abs(f[k] - g[k]) for k in f)


@dataclass
class BellConfig:
    angle_a: float
    angle_b: float
    trials: int
    seed: int = 0
    spindir_policy: object = "uniform"  # "uniform" or a fixed angle in degrees
    runtime: str = "centralized"  # or "refined"
    scheduler: str = "round-robin"  # refined runtime only

    def __post_init__(self):
        if self.trials <= 0:
            raise ConfigError(f"bell.trials must be > 0, got {self.trials}")
        if self.runtime not in ("centralized", "refined"):
            raise ConfigError(f"bell.runtime must be centralized or refined, got {self.runtime!r}")
        if not (self.spindir_policy == "uniform" or isinstance(self.spindir_policy, (int, float))):
            raise ConfigError(f"bell.spindir_policy must be 'uniform' or an angle, got {self.spindir_policy!r}")


@dataclass
class BellResult:
    config: BellConfig
    stats: JointStats

    def to_json_dict(self) -> dict:
        cfg = self.config
        return {
            "schema_version": 1,
            "experiment": "bell",
            "params": {
                "angle_a": cfg.angle_a,
                "angle_b": cfg.angle_b,
                "trials": cfg.trials,
                "seed": cfg.seed,
                "spindir_policy": cfg.spindir_policy,
                "runtime": cfg.runtime,
                "scheduler": cfg.scheduler,
            },
            "counts": self.stats.counts(),
            "frequencies": self.stats.frequencies(),
            "marginals": {"a": self.stats.marginal_a(), "b": self.stats.marginal_b()},
            "correlation": self.stats.correlation,
            "correlation_se": self.stats.correlation_se,
        }


def draw_emission_direction(policy, rng: RngState) -> float:
    if policy == "uniform":
        return random_draw((0.0, 360.0), "uniform", rng)
    return float(policy)


def bell_trial(angle_a: float, angle_b: float, theta: float, rng: RngState) -> tuple[bool, bool]:
    """One full pipeline trial: source, propagation, two wing measurements."""
    state = fresh_state(rng)
    pair_id = emit_entangled_pair(state, theta, rng)
    state.objects[pair_id] = drift(state.objects[pair_id])
    case_a = measure_wing(state, pair_id, 0, WING_A_CELL, angle_a, rng, "a")
    # the pipeline dropped the measured column; the partner keeps the id
    case_b = measure_wing(state, pair_id, 0, WING_B_CELL, angle_b, rng, "b")
    return case_a, case_b


def run_bell_experiment(cfg: BellConfig) -> BellResult:
    """Monte Carlo joint statistics for one angle pair.

    Trials are independent: trial i draws only from the substream
    (seed, i), so sequential and parallel execution produce identical
    tallies.
    """
    if cfg.runtime == "refined":
        from ..runtime import run_bell_refined

        return run_bell_refined(cfg)
    root = RngState(cfg.seed)
    stats = JointStats()
    for trial in range(cfg.trials):
        rng = root.substream(trial)
        theta = draw_emission_direction(cfg.spindir_policy, rng)
        case_a, case_b = bell_trial(cfg.angle_a, cfg.angle_b, theta, rng)
        stats.record(case_a, case_b)
    return BellResult(config=cfg, stats=stats)


# -- light drivers -------------------------------------------------------------


def run_spin_trials(delta_deg: float, trials: int, seed: int = 0) -> tuple[int, int]:
    """Single-particle analyzer statistics at fixed misalignment delta.

    Bernoulli draws at p = spin_probability(delta) through random_draw from
    one stream keyed by (seed, delta).  Unit tests pin this to the full
    analyzer+screen pipeline distribution.
    """
    if trials <= 0:
        raise ConfigError(f"trials must be > 0, got {trials}")
    p = spin_probability(delta_deg)
    rng = RngState(seed).substream("spin", delta_deg)
    n_case1 = 0
    for _ in range(trials):
        if random_draw((True, False), (p, 1.0 - p), rng):
            n_case1 += 1
    return n_case1, trials - n_case1


@dataclass
class UnentangledConfig:
    spindir_a: float
    spindir_b: float
    angle_a: float = 0.0
    angle_b: float = 0.0
    trials: int = 10000
    seed: int = 0


def run_unentangled_pair(cfg: UnentangledConfig) -> JointStats:
    """Two independent particles: joint frequencies obey the product law."""
    pa = spin_probability(cfg.spindir_a - cfg.angle_a)
    pb = spin_probability(cfg.spindir_b - cfg.angle_b)
    rng = RngState(cfg.seed).substream("unentangled")
    stats = JointStats()
    for _ in range(cfg.trials):
        case_a = random_draw((True, False), (pa, 1.0 - pa), rng)
        case_b = random_draw((True, False), (pb, 1.0 - pb), rng)
        stats.record(case_a, case_b)
    return stats


# -- Bell functional and the classical bound ------------------------------------

FORMS = ("identical", "anticorrelated")


def model_correlation(angle_x: float, angle_y: float) -> float:
    """Closed-form E(x, y) implied by the response law: 2 cos^2(x-y) - 1."""
    return 2.0 * spin_probability(angle_x - angle_y) - 1.0


def evaluate_bell(p_ab: float, p_ac: float, p_bc: float, form: str = "identical") -> float:
    """Three-angle Bell margin; negative means the bound is violated.

    identical form:      margin = (1 - P(b,c)) - |P(a,b) - P(a,c)|
    anticorrelated form: margin = (1 + P(b,c)) - |P(a,b) - P(a,c)|
    """
    if form not in FORMS:
        raise ConfigError(f"form must be one of {FORMS}, got {form!r}")
    slack = (1.0 - p_bc) if form == "identical" else (1.0 + p_bc)
    return slack - abs(p_ab - p_ac)


@dataclass
class LhvStrategy:
    wing_a: tuple[int, int, int]  # outcome (+1/-1) per setting on wing A
    wing_b: tuple[int, int, int]
    correlations: tuple[float, float, float]  # E(a,b), E(a,c), E(b,c)
    margin: float
    form_consistent: bool


@dataclass
class LhvReport:
    """Exhaustive enumeration of deterministic local strategies.

    All 2^6 = 64 assignments of +/-1 outcomes to the three settings on each
    wing are listed.  The bound is a theorem only for strategies that
    reproduce the experiment's perfect correlation form (wing B identical
    to wing A, or its exact negation); those 8 strategies all have
    margin >= 0, and mixtures cannot do better (the functional is convex in
    the strategy distribution).  Unconstrained strategies can reach
    functional value 2, which the report keeps visible rather than hiding.
    """

    angles: tuple[float, float, float]
    form: str
    strategies: list[LhvStrategy] = field(default_factory=list)

    @property
    def n_strategies(self) -> int:
        return len(self.strategies)

    @property
    def consistent(self) -> list[LhvStrategy]:
        return [s for s in self.strategies if s.form_consistent]

    @property
    def classical_min_margin(self) -> float:
        return min(s.margin for s in self.consistent)

    @property
    def unconstrained_min_margin(self) -> float:
        return min(s.margin for s in self.strategies)

    def model_margins(self) -> dict:
        a, b, c = self.angles
        e_ab = model_correlation(a, b)
        e_ac = model_correlation(a, c)
        e_bc = model_correlation(b, c)
        margin = evaluate_bell(e_ab, e_ac, e_bc, self.form)
        return {
            "E_ab": e_ab,
            "E_ac": e_ac,
            "E_bc": e_bc,
            "margin": margin,
            "exceeds_bound_by": -margin if margin < 0 else 0.0,
        }

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "experiment": "lhv",
            "angles": list(self.angles),
            "form": self.form,
            "n_strategies": self.n_strategies,
            "n_form_consistent": len(self.consistent),
            "classical_min_margin": self.classical_min_margin,
            "unconstrained_min_margin": self.unconstrained_min_margin,
            "model": self.model_margins(),
        }


def lhv_oracle(angles: tuple[float, float, float], form: str = "identical") -> LhvReport:
    """Enumerate every deterministic local strategy and its Bell margin."""
    if form not in FORMS:
        raise ConfigError(f"form must be one of {FORMS}, got {form!r}")
    report = LhvReport(angles=tuple(float(a) for a in angles), form=form)
    signs = (-1, 1)
    for sa in ((x, y, z) for x in signs for y in signs for z in signs):
        for sb in ((x, y, z) for x in signs for y in signs for z in signs):
            e_ab = float(sa[0] * sb[1])
            e_ac = float(sa[0] * sb[2])
            e_bc = float(sa[1] * sb[2])
            margin = evaluate_bell(e_ab, e_ac, e_bc, form)
            consistent = sb == sa if form == "identical" else sb == tuple(-x for x in sa)
            report.strategies.append(
                LhvStrategy(
                    wing_a=sa,
                    wing_b=sb,
                    correlations=(e_ab, e_ac, e_bc),
                    margin=margin,
                    form_consistent=consistent,
                )
            )
    return report


@dataclass
class BellScanResult:
    angles: tuple[float, float, float]
    form: str
    results: dict  # pair name -> BellResult
    lhv: LhvReport

    def correlations(self) -> dict:
        return {name: res.stats.correlation for name, res in self.results.items()}

    def margin(self) -> float:
        e = self.correlations()
        return evaluate_bell(e["ab"], e["ac"], e["bc"], self.form)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "experiment": "bell-scan",
            "angles": list(self.angles),
            "form": self.form,
            "pairs": {name: res.to_json_dict() for name, res in self.results.items()},
            "correlations": self.correlations(),
            "margin": self.margin(),
            "classical_min_margin": self.lhv.classical_min_margin,
            "model": self.lhv.model_margins(),
        }


def bell_scan(
    angles: tuple[float, float, float],
    trials: int,
    seed: int = 0,
    runtime: str = "centralized",
    form: str = "identical",
    scheduler: str = "round-robin",
) -> BellScanResult:
    """Estimate E for the three angle pairs and evaluate the Bell margin."""
    a, b, c = angles
    results = {}
    for offset, (name, (x, y)) in enumerate(
        (("ab", (a, b)), ("ac", (a, c)), ("bc", (b, c)))
    ):
        cfg = BellConfig(
            angle_a=x,
            angle_b=y,
            trials=trials,
            seed=seed + offset,
            runtime=runtime,
            scheduler=scheduler,
        )
        results[name] = run_bell_experiment(cfg)
    return BellScanResult(
        angles=tuple(float(v) for v in angles),
        form=form,
        results=results,
        lhv=lhv_oracle(angles, form),
    )
