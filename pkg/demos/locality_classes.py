"""Static locality analysis of law footprints.

A model declaration lists, per law, which cells and object attributes it
reads and writes.  The classifier folds each footprint into one of three
classes, strictly ordered:

  SpacePointLocal: relative offsets within one cell of a single anchor;
  ObjectLocal:     reaches the global attributes of one object;
  NonLocal:        spans two anchors, two objects' interiors, the whole
                   space, or an object's entire path table.

Four bundled models span the range: the wave automaton is the clean
SpacePointLocal case, the coupled-pendulum closed form and the
centralized quantum runtime both classify NonLocal (for different
reasons), and the decentralized runtime brings the quantum case down to
ObjectLocal, which is the point of building it.
"""

from pathlib import Path

import qcausal
from qcausal.locality import classify_model, load_model_spec, parse_model_spec

SPECS = Path(qcausal.__file__).parent / "specs"

for name in ("wave_ca.model", "pendulum.model", "centralized_qt.model", "refined_qt.model"):
    report = classify_model(load_model_spec(SPECS / name))
    print(f"{name}:")
    print("  " + report.to_text().replace("\n", "\n  ").rstrip())
    print()

# the DSL itself, inline: a law reading a neighbor cell plus another
# object's global is non-local even though each reference looks tame
text = """
model toy
object probe { globals: level; }
object gauge { globals: level; }
law mix {
  reads: cell(-1), global(probe.level), global(gauge.level);
  writes: cell(0);
}
"""
report = classify_model(parse_model_spec(text))
print("inline example:")
print("  " + report.to_text().replace("\n", "\n  ").rstrip())
