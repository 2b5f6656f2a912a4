"""Two-slit interference and its collapse under a which-path marker.

A photon is prepared in a two-path superposition at the slit plane and
absorbed by a screen one plane over.  Without a marker the two fans add
coherently per screen cell and a fringe pattern appears; with a marker
atom entangled at the slits the paths become distinguishable, the cross
terms drop, and the pattern washes out to the incoherent sum.
"""

import numpy as np

from qcausal.experiments.doubleslit import (
    DEFAULT_GEOMETRY,
    coherent_pdf,
    incoherent_pdf,
    run_double_slit,
)

TRIALS = 20_000
GEO = DEFAULT_GEOMETRY


def sparkline(values, width=64):
    """Coarse terminal bar chart: one character per bucket."""
    marks = " .:-=+*#%@"
    buckets = np.array_split(np.asarray(values, dtype=float), width)
    levels = np.array([b.mean() for b in buckets])
    top = levels.max()
    if top == 0:
        return " " * width
    return "".join(marks[int(v / top * (len(marks) - 1))] for v in levels)


print(f"geometry: {GEO.n_cells} cells, slits at {GEO.slit_cells}, "
      f"fringe period {GEO.fringe_period:.1f} cells")

print("\nanalytic screen distributions:")
print(f"  coherent   |{sparkline(coherent_pdf(GEO))}|")
print(f"  incoherent |{sparkline(incoherent_pdf(GEO))}|")

for marker in (False, True):
    hist = run_double_slit(marker=marker, trials=TRIALS, geometry=GEO, seed=0)
    tag = "marker on " if marker else "marker off"
    print(f"\n{tag}: {TRIALS} absorptions")
    print(f"  histogram  |{sparkline(hist.frequencies())}|")
    print(f"  visibility = {hist.visibility():.4f}"
          f"  (smoothed envelope max-min over max+min)")
    print(f"  TV distance to its analytic oracle = {hist.tv_distance(hist.oracle_pdf()):.4f}")
    print(f"  largest per-cell deviation = {hist.max_cell_z(hist.oracle_pdf()):.2f} sigma")

print("\nthe marked run is flat: which-path information, not any mechanical")
print("disturbance, is what removes the fringes here.")
