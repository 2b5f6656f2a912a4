"""Monte Carlo experiments built on the object pipeline.

bell: entangled-pair correlations, Bell functional, LHV bound oracle.
doubleslit: two-branch interference with an optional which-path marker.
pendulum: coupled pendulums, closed-form laws vs local integration.
"""

from . import bell, doubleslit, pendulum  # noqa: F401
