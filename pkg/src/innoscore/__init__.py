"""Innovation scoring for object archetypes.

Quantifies technological novelty and demand of an object described by a
linguistic search pattern: a genetic algorithm evolves search queries,
pluggable sources report hit counts and query frequencies, and evidence
from several sources is fused with Dempster-Shafer theory into
belief/plausibility intervals and trend reports.
"""

from .errors import InnoscoreError

__version__ = "0.1.0"

__all__ = ["InnoscoreError", "__version__"]
