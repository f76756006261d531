"""Network formation games between major (A) and minor (B) players.

Submodules: ``graph`` (topologies and traces), ``cost`` (exact costs and
deltas), ``stability`` (pairwise stability and enumeration), ``canonical``
(closed-form families and bounds), ``dynamics`` (turn-based best response),
``monetary`` (transfers), ``metrics`` (k-cores, density, core distance) and
``cli``.
"""

__version__ = "0.1.0"
