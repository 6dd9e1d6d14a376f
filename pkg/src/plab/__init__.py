"""plab: planted-structure detection lab.

Library layers: designs (clique/biclique packings), instances (seeded
generators), oracles (query sessions), transforms (query rewriting),
detectors (upper-bound algorithms), reductions (lower-bound constructions),
stats (verification utilities).  A FastAPI service (plab.service) wraps the
library; the CLI (plab.cli) is a thin client of that service.
"""

__version__ = "0.1.0"
