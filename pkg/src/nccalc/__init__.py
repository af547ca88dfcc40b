"""Exact truncated free Lie / necklace calculus.

Core layers: free graded associative series (nc), necklace functions
(cyclic), differential calculus with Poisson structures (geometry),
moment-map machinery (hamiltonian), tangential automorphisms (taut),
the coboundary twist (quasi), a numeric oracle (specialize) and a CLI.
"""

from .nc import (
    Alphabet,
    Generator,
    NCSeries,
    ad_apply,
    bch,
    der_apply,
    dynkin_project,
    exp_nc,
    hom_apply,
    is_lie,
    lie_bracket,
    log_nc,
)
from .cyclic import CyclicSeries, pair, project_cyclic
from .geometry import (
    LieSpaceContext,
    PoissonStructure,
    SeriesMatrix,
    kks_structure,
    symplectic_structure,
)

__all__ = [
    "Alphabet",
    "Generator",
    "NCSeries",
    "CyclicSeries",
    "LieSpaceContext",
    "PoissonStructure",
    "SeriesMatrix",
    "ad_apply",
    "bch",
    "der_apply",
    "dynkin_project",
    "exp_nc",
    "hom_apply",
    "is_lie",
    "lie_bracket",
    "log_nc",
    "pair",
    "project_cyclic",
    "kks_structure",
    "symplectic_structure",
]
