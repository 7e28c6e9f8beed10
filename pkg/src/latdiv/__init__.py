"""Information divergence on finite lattices and Radon-Nikodym densities as limits of projections."""

from .errors import CheckFailure, LatdivError, ParseError, ValidationError
from .lattice import Lattice, build_lattice, is_distributive, join_irreducibles, maximal_chains
from .valuation import Valuation, chain_divergence, lattice_divergence
from .measure import DiscreteMeasure, Partition, RefinementSequence, projection_density, rn_approximate

__all__ = [
    "CheckFailure",
    "DiscreteMeasure",
    "Lattice",
    "LatdivError",
    "ParseError",
    "Partition",
    "RefinementSequence",
    "ValidationError",
    "Valuation",
    "build_lattice",
    "chain_divergence",
    "is_distributive",
    "join_irreducibles",
    "lattice_divergence",
    "maximal_chains",
    "projection_density",
    "rn_approximate",
]
