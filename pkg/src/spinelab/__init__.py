"""spinelab: heat kernels, spectra and potential theory on glued graphs."""

__version__ = "0.1.0"

from .graphs import (InvariantViolation, MarkovKernel, OrbitMap, Subgraph,
                     WeightedGraph, ball, build_kernel, check_weights,
                     distance, distance_to_set, volume)
from .windows import Bracket, HeatCache
