"""DE-CAFSA: chaotic artificial fish swarm with multi-population differential
evolution, for the TSP and multi-group depot routing with a cost model."""

from .afsa import Bulletin, Fish, SwarmConfig
from .de import DeConfig
from .hybrid import VARIANTS, HybridConfig, RunResult, run, run_variant_matrix
from .instances import (DistanceMatrix, TspInstance, bundled, distance_matrix, load_tsplib,
                        parse_tsplib)
from .mtsp import CostBreakdown, CostParams, MtspPlan, PlanSpace, total_cost, validate_plan
from .space import TourSpace

__version__ = "0.1.0"
