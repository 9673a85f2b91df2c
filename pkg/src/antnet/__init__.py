"""Ant colony optimization over a growing pheromone reference network."""
from .colony import (AntRecord, ColonyState, DecisionParams, PheromoneAggregate, TrialResult,
                     aggregate_pheromone, decide, run_trial, step)
from .config import RunConfig, load_config
from .errors import ConfigurationError, ConsistencyError, ExhaustionError
from .ising import IsingParams, effective_field, energy, energy_of_magnetization
from .meanfield import MeanFieldState, TheoryPoint, integrate, sde_step, theory_point
from .refnet import GrowthParams, NetworkState, grow_network, total_popularity

__version__ = "0.1.0"
