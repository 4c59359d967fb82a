"""Refined mean-field analysis and simulators for the gossip shuffle protocol."""

from .kernels import GossipParams, ModelKind, build_model, coverage_measure, replication_measure
from .meanfield import classic_trajectory, measure_series
from .model import CountVector, Measure, PopulationModel
from .refined import refined_trajectory

__all__ = [
    "CountVector",
    "GossipParams",
    "Measure",
    "ModelKind",
    "PopulationModel",
    "build_model",
    "classic_trajectory",
    "coverage_measure",
    "measure_series",
    "refined_trajectory",
    "replication_measure",
]
