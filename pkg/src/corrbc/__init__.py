"""Joint source-channel coding of correlated sources over broadcast channels."""

from .measures import H, I, InfoExpression, JointPmf, entropy, mutual_information
from .regions import AuxiliarySpec, RateTriple, ScenarioSpec

__all__ = ["H", "I", "InfoExpression", "JointPmf", "entropy", "mutual_information",
           "AuxiliarySpec", "RateTriple", "ScenarioSpec"]
__version__ = "0.1.0"
