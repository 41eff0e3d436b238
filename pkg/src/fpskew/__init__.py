"""Design-based inference for quantile skewness indices in finite populations."""

from .designs import DrawnSample, SamplingDesign, draw, srswor, stratified_srswor
from .estimators import EstimatorKind, PopulationAux, estimate
from .montecarlo import SimulationConfig, SimulationReport, krw_benchmark, load_config, run
from .population import FinitePopulation, generate_population, stratify_by_x, true_parameters
from .variance import EstimateRecord, infer
from .wcdf import WeightedCdf, b2, b3, quantile

__version__ = "0.1.0"

__all__ = [
    "DrawnSample",
    "EstimateRecord",
    "EstimatorKind",
    "FinitePopulation",
    "PopulationAux",
    "SamplingDesign",
    "SimulationConfig",
    "SimulationReport",
    "WeightedCdf",
    "b2",
    "b3",
    "draw",
    "estimate",
    "generate_population",
    "infer",
    "krw_benchmark",
    "load_config",
    "quantile",
    "run",
    "srswor",
    "stratified_srswor",
    "stratify_by_x",
    "true_parameters",
]
