"""Text-based decomposition of FOMC announcement surprises.

High-frequency interest-rate movements around FOMC statements are split
into a news component (the part explained by the gap between central-bank
and private-sector expectations, each proxied by penalized regressions on
document embeddings) and a residual monetary component, with downstream
event-study and Bayesian VARX evidence.
"""

__version__ = "0.1.0"

from .dataset import (AnalysisSample, EmbeddingPanel, OutcomePanel,
                      SampleFilter, ShockName, ShockSeries, Source,
                      TargetName, TargetSeries, Window, build_sample,
                      load_embeddings, load_outcomes, load_shocks,
                      load_targets)
from .decomposition import (ChannelResult, DecompositionResult, GapSeries,
                            GridSpec, Stage3Fit, channel_regression,
                            decompose, expectation_gap, fit_expectation,
                            grid_search, short_regression_diagnostic,
                            stage3_project)
from .elastic_net import ElasticNetFit, PenaltySpec, fit, lambda_max, predict
from .event_study import EventStudyRow, run_event_study
from .regression import OlsFit, ols_hc
from .synth import SynthConfig, SyntheticDataset, brute_force_elastic_net, generate

__all__ = [
    "AnalysisSample", "ChannelResult", "DecompositionResult", "ElasticNetFit",
    "EmbeddingPanel", "EventStudyRow", "GapSeries", "GridSpec", "OlsFit",
    "OutcomePanel", "PenaltySpec", "SampleFilter", "ShockName", "ShockSeries",
    "Source", "Stage3Fit", "SynthConfig", "SyntheticDataset", "TargetName",
    "TargetSeries", "Window", "brute_force_elastic_net", "build_sample",
    "channel_regression", "decompose", "expectation_gap", "fit",
    "fit_expectation", "generate", "grid_search", "lambda_max",
    "load_embeddings", "load_outcomes", "load_shocks", "load_targets",
    "ols_hc", "predict", "run_event_study", "short_regression_diagnostic",
    "stage3_project",
]
