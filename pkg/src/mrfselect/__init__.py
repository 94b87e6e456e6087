"""Global graph selection for discrete Markov random fields by penalized pseudo-likelihood."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .model import (
    ConfigKey,
    DiscreteDistribution,
    Graph,
    ProblemDims,
    Sample,
    complete_graph,
    decode_config,
    encode_config,
    enumerate_graphs,
)
from .counts import CountTable, count_margin, empirical_conditional, empirical_marginal, node_statistics
from .score import PenaltyConfig, Scorer, VertexScore, graph_score, score_delta_for_edge_flip, vertex_loglik
from .search import AnnealConfig, SearchResult, exhaustive_argmax, greedy_flip_search, simulated_annealing
from .truth import (
    UNBOUNDED,
    PairwisePotentialSpec,
    TrueModel,
    alpha,
    basic_neighborhoods,
    exact_sample,
    joint_from_potentials,
    kl_chi2_bound,
    kl_divergence,
    true_conditional,
)
from .simulate import EnvelopeReport, MixingChainConfig, envelope_check, generate_chain, mixing_diagnostic
