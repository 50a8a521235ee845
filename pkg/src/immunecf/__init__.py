"""Immune-network collaborative filtering.

A target user's profile is the antigen; people from the ratings store are
candidate antibodies whose concentrations evolve under idiotypic network
dynamics over Weighted-Kappa or Kendall-tau affinities. The surviving,
concentration-weighted pool produces rating predictions.
"""

from .affinity import (AffinityMeasure, IgnoredFractionStats, KappaResult, TauResult,
                       agreement_strength, concordance_ratio, ignored_fraction_stats,
                       kappa_weight, kendall_tau, weighted_kappa)
from .data import (ALL_CATEGORIES, Profile, RatingsStore, SyntheticConfig, VoteCategory,
                   common_movies, generate_synthetic, load_store, normalize_vote,
                   parse_eachmovie_votes, parse_movies_csv, parse_ratings_csv, save_store)
from .errors import (DuplicateVoteError, ImmuneCFError, InsufficientOverlap,
                     InsufficientUsers, NoEligibleCandidates, NoSupport, NotEnoughPairs,
                     NotFitted, OutOfScaleError, ParseError, UndefinedRatio)
from .estimator import ImmuneRecommender
from .evaluation import (CrossAffinityRow, EvalConfig, EvaluationReport,
                         cross_affinity_experiment, evaluate, summarize)
from .network import (AisParams, Antibody, NetworkState, eligible_candidates,
                      init_network, parse_ais_config)
from .recommend import Prediction, predict, recommend_top_n, round_score

__version__ = "0.1.0"

__all__ = [
    "AffinityMeasure", "AisParams", "Antibody", "ALL_CATEGORIES", "CrossAffinityRow",
    "DuplicateVoteError", "EvalConfig", "EvaluationReport", "IgnoredFractionStats",
    "ImmuneCFError", "ImmuneRecommender", "InsufficientOverlap", "InsufficientUsers",
    "KappaResult", "NetworkState", "NoEligibleCandidates", "NoSupport", "NotEnoughPairs",
    "NotFitted", "OutOfScaleError", "ParseError", "Prediction", "Profile", "RatingsStore",
    "SyntheticConfig", "TauResult", "UndefinedRatio", "VoteCategory", "agreement_strength",
    "common_movies", "concordance_ratio", "cross_affinity_experiment", "eligible_candidates",
    "evaluate", "generate_synthetic", "ignored_fraction_stats", "init_network",
    "kappa_weight", "kendall_tau", "load_store", "normalize_vote", "parse_ais_config",
    "parse_eachmovie_votes", "parse_movies_csv", "parse_ratings_csv", "predict",
    "recommend_top_n", "round_score", "save_store", "summarize", "weighted_kappa",
]
