"""Concentration-weighted rating prediction over a converged network."""

from __future__ import annotations

from dataclasses import dataclass

from .data import ALL_CATEGORIES, VoteCategory, id_order
from .errors import NoSupport
from .network import NetworkState


@dataclass
class Prediction:
    movie_id: str
    score: float  # in [0, 1]
    rounded: VoteCategory  # nearest category, ties round up
    support: int  # antibodies that voted the movie
    weight_mass: float  # sum of supporting concentrations


def round_score(score: float) -> VoteCategory:
    """Nearest vote category to a score in [0, 1]; exact midpoints round up."""
    k = int(5 * score + 0.5)
    return ALL_CATEGORIES[min(max(k, 0), 5)]


def predict(state: NetworkState, movie_id) -> Prediction:
    """Predicted vote for one movie: concentration-weighted mean of pool votes.

    Only antibodies with positive concentration that voted the movie count.
    Raises NoSupport when there are none; the caller decides any fallback,
    a score is never fabricated.
    """
    weights = []
    values = []
    for pid, xi in zip(state.ids, state.x):
        if xi <= 0:
            continue
        vote = state.store.profiles[pid].votes.get(movie_id)
        if vote is not None:
            weights.append(float(xi))
            values.append(vote.value)
    if not weights:
        raise NoSupport(movie_id)
    mass = sum(weights)
    # anchored weighted mean: exact when every supporter voted the same value
    anchor = values[0]
    score = anchor + sum(w * (v - anchor) for w, v in zip(weights, values)) / mass
    score = min(max(score, min(values)), max(values))  # convex-combination bound
    return Prediction(movie_id=movie_id, score=score, rounded=round_score(score),
                      support=len(weights), weight_mass=mass)


def recommend_top_n(state: NetworkState, n: int, exclude_seen: bool = True):
    """Top-n predictions over every movie some live antibody voted.

    Sorted by score descending, ties by higher support then ascending movie
    id. May return fewer than n.
    """
    if n < 1:
        raise ValueError("n must be positive")
    candidate_movies = set()
    for pid, xi in zip(state.ids, state.x):
        if xi > 0:
            candidate_movies.update(state.store.profiles[pid].votes)
    if exclude_seen:
        candidate_movies -= state.antigen.votes.keys()
    predictions = [predict(state, m) for m in sorted(candidate_movies, key=id_order)]
    predictions.sort(key=lambda p: (-p.score, -p.support, id_order(p.movie_id)))
    return predictions[:n]
