"""Desk-scale reproduction of the accuracy and measure-comparison experiments.

The accuracy protocol hides one known vote at a time: the reduced profile
becomes the antigen, a fresh network is converged against the full store,
and the hidden movie's prediction is scored as 1 - |score - actual|. Trials
the pool cannot predict are counted as lost coverage, never averaged in.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .affinity import AffinityMeasure
from .data import Profile, RatingsStore, id_order
from .errors import InsufficientUsers, NoEligibleCandidates, NoSupport
from .network import AisParams, init_network
from .recommend import predict


@dataclass
class EvalConfig:
    """Sampling knobs for the hidden-vote experiment (desk-scale defaults)."""

    user_count: int = 30
    min_votes: int = 21  # "voted more than 20 movies"
    hides_per_user: int = 10
    measure: AffinityMeasure = field(default_factory=AffinityMeasure)
    ais: AisParams = field(default_factory=AisParams)
    seed: int = 0

    def __post_init__(self):
        if self.user_count < 1 or self.hides_per_user < 1:
            raise ValueError("user_count and hides_per_user must be positive")
        if self.min_votes < 2:
            raise ValueError("min_votes must be at least 2 so the antigen stays eligible")


@dataclass
class UserAccuracy:
    person_id: str
    accuracy: float  # mean over predicted trials; nan when none predicted
    predictions_made: int
    no_support_count: int


@dataclass
class EvaluationReport:
    per_user: list  # of UserAccuracy
    mean_accuracy: float  # unweighted over users with >= 1 prediction; nan if none
    coverage: float  # predicted trials / attempted trials

    def write_per_user_csv(self, fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["person_id", "accuracy", "predictions_made", "no_support"])
        for row in self.per_user:
            acc = "n/a" if np.isnan(row.accuracy) else repr(row.accuracy)
            writer.writerow([row.person_id, acc, row.predictions_made, row.no_support_count])

    def histogram(self, bin_width=0.05):
        """Counts of per-user accuracies in [0,1] bins; last bin closed above."""
        nbins = int(round(1 / bin_width))
        edges = np.array([i / nbins for i in range(nbins + 1)])
        accs = [row.accuracy for row in self.per_user if not np.isnan(row.accuracy)]
        counts, _ = np.histogram(accs, bins=edges)
        return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))]

    def write_histogram_csv(self, fh, bin_width=0.05):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_low", "bin_high", "count"])
        for low, high, count in self.histogram(bin_width):
            writer.writerow([repr(low), repr(high), count])


def evaluate(store: RatingsStore, config: EvalConfig) -> EvaluationReport:
    """Hidden-vote accuracy over a seeded sample of qualifying users.

    The store is never mutated; hiding builds a reduced copy of the profile
    per trial. Antibody-antibody affinities are memoized across trials (the
    store side of every network is the same).
    """
    qualifying = [pid for pid in store.person_ids() if len(store.profiles[pid]) >= config.min_votes]
    if len(qualifying) < config.user_count:
        raise InsufficientUsers(
            f"{len(qualifying)} users with >= {config.min_votes} votes, need {config.user_count}")
    rng = np.random.default_rng(config.seed)
    chosen = [qualifying[i] for i in rng.choice(len(qualifying), size=config.user_count, replace=False)]
    pair_cache: dict = {}
    per_user = []
    total_predicted = 0
    total_attempted = 0
    for person_id in chosen:
        profile = store.profiles[person_id]
        movies = sorted(profile.votes, key=id_order)
        n_hides = min(config.hides_per_user, len(movies))
        total_attempted += n_hides
        hidden = [movies[i] for i in rng.choice(len(movies), size=n_hides, replace=False)]
        accuracies = []
        no_support = 0
        for movie_id in hidden:
            antigen = profile.without_movie(movie_id)
            trial_seed = int(rng.integers(0, 2**63))
            try:
                state = init_network(antigen, store, config.measure,
                                     config.ais.with_seed(trial_seed), pair_cache=pair_cache)
                state.run_to_convergence()
                p = predict(state, movie_id)
            except (NoEligibleCandidates, NoSupport):
                # trial failures are recorded as lost coverage, never raised
                no_support += 1
                continue
            accuracies.append(1.0 - abs(p.score - profile.votes[movie_id].value))
        total_predicted += len(accuracies)
        accuracy = sum(accuracies) / len(accuracies) if accuracies else float("nan")
        per_user.append(UserAccuracy(person_id=person_id, accuracy=accuracy,
                                     predictions_made=len(accuracies),
                                     no_support_count=no_support))
    covered = [u.accuracy for u in per_user if u.predictions_made > 0]
    mean_accuracy = sum(covered) / len(covered) if covered else float("nan")
    coverage = total_predicted / total_attempted
    return EvaluationReport(per_user=per_user, mean_accuracy=mean_accuracy, coverage=coverage)


@dataclass
class CrossAffinityRow:
    person_id: str
    selected_affinity: float
    compared_affinity: float | None  # None when the pair fails min_common


def cross_affinity_experiment(store: RatingsStore, antigen: Profile,
                              select_measure: AffinityMeasure,
                              compare_measure: AffinityMeasure,
                              ais: AisParams):
    """Select a neighborhood under one measure, re-score it under the other.

    Rows cover the surviving pool, ordered by descending selected affinity.
    """
    state = init_network(antigen, store, select_measure, ais)
    state.run_to_convergence()
    rows = []
    for pid, m in zip(state.ids, state.m_i):
        compared = compare_measure.affinity_or_none(antigen, store.profiles[pid])
        rows.append(CrossAffinityRow(person_id=pid, selected_affinity=float(m),
                                     compared_affinity=compared))
    rows.sort(key=lambda r: (-r.selected_affinity, id_order(r.person_id)))
    return rows


def write_cross_affinity_csv(rows, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["person_id", "selected", "compared"])
    for row in rows:
        compared = "insufficient" if row.compared_affinity is None else repr(row.compared_affinity)
        writer.writerow([row.person_id, repr(row.selected_affinity), compared])


def summarize(report: EvaluationReport) -> str:
    """Human-readable summary: mean accuracy, coverage, accuracy histogram."""
    lines = []
    if report.per_user and not np.isnan(report.mean_accuracy):
        lines.append(f"mean prediction accuracy: {report.mean_accuracy:.6f}")
    else:
        lines.append("mean prediction accuracy: n/a")
    lines.append(f"coverage: {report.coverage:.4f}" if report.per_user else "coverage: n/a")
    lines.append(f"users evaluated: {len(report.per_user)}")
    lines.append("accuracy histogram (bin width 0.05):")
    for low, high, count in report.histogram():
        if count:
            lines.append(f"  [{low:.2f}, {high:.2f}]: {count}")
    return "\n".join(lines)
