"""Affinity measures between vote profiles: Weighted Kappa and Kendall tau.

Both operate on the movies two people voted in common. Kappa averages
category-distance weights (1 at agreement, falling by 0.2 per category of
distance); chance agreement is fixed at zero, so kappa is the plain weighted
average and lives in [0, 1]. Tau classifies every unordered pair of common
movies by the signs of the two people's vote differences, with the zero-kind
conventions this system uses: both differences zero counts as concordant,
exactly one zero is ignored, and ignored pairs stay in the denominator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import N_CATEGORIES, Profile, RatingsStore, common_movies
from .errors import InsufficientOverlap, NotEnoughPairs, UndefinedRatio

KAPPA = "weighted_kappa"
TAU = "kendall_tau"
_MEASURE_ALIASES = {
    "kappa": KAPPA,
    "tau": TAU,
    KAPPA: KAPPA,
    TAU: TAU,
}

DEFAULT_MIN_COMMON = 2


def kappa_weight(i: int, j: int) -> float:
    """Agreement weight for categories i and j: 1 - |i-j|/5.

    Computed as (5 - |i-j|)/5 so each weight is the correctly rounded float
    of the exact rational (0, 0.2, ..., 1.0 land on their literals).
    """
    if not (1 <= i <= N_CATEGORIES and 1 <= j <= N_CATEGORIES):
        raise ValueError(f"category indices must be 1..{N_CATEGORIES}, got ({i}, {j})")
    return (N_CATEGORIES - 1 - abs(i - j)) / (N_CATEGORIES - 1)


@dataclass
class KappaResult:
    """Weighted-kappa value with its agreement-count diagnostics."""

    kappa: float
    n_common: int
    weight_sum: float
    f_matrix: np.ndarray  # 6x6 counts, row = a's category, column = b's

    def nonzero_cells(self):
        """(row_index, col_index, count) for every populated agreement cell, 1-based."""
        rows, cols = np.nonzero(self.f_matrix)
        return [(int(r) + 1, int(c) + 1, int(self.f_matrix[r, c])) for r, c in zip(rows, cols)]


@dataclass
class TauResult:
    """Kendall tau with concordant/discordant/ignored pair counts."""

    tau: float
    concordant: int
    discordant: int
    ignored: int
    n_common: int

    @property
    def s(self) -> int:
        return self.concordant - self.discordant

    @property
    def total_pairs(self) -> int:
        return self.n_common * (self.n_common - 1) // 2


def weighted_kappa(a: Profile, b: Profile, min_common: int = DEFAULT_MIN_COMMON) -> KappaResult:
    """Weighted kappa over the common movies of a and b.

    Raises InsufficientOverlap when fewer than min_common movies are shared,
    which marks the pair unusable as an antibody candidate.
    """
    shared = common_movies(a, b)
    n = len(shared)
    if n < min_common:
        raise InsufficientOverlap(n, min_common)
    f = np.zeros((N_CATEGORIES, N_CATEGORIES), dtype=int)
    distance = 0
    for _, va, vb in shared:
        f[va.index - 1, vb.index - 1] += 1
        distance += abs(va.index - vb.index)
    # integer numerator/denominator: one correctly rounded division
    kappa = (5 * n - distance) / (5 * n)
    weight_sum = (5 * n - distance) / 5
    return KappaResult(kappa=kappa, n_common=n, weight_sum=weight_sum, f_matrix=f)


def kendall_tau(a: Profile, b: Profile, min_common: int = DEFAULT_MIN_COMMON) -> TauResult:
    """Kendall tau over all unordered pairs of common movies.

    Differences are taken on category indices (sign-identical to the printed
    values, immune to float-zero misclassification). Ignored pairs (exactly
    one zero difference) stay in the n(n-1) denominator.
    """
    shared = common_movies(a, b)
    n = len(shared)
    if n < max(min_common, 2):
        raise InsufficientOverlap(n, max(min_common, 2))
    ia = np.array([va.index for _, va, _ in shared])
    ib = np.array([vb.index for _, _, vb in shared])
    iu, ju = np.triu_indices(n, k=1)
    da = ia[ju] - ia[iu]
    db = ib[ju] - ib[iu]
    za = da == 0
    zb = db == 0
    concordant = int(np.count_nonzero((za & zb) | (~za & ~zb & ((da > 0) == (db > 0)))))
    ignored = int(np.count_nonzero(za ^ zb))
    discordant = len(da) - concordant - ignored
    s = concordant - discordant
    tau = (2 * s) / (n * (n - 1))
    return TauResult(tau=tau, concordant=concordant, discordant=discordant,
                     ignored=ignored, n_common=n)


def concordance_ratio(tau: float) -> float:
    """Odds of a pair being concordant vs discordant, (1+tau)/(1-tau)."""
    if not -1 <= tau <= 1:
        raise ValueError(f"tau must be in [-1, 1], got {tau}")
    if tau == 1:
        raise UndefinedRatio("all pairs concordant, ratio is infinite")
    return (1 + tau) / (1 - tau)


# Table-3 strength-of-agreement bands. Policy for the printed gaps/overlaps:
# first band top-down whose closed interval contains the value; for kappa the
# gaps are closed by upper-inclusive/lower-exclusive bands (first band open
# below).
_KAPPA_BANDS = [(0.20, "poor"), (0.40, "fair"), (0.60, "moderate"), (0.80, "good"), (1.0, "very_good")]
_TAU_BANDS = [((-1.0, -0.2), "poor"), ((-0.6, -0.2), "fair"), ((-0.2, 0.2), "moderate"),
              ((0.2, 0.6), "good"), ((0.6, 1.0), "very_good")]


def agreement_strength(value: float, kind: str = KAPPA) -> str:
    """Band label for an affinity value per the strength-of-agreement table."""
    kind = _MEASURE_ALIASES.get(kind, kind)
    if kind == KAPPA:
        if not 0 <= value <= 1:
            raise ValueError(f"kappa must be in [0, 1], got {value}")
        for upper, label in _KAPPA_BANDS:
            if value <= upper:
                return label
        return "very_good"
    if kind == TAU:
        if not -1 <= value <= 1:
            raise ValueError(f"tau must be in [-1, 1], got {value}")
        for (low, high), label in _TAU_BANDS:
            if low <= value <= high:
                return label
        return "very_good"
    raise ValueError(f"unknown measure kind {kind!r}")


@dataclass
class AffinityMeasure:
    """Strategy selector between the two measures, with the overlap floor."""

    kind: str = KAPPA
    min_common: int = DEFAULT_MIN_COMMON

    def __post_init__(self):
        kind = _MEASURE_ALIASES.get(self.kind)
        if kind is None:
            raise ValueError(f"unknown measure kind {self.kind!r} (use 'kappa' or 'tau')")
        self.kind = kind
        if self.min_common < 2:
            raise ValueError("min_common must be at least 2")

    def result(self, a: Profile, b: Profile):
        if self.kind == KAPPA:
            return weighted_kappa(a, b, self.min_common)
        return kendall_tau(a, b, self.min_common)

    def affinity(self, a: Profile, b: Profile) -> float:
        r = self.result(a, b)
        return r.kappa if self.kind == KAPPA else r.tau

    def affinity_or_none(self, a: Profile, b: Profile):
        try:
            return self.affinity(a, b)
        except InsufficientOverlap:
            return None

    def strength(self, value: float) -> str:
        return agreement_strength(value, self.kind)


@dataclass
class IgnoredFractionStats:
    """Per-pair ignored fractions for sampled person pairs, plus the mean."""

    rows: list  # (pair_index, person_a, person_b, n_common, fraction)
    mean: float

    def write_csv(self, fh):
        import csv as _csv

        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(["pair_index", "person_a", "person_b", "n_common", "ignored_fraction"])
        for row in self.rows:
            writer.writerow([row[0], row[1], row[2], row[3], repr(row[4])])
        writer.writerow(["mean", "", "", "", repr(self.mean)])


def ignored_fraction_stats(store: RatingsStore, pair_count: int, min_common: int = DEFAULT_MIN_COMMON,
                           seed: int = 0) -> IgnoredFractionStats:
    """Sample person pairs and report the fraction of tau pairs ignored.

    The fraction's denominator is all n(n-1)/2 movie pairs, consistent with
    the tau denominator.
    """
    if pair_count < 1:
        raise ValueError("pair_count must be positive")
    people = store.person_ids()
    eligible = []
    for i in range(len(people)):
        votes_i = store.profiles[people[i]].votes.keys()
        for j in range(i + 1, len(people)):
            n = len(votes_i & store.profiles[people[j]].votes.keys())
            if n >= max(min_common, 2):
                eligible.append((people[i], people[j]))
    if len(eligible) < pair_count:
        raise NotEnoughPairs(f"{len(eligible)} eligible pairs, requested {pair_count}")
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(eligible), size=pair_count, replace=False)
    rows = []
    for k, idx in enumerate(picked):
        pa, pb = eligible[int(idx)]
        r = kendall_tau(store.profiles[pa], store.profiles[pb], max(min_common, 2))
        rows.append((k, pa, pb, r.n_common, r.ignored / r.total_pairs))
    mean = sum(row[4] for row in rows) / len(rows)
    return IgnoredFractionStats(rows=rows, mean=mean)
