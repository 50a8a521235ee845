"""Ordinal movie-rating data model, ingestion, and synthetic data generation.

People are sparse vote maps {movie_id -> category}. Votes live on a fixed
six-category scale whose printed values are 0, 0.2, 0.4, 0.6, 0.8, 1; all
arithmetic is done on the integer category index 1..6, the float value is
derived at the boundary.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DuplicateVoteError, OutOfScaleError, ParseError

N_CATEGORIES = 6

# accepted vote scales
SCALE_RAW5 = "zero_to_five_integer"
SCALE_UNIT = "zero_to_one_float"
_SCALE_ALIASES = {
    "raw5": SCALE_RAW5,
    "unit": SCALE_UNIT,
    SCALE_RAW5: SCALE_RAW5,
    SCALE_UNIT: SCALE_UNIT,
}


def id_order(identifier):
    """Total, deterministic sort key for opaque string ids.

    All-digit ids order numerically (so movie "19" < "24" as the worked
    examples expect) and sort before non-numeric ids, which order
    lexicographically.
    """
    s = str(identifier)
    if s.isdigit():
        return (0, int(s), s)
    return (1, 0, s)


@dataclass(frozen=True, order=True)
class VoteCategory:
    """One of the six vote categories, index 1..6."""

    index: int

    def __post_init__(self):
        if not isinstance(self.index, int) or not 1 <= self.index <= N_CATEGORIES:
            raise ValueError(f"category index must be an integer 1..{N_CATEGORIES}, got {self.index!r}")

    @property
    def value(self) -> float:
        """The printed vote value, (index - 1) / 5."""
        return (self.index - 1) / 5


ALL_CATEGORIES = tuple(VoteCategory(i) for i in range(1, N_CATEGORIES + 1))


def normalize_vote(raw, scale) -> VoteCategory:
    """Map a raw rating onto the six-category scale.

    raw5 takes integers 0..5 (k maps to index k+1); unit takes the printed
    values 0..1 and snaps to the nearest category within 1e-9. Anything else
    raises OutOfScaleError.
    """
    scale = _SCALE_ALIASES.get(scale)
    if scale is None:
        raise ValueError(f"unknown vote scale {scale!r}")
    if scale == SCALE_RAW5:
        if isinstance(raw, bool) or raw != int(raw):
            raise OutOfScaleError(raw, "raw5")
        k = int(raw)
        if not 0 <= k <= 5:
            raise OutOfScaleError(raw, "raw5")
        return ALL_CATEGORIES[k]
    k = int(round(float(raw) * 5))
    if not 0 <= k <= 5 or abs(float(raw) - k / 5) > 1e-9:
        raise OutOfScaleError(raw, "unit")
    return ALL_CATEGORIES[k]


@dataclass
class Profile:
    """One person's sparse vote map. Treated as immutable once built."""

    person_id: str
    votes: dict = field(default_factory=dict)  # movie_id -> VoteCategory

    def __len__(self):
        return len(self.votes)

    def without_movie(self, movie_id) -> "Profile":
        """Copy of this profile with one movie's vote masked out."""
        votes = {m: v for m, v in self.votes.items() if m != movie_id}
        return Profile(self.person_id, votes)


def common_movies(a: Profile, b: Profile):
    """Movies both profiles voted, ascending by movie id.

    Returns a list of (movie_id, vote_a, vote_b).
    """
    shared = sorted(a.votes.keys() & b.votes.keys(), key=id_order)
    return [(m, a.votes[m], b.votes[m]) for m in shared]


@dataclass
class RatingsStore:
    """The whole candidate-antibody population plus optional movie metadata."""

    profiles: dict = field(default_factory=dict)  # person_id -> Profile
    movies: dict = field(default_factory=dict)  # movie_id -> title

    def __len__(self):
        return len(self.profiles)

    def person_ids(self):
        return sorted(self.profiles.keys(), key=id_order)

    def movie_ids(self):
        """All known movie ids: metadata keys plus every voted movie."""
        ids = set(self.movies)
        for p in self.profiles.values():
            ids.update(p.votes)
        return sorted(ids, key=id_order)

    def validate_references(self):
        """With metadata loaded, every voted movie must be a known movie."""
        if not self.movies:
            return
        for p in self.profiles.values():
            for m in p.votes:
                if m not in self.movies:
                    raise ParseError(f"vote references unknown movie {m!r} (person {p.person_id!r})")


def _add_vote(store, person_id, movie_id, category, line):
    profile = store.profiles.get(person_id)
    if profile is None:
        profile = Profile(person_id)
        store.profiles[person_id] = profile
    if movie_id in profile.votes:
        raise DuplicateVoteError(person_id, movie_id, line)
    profile.votes[movie_id] = category


def _as_text(stream):
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(stream.decode("utf-8"))
    if isinstance(stream, str):
        return io.StringIO(stream)
    if hasattr(stream, "read"):
        data = stream.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data)
    raise TypeError(f"cannot read ratings from {type(stream).__name__}")


def parse_ratings_csv(stream, scale) -> RatingsStore:
    """Parse the generic ratings CSV: header person_id,movie_id,vote.

    Later duplicates of a (person, movie) pair are hard errors, not
    last-write-wins; a silent overwrite would corrupt affinity counts.
    """
    text = _as_text(stream)
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file, expected header person_id,movie_id,vote") from None
    if [h.strip().lower() for h in header] != ["person_id", "movie_id", "vote"]:
        raise ParseError(f"bad header {header!r}, expected person_id,movie_id,vote", line=1)
    store = RatingsStore()
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise ParseError(f"expected 3 fields, got {len(row)}", line=lineno)
        person_id, movie_id, raw = (f.strip() for f in row)
        if not person_id or not movie_id:
            raise ParseError("empty person_id or movie_id", line=lineno)
        try:
            value = float(raw)
        except ValueError:
            raise ParseError(f"vote {raw!r} is not a number", line=lineno) from None
        try:
            category = normalize_vote(value, scale)
        except OutOfScaleError as exc:
            raise OutOfScaleError(exc.raw, exc.scale, line=lineno) from None
        _add_vote(store, person_id, movie_id, category, lineno)
    return store


def parse_eachmovie_votes(stream) -> RatingsStore:
    """Parse an EachMovie-style vote file: person<TAB>movie<TAB>score, score 0..5."""
    text = _as_text(stream)
    store = RatingsStore()
    for lineno, line in enumerate(text, start=1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", line=lineno)
        person_id, movie_id, raw = (f.strip() for f in fields)
        if not person_id or not movie_id:
            raise ParseError("empty person_id or movie_id", line=lineno)
        try:
            score = int(raw)
        except ValueError:
            raise ParseError(f"score {raw!r} is not an integer", line=lineno) from None
        try:
            category = normalize_vote(score, SCALE_RAW5)
        except OutOfScaleError as exc:
            raise OutOfScaleError(exc.raw, exc.scale, line=lineno) from None
        _add_vote(store, person_id, movie_id, category, lineno)
    return store


def parse_movies_csv(stream) -> dict:
    """Parse the optional metadata CSV: header movie_id,title."""
    text = _as_text(stream)
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file, expected header movie_id,title") from None
    if [h.strip().lower() for h in header] != ["movie_id", "title"]:
        raise ParseError(f"bad header {header!r}, expected movie_id,title", line=1)
    movies = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", line=lineno)
        movie_id, title = row[0].strip(), row[1].strip()
        if not movie_id:
            raise ParseError("empty movie_id", line=lineno)
        if movie_id in movies:
            raise ParseError(f"duplicate movie_id {movie_id!r}", line=lineno)
        movies[movie_id] = title
    return movies


@dataclass
class SyntheticConfig:
    """Desk-scale synthetic store: clustered users around shared preference vectors."""

    cluster_count: int = 5
    users_per_cluster: int = 10
    movies: int = 50
    votes_per_user: int = 50
    noise_categories: int = 0
    seed: int = 0

    def __post_init__(self):
        for name in ("cluster_count", "users_per_cluster", "movies", "votes_per_user"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.noise_categories <= 5:
            raise ValueError("noise_categories must be in 0..5")
        if self.votes_per_user > self.movies:
            raise ValueError("votes_per_user cannot exceed movies")


def generate_synthetic(config: SyntheticConfig) -> RatingsStore:
    """Deterministic clustered store.

    Every user in a cluster shares the cluster's preference vector; each user
    votes votes_per_user uniformly sampled movies with the category index
    perturbed by a uniform integer in [-noise, +noise], clamped to 1..6.
    """
    rng = np.random.default_rng(config.seed)
    movie_width = max(3, len(str(config.movies - 1)))
    movie_ids = [f"m{i:0{movie_width}d}" for i in range(config.movies)]
    store = RatingsStore(movies={m: f"Synthetic movie {m[1:]}" for m in movie_ids})
    noise = config.noise_categories
    for c in range(config.cluster_count):
        preference = rng.integers(1, N_CATEGORIES + 1, size=config.movies)
        for u in range(config.users_per_cluster):
            person_id = f"c{c:02d}_u{u:03d}"
            chosen = rng.choice(config.movies, size=config.votes_per_user, replace=False)
            chosen.sort()
            votes = {}
            for m in chosen:
                index = int(preference[m])
                if noise:
                    index += int(rng.integers(-noise, noise + 1))
                    index = min(max(index, 1), N_CATEGORIES)
                votes[movie_ids[m]] = VoteCategory(index)
            store.profiles[person_id] = Profile(person_id, votes)
    return store


# --- single-file store container (JSON, canonical key order) ---

def save_store(store: RatingsStore, path):
    """Write the store as canonical JSON; byte-identical for identical stores."""
    doc = {
        "format": "immunecf-store",
        "version": 1,
        "movies": {m: store.movies[m] for m in sorted(store.movies, key=id_order)},
        "profiles": {
            p: {str(m): store.profiles[p].votes[m].index
                for m in sorted(store.profiles[p].votes, key=id_order)}
            for p in store.person_ids()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_store(path) -> RatingsStore:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"not a store file: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != "immunecf-store":
        raise ParseError("not a store file (missing immunecf-store marker)")
    store = RatingsStore(movies=dict(doc.get("movies", {})))
    for person_id, votes in doc.get("profiles", {}).items():
        profile = Profile(person_id)
        for movie_id, index in votes.items():
            if not isinstance(index, int) or not 1 <= index <= N_CATEGORIES:
                raise ParseError(f"bad category index {index!r} for person {person_id!r}")
            profile.votes[movie_id] = VoteCategory(index)
        store.profiles[person_id] = profile
    return store


def export_ratings_csv(store: RatingsStore, path):
    """Write the store back out as the generic CSV (unit scale), canonical order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["person_id", "movie_id", "vote"])
        for person_id in store.person_ids():
            profile = store.profiles[person_id]
            for movie_id in sorted(profile.votes, key=id_order):
                writer.writerow([person_id, movie_id, repr(profile.votes[movie_id].value)])


def export_movies_csv(store: RatingsStore, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["movie_id", "title"])
        for movie_id in sorted(store.movies, key=id_order):
            writer.writerow([movie_id, store.movies[movie_id]])
