import pytest

from immunecf import Profile, RatingsStore, VoteCategory, normalize_vote

# The two worked-example people (ids 50 and 70), votes on the unit scale.
PERSON1_VOTES = {
    "2": 1.0, "4": 1.0, "19": 0.6, "21": 0.2, "24": 0.8, "27": 1.0, "31": 1.0,
    "32": 0.8, "62": 1.0, "65": 0.8, "76": 1.0, "93": 0.6, "94": 0.8,
}
PERSON2_VOTES = {
    "1": 0.8, "2": 0.6, "5": 0.6, "8": 0.4, "13": 0.2, "15": 0.0, "19": 0.2,
    "24": 0.6, "25": 0.4, "32": 0.8, "34": 0.8, "52": 0.6, "62": 0.8, "65": 0.0,
    "70": 0.6, "86": 0.4, "87": 0.2, "95": 0.8, "107": 0.6,
}


def make_profile(person_id, votes):
    return Profile(person_id, {m: normalize_vote(v, "unit") for m, v in votes.items()})


@pytest.fixture
def person1():
    return make_profile("50", PERSON1_VOTES)


@pytest.fixture
def person2():
    return make_profile("70", PERSON2_VOTES)


@pytest.fixture
def example_store(person1, person2):
    return RatingsStore(profiles={"50": person1, "70": person2})


def random_profile(rng, person_id, n_votes, movie_pool=15):
    """Random sparse profile over a small movie universe (forces overlap)."""
    movies = rng.choice(movie_pool, size=n_votes, replace=False)
    votes = {str(int(m)): VoteCategory(int(rng.integers(1, 7))) for m in movies}
    return Profile(person_id, votes)


def clone_pair_store(n_movies=8):
    """Two people with identical, all-distinct-where-possible votes."""
    votes = {f"m{i}": VoteCategory(i % 6 + 1) for i in range(n_movies)}
    return RatingsStore(profiles={
        "a": Profile("a", dict(votes)),
        "b": Profile("b", dict(votes)),
    })
