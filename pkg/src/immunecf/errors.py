"""Exception types shared across the package."""


class ImmuneCFError(Exception):
    """Base class for all immunecf errors."""


class OutOfScaleError(ImmuneCFError):
    """A raw rating is not a member of the six-category vote scale."""

    def __init__(self, raw, scale, line=None):
        self.raw = raw
        self.scale = scale
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"vote {raw!r} is not on the {scale} scale{where}")


class ParseError(ImmuneCFError):
    """A ratings or metadata file is malformed."""

    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class DuplicateVoteError(ImmuneCFError):
    """The same (person, movie) pair appears twice during ingestion."""

    def __init__(self, person_id, movie_id, line=None):
        self.person_id = person_id
        self.movie_id = movie_id
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate vote for person {person_id!r}, movie {movie_id!r}{where}")


class InsufficientOverlap(ImmuneCFError):
    """Two profiles share fewer common movies than the measure requires."""

    def __init__(self, n_common, min_common):
        self.n_common = n_common
        self.min_common = min_common
        super().__init__(f"{n_common} common movies, need at least {min_common}")


class UndefinedRatio(ImmuneCFError):
    """Concordance ratio is infinite (all pairs concordant, tau = 1)."""


class NotEnoughPairs(ImmuneCFError):
    """Fewer eligible person pairs exist than were requested."""


class NoEligibleCandidates(ImmuneCFError):
    """No person in the store shares enough movies with the antigen."""


class NoSupport(ImmuneCFError):
    """No antibody with positive concentration has voted the movie."""

    def __init__(self, movie_id):
        self.movie_id = movie_id
        super().__init__(f"no pool support for movie {movie_id!r}")


class InsufficientUsers(ImmuneCFError):
    """The store has fewer qualifying users than the evaluation asks for."""


class NotFitted(ImmuneCFError):
    """Estimator method called before fit()."""
