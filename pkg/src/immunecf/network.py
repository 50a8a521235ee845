"""Idiotypic network over candidate antibodies.

Each person in the store who shares enough movies with the antigen is a
candidate antibody. Concentrations evolve by explicit Euler steps of

    dx_i/dt = k1 * m_i * x_i * y  -  (k2/n) * sum_{j != i} max(0, m_ij) * x_i * x_j  -  k3 * x_i

where m_i is the antibody's affinity to the antigen and m_ij the affinity
between antibodies. Stimulation uses the raw m_i (a negative tau affinity
accelerates death); suppression clips negative antibody-antibody affinities
to zero so they can never turn into growth. Antibodies falling below the
death threshold are deleted and replaced from the never-drawn reservoir;
once the reservoir runs dry the pool shrinks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .affinity import AffinityMeasure
from .data import Profile, RatingsStore, id_order
from .errors import NoEligibleCandidates

STOP_STABLE = "stable"
STOP_EXHAUSTED = "exhausted"
STOP_MAX_STEPS = "max_steps"


@dataclass
class AisParams:
    """Numeric knobs of the network. The model fixes the shape, not the values."""

    pool_size: int = 100
    k1: float = 1.0  # stimulation gain
    k2: float = 0.5  # suppression gain
    k3: float = 0.1  # death rate
    dt: float = 0.1
    antigen_concentration: float = 1.0  # y
    x_init: float = 1.0
    x_death: float = 0.05
    x_max: float = 10.0
    max_steps: int = 1000
    stable_window: int = 50
    stable_tol: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.pool_size < 1:
            raise ValueError("pool_size must be positive")
        # k1 = 0 is allowed: pure-decay dynamics are well defined and useful
        if self.k1 < 0 or self.k2 < 0 or self.k3 < 0:
            raise ValueError("k1, k2, k3 must be non-negative")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.antigen_concentration <= 0:
            raise ValueError("antigen_concentration must be positive")
        if not 0 < self.x_death < self.x_init <= self.x_max:
            raise ValueError("need 0 < x_death < x_init <= x_max")
        if self.dt * self.k3 >= 1:
            raise ValueError("dt * k3 must be below 1 (decay step would overshoot)")
        if self.max_steps < 1 or self.stable_window < 1:
            raise ValueError("max_steps and stable_window must be positive")
        if self.stable_tol <= 0:
            raise ValueError("stable_tol must be positive")

    def with_seed(self, seed: int) -> "AisParams":
        return replace(self, seed=seed)


_PARAM_FIELDS = tuple(AisParams.__dataclass_fields__)
_INT_FIELDS = {"pool_size", "max_steps", "stable_window", "seed"}


def parse_ais_config(text: str) -> AisParams:
    """Parse the flat key = value config format mirroring AisParams fields."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _PARAM_FIELDS:
            raise ValueError(f"config line {lineno}: unknown parameter {key!r}")
        value = value.strip()
        try:
            values[key] = int(value) if key in _INT_FIELDS else float(value)
        except ValueError:
            raise ValueError(f"config line {lineno}: bad value {value!r} for {key}") from None
    return AisParams(**values)


@dataclass
class Antibody:
    """Snapshot view of one pool member."""

    person_id: str
    concentration: float
    affinity: float  # m_i, to the antigen


class NetworkState:
    """Mutable network: antibody pool, concentrations, cached affinities.

    Owned by a single session; not safe for concurrent mutation.
    """

    def __init__(self, antigen, store, measure, params, ids, x, m_i, m_matrix,
                 reservoir, exhausted, pair_cache=None):
        self.antigen = antigen
        self.store = store
        self.measure = measure
        self.params = params
        self.ids = ids  # list of person_ids in pool order
        self.x = x  # concentrations, parallel to ids
        self.m_i = m_i  # antigen affinities, parallel to ids
        self.m_matrix = m_matrix  # pairwise affinities, zero diagonal
        self.reservoir = reservoir  # never-drawn eligible ids, in draw order
        self.exhausted = exhausted
        self.steps_taken = 0
        self.deletions = 0
        self.stop_reason = None
        self.steps_since_deletion = 0
        self.calm_streak = 0  # consecutive steps with max relative change < tol
        self._pair_cache = pair_cache

    @property
    def pool_size(self) -> int:
        return len(self.ids)

    def antibodies(self):
        """Pool snapshot sorted by concentration descending (ties by id)."""
        rows = [Antibody(pid, float(xi), float(mi))
                for pid, xi, mi in zip(self.ids, self.x, self.m_i)]
        rows.sort(key=lambda ab: (-ab.concentration, id_order(ab.person_id)))
        return rows

    def _pair_affinity(self, id_a, id_b):
        if self._pair_cache is None:
            value = self.measure.affinity_or_none(self.store.profiles[id_a],
                                                  self.store.profiles[id_b])
            return 0.0 if value is None else value
        key = (id_a, id_b) if id_order(id_a) <= id_order(id_b) else (id_b, id_a)
        if key not in self._pair_cache:
            value = self.measure.affinity_or_none(self.store.profiles[id_a],
                                                  self.store.profiles[id_b])
            self._pair_cache[key] = 0.0 if value is None else value
        return self._pair_cache[key]

    def step(self):
        """One synchronous explicit-Euler update from the pre-step concentrations."""
        n = self.pool_size
        if n == 0:
            raise ValueError("cannot step an empty pool")
        p = self.params
        x = self.x
        suppression = np.clip(self.m_matrix, 0.0, None) @ x  # diagonal is zero
        dx = (p.k1 * self.m_i * x * p.antigen_concentration
              - (p.k2 / n) * x * suppression
              - p.k3 * x)
        x_new = np.clip(x + p.dt * dx, 0.0, p.x_max)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(x > 0, np.abs(x_new - x) / x, 0.0)
        max_rel = float(rel.max()) if n else 0.0
        self.calm_streak = self.calm_streak + 1 if max_rel < p.stable_tol else 0
        self.x = x_new
        self.steps_taken += 1
        self.steps_since_deletion += 1
        return self

    def replace_dead(self):
        """Delete below-threshold antibodies and refill from the reservoir."""
        p = self.params
        dead = np.nonzero(self.x < p.x_death)[0]
        if dead.size == 0:
            return self
        self.deletions += int(dead.size)
        self.steps_since_deletion = 0
        keep = np.setdiff1d(np.arange(self.pool_size), dead)
        self.ids = [self.ids[i] for i in keep]
        self.x = self.x[keep]
        self.m_i = self.m_i[keep]
        self.m_matrix = self.m_matrix[np.ix_(keep, keep)]
        wanted = int(dead.size)
        incoming = self.reservoir[:wanted]
        self.reservoir = self.reservoir[wanted:]
        if len(incoming) < wanted:
            self.exhausted = True
        for pid in incoming:
            self._admit(pid)
        return self

    def _admit(self, person_id):
        profile = self.store.profiles[person_id]
        m_new = self.measure.affinity(self.antigen, profile)
        row = np.array([self._pair_affinity(person_id, other) for other in self.ids])
        n = self.pool_size
        grown = np.zeros((n + 1, n + 1))
        grown[:n, :n] = self.m_matrix
        grown[n, :n] = row
        grown[:n, n] = row
        self.m_matrix = grown
        self.ids.append(person_id)
        self.x = np.append(self.x, self.params.x_init)
        self.m_i = np.append(self.m_i, m_new)

    def dump_trajectory(self, fh):
        """Append one CSV row per live antibody: step,person_id,concentration."""
        for pid, xi in zip(self.ids, self.x):
            fh.write(f"{self.steps_taken},{pid},{float(xi)!r}\n")

    def run_to_convergence(self, trace=None):
        """Step + replace until stable, exhausted-and-quiet, or out of steps.

        trace, when given, is a writable text file receiving the per-step
        concentration trajectory (debugging aid; adds no behavior).
        """
        p = self.params
        if trace is not None:
            trace.write("step,person_id,concentration\n")
            self.dump_trajectory(trace)
        while True:
            if self.pool_size == 0 and not self.reservoir:
                self.stop_reason = STOP_EXHAUSTED
                return self
            if self.steps_since_deletion >= p.stable_window and self.calm_streak >= p.stable_window:
                self.stop_reason = STOP_STABLE
                return self
            if (self.exhausted and self.deletions > 0
                    and self.steps_since_deletion >= p.stable_window):
                # membership is final (reservoir dry) and deaths have quiesced
                self.stop_reason = STOP_EXHAUSTED
                return self
            if self.steps_taken >= p.max_steps:
                self.stop_reason = STOP_MAX_STEPS
                return self
            self.step()
            self.replace_dead()
            if trace is not None:
                self.dump_trajectory(trace)


def eligible_candidates(antigen: Profile, store: RatingsStore, measure: AffinityMeasure):
    """Persons sharing at least min_common movies with the antigen, canonical order."""
    antigen_movies = antigen.votes.keys()
    out = []
    for person_id in store.person_ids():
        if person_id == antigen.person_id:
            continue
        shared = len(antigen_movies & store.profiles[person_id].votes.keys())
        if shared >= measure.min_common:
            out.append(person_id)
    return out


def init_network(antigen: Profile, store: RatingsStore, measure: AffinityMeasure,
                 params: AisParams, pair_cache: dict | None = None) -> NetworkState:
    """Fill the pool with a seeded uniform draw of eligible candidates.

    pair_cache, when given, memoizes antibody-antibody affinities across
    networks built on the same store (keys are id pairs; antigen affinities
    are never cached).
    """
    eligible = eligible_candidates(antigen, store, measure)
    if not eligible:
        raise NoEligibleCandidates(
            f"nobody shares {measure.min_common}+ movies with antigen {antigen.person_id!r}")
    rng = np.random.default_rng(params.seed)
    order = rng.permutation(len(eligible))
    drawn = [eligible[i] for i in order]
    pool_ids = drawn[:params.pool_size]
    reservoir = drawn[params.pool_size:]
    exhausted = len(eligible) < params.pool_size
    state = NetworkState(
        antigen=antigen, store=store, measure=measure, params=params,
        ids=[], x=np.zeros(0), m_i=np.zeros(0), m_matrix=np.zeros((0, 0)),
        reservoir=reservoir, exhausted=exhausted, pair_cache=pair_cache,
    )
    n = len(pool_ids)
    m_i = np.array([measure.affinity(antigen, store.profiles[pid]) for pid in pool_ids])
    m_matrix = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            value = state._pair_affinity(pool_ids[i], pool_ids[j])
            m_matrix[i, j] = m_matrix[j, i] = value
    state.ids = pool_ids
    state.x = np.full(n, params.x_init, dtype=float)
    state.m_i = m_i
    state.m_matrix = m_matrix
    return state
