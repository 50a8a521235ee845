"""Estimator-style facade: fit a network for one user, predict and recommend.

Follows the scikit-learn parameter protocol (get_params/set_params, fitted
attributes with trailing underscores, fit returns self) without depending on
scikit-learn itself; the inputs are sparse vote profiles, not feature
matrices, so only the protocol is borrowed.
"""

from __future__ import annotations

import inspect

import numpy as np

from .affinity import AffinityMeasure
from .data import Profile, RatingsStore
from .errors import NoSupport, NotFitted
from .network import AisParams, init_network
from .recommend import predict, recommend_top_n


class ImmuneRecommender:
    """Collaborative filtering through an idiotypic antibody network.

    fit() builds and converges the network for one target user (the
    antigen); predict()/recommend() read concentration-weighted votes off
    the surviving pool.
    """

    def __init__(self, measure="kappa", min_common=2, pool_size=100,
                 k1=1.0, k2=0.5, k3=0.1, dt=0.1, antigen_concentration=1.0,
                 x_init=1.0, x_death=0.05, x_max=10.0,
                 max_steps=1000, stable_window=50, stable_tol=1e-3, seed=0):
        self.measure = measure
        self.min_common = min_common
        self.pool_size = pool_size
        self.k1 = k1
        self.k2 = k2
        self.k3 = k3
        self.dt = dt
        self.antigen_concentration = antigen_concentration
        self.x_init = x_init
        self.x_death = x_death
        self.x_max = x_max
        self.max_steps = max_steps
        self.stable_window = stable_window
        self.stable_tol = stable_tol
        self.seed = seed

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [name for name in sig.parameters if name != "self"]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(f"invalid parameter {name!r} for ImmuneRecommender")
            setattr(self, name, value)
        return self

    def _measure(self) -> AffinityMeasure:
        return AffinityMeasure(kind=self.measure, min_common=self.min_common)

    def _ais_params(self) -> AisParams:
        return AisParams(
            pool_size=self.pool_size, k1=self.k1, k2=self.k2, k3=self.k3,
            dt=self.dt, antigen_concentration=self.antigen_concentration,
            x_init=self.x_init, x_death=self.x_death, x_max=self.x_max,
            max_steps=self.max_steps, stable_window=self.stable_window,
            stable_tol=self.stable_tol, seed=self.seed,
        )

    def fit(self, store: RatingsStore, antigen, trace=None) -> "ImmuneRecommender":
        """Build and converge the network. antigen is a Profile or a person id.

        trace optionally receives the per-step concentration CSV (debug aid).
        """
        if not isinstance(store, RatingsStore):
            raise TypeError(f"store must be a RatingsStore, got {type(store).__name__}")
        if not isinstance(antigen, Profile):
            if antigen not in store.profiles:
                raise KeyError(f"unknown person {antigen!r}")
            antigen = store.profiles[antigen]
        state = init_network(antigen, store, self._measure(), self._ais_params())
        state.run_to_convergence(trace=trace)
        self.network_ = state
        self.pool_ids_ = list(state.ids)
        self.concentrations_ = state.x.copy()
        self.stop_reason_ = state.stop_reason
        self.n_steps_ = state.steps_taken
        return self

    def _check_fitted(self):
        if not hasattr(self, "network_"):
            raise NotFitted("call fit() before predicting")

    def predict_one(self, movie_id):
        """Prediction for one movie; raises NoSupport when nobody voted it."""
        self._check_fitted()
        return predict(self.network_, movie_id)

    def predict(self, movie_ids):
        """Array of predicted scores; NaN where the pool has no support."""
        self._check_fitted()
        out = np.empty(len(movie_ids))
        for i, movie_id in enumerate(movie_ids):
            try:
                out[i] = predict(self.network_, movie_id).score
            except NoSupport:
                out[i] = np.nan
        return out

    def recommend(self, n=10, exclude_seen=True):
        self._check_fitted()
        return recommend_top_n(self.network_, n, exclude_seen=exclude_seen)

    def antibodies(self):
        """Surviving pool as (person_id, concentration, affinity) snapshots."""
        self._check_fitted()
        return self.network_.antibodies()
