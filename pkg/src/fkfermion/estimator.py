"""Scikit-learn style front end for the FK fermionic observable.

``fit`` prepares the per-configuration data of a domain: every configuration
with its normalised weight (exact mode), or the visited configurations of an
Edwards-Sokal chain with their visit counts (Monte Carlo mode).  ``predict``
then maps rows of corner insertions to observable values without touching
the random-cluster measure again.
"""

from __future__ import annotations

from collections import Counter

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .configuration import FkConfig, extract_loops
from .engines import (CACHE_MAX_EDGES, EnumerationCapError, config_table, exact_distribution,
                      run_chain_bits)
from .lattice import build_domain
from .measures import ModelParams, params_from
from .observables import config_contribution


class FermionObservable(BaseEstimator):
    """Fermionic observable ``f(z1, .., z2n)`` on a ``width x height`` domain.

    Parameters
    ----------
    width, height : int
        Domain size in primal vertices.
    p : float or None
        Edge probability; ``None`` means the critical point.
    method : {"exact", "mc"}
        Enumerate every configuration or sample the Edwards-Sokal chain.
    n_sweeps, burn_in, seed :
        Monte Carlo settings (ignored in exact mode).
    """

    def __init__(self, width=3, height=3, p=None, method="exact", n_sweeps=100_000,
                 burn_in=1000, seed=0):
        self.width = width
        self.height = height
        self.p = p
        self.method = method
        self.n_sweeps = n_sweeps
        self.burn_in = burn_in
        self.seed = seed

    def _params(self) -> ModelParams:
        return params_from(critical=True) if self.p is None else params_from(p=self.p)

    def fit(self, X=None, y=None):
        domain = build_domain(self.width, self.height)
        params = self._params()
        if self.method == "exact":
            if domain.n_edges > CACHE_MAX_EDGES:
                raise EnumerationCapError("exact mode keeps every configuration in memory")
            probs = exact_distribution(domain, params)
            keep = np.nonzero(probs)[0]
            loops = config_table(domain).loops
            self.loops_ = [loops[b] for b in keep]
            self.weights_ = probs[keep]
        elif self.method == "mc":
            counts = Counter(run_chain_bits(domain, params, self.n_sweeps + self.burn_in,
                                            self.burn_in, self.seed))
            bits = sorted(counts)
            self.loops_ = [extract_loops(FkConfig(domain, b)) for b in bits]
            self.weights_ = np.array([counts[b] for b in bits], dtype=float) / self.n_sweeps
        else:
            raise ValueError(f"unknown method {self.method!r}")
        self.domain_ = domain
        self.params_ = params
        self.n_configs_ = len(self.loops_)
        return self

    def _row(self, row) -> tuple[int, ...]:
        out = []
        for item in row:
            if isinstance(item, str):
                out.append(self.domain_.parse_corner(item))
            else:
                out.append(self.domain_.check_corner(int(item)))
        if len(set(out)) != len(out):
            raise ValueError("insertion corners must be distinct")
        return tuple(out)

    def transform(self, X):
        """Per-configuration contributions, shape ``(n_rows, n_configs)``."""
        check_is_fitted(self, "loops_")
        rows = [self._row(r) for r in X]
        return np.array([[config_contribution(L, r) for L in self.loops_] for r in rows],
                        dtype=float).reshape(len(rows), self.n_configs_)

    def predict(self, X):
        """Observable value for every row of corners (ids or ``"x,y,Q"`` strings)."""
        return self.transform(X) @ self.weights_
