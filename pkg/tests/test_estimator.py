import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from fkfermion.engines import EnumerationCapError
from fkfermion.estimator import FermionObservable
from fkfermion.lattice import build_domain
from fkfermion.measures import ModelParams
from fkfermion.observables import fermion_exact


def test_predict_matches_fermion_exact():
    d = build_domain(3, 3)
    rows = [("0,0,NE", "2,2,SW"), ("0,0,NE", "1,0,NE", "2,0,NE", "0,1,NE")]
    est = FermionObservable(3, 3, p=0.4).fit()
    got = est.predict(rows)
    for row, value in zip(rows, got):
        ins = [d.parse_corner(c) for c in row]
        assert value == pytest.approx(fermion_exact(d, ModelParams.from_p(0.4), ins).real,
                                      abs=1e-13)


def test_transform_shape_and_ids():
    est = FermionObservable(2, 2).fit()
    t = est.transform([[0, 14], ["0,0,NE", "1,1,SW"]])
    assert t.shape == (2, est.n_configs_)
    assert np.array_equal(t[0], t[1])
    assert set(np.unique(t)) <= {-1.0, 0.0, 1.0}


def test_sklearn_conventions():
    est = FermionObservable(width=2, height=2, p=0.3)
    assert clone(est).get_params() == est.get_params()
    with pytest.raises(NotFittedError):
        est.predict([[0, 14]])
    with pytest.raises(ValueError):
        FermionObservable(2, 2, method="bogus").fit()
    with pytest.raises(EnumerationCapError):
        FermionObservable(4, 4).fit()


def test_monte_carlo_mode():
    exact = FermionObservable(2, 2).fit().predict([[0, 14]])[0]
    mc = FermionObservable(2, 2, method="mc", n_sweeps=20_000, seed=1).fit()
    assert mc.weights_.sum() == pytest.approx(1.0)
    assert abs(mc.predict([[0, 14]])[0] - exact) < 0.05
