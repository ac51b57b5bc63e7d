import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fbmbound.bounds import (
    H_CLAMP,
    BoundInputs,
    clamp_hurst,
    concentration_term,
    full_bound,
    rademacher_bound,
)
from fbmbound.errors import DomainError


def sig6(x):
    return float(f"{x:.6g}")


positive = st.floats(1e-3, 1e3)
hursts = st.floats(0.01, 0.99)


class TestRademacherBound:
    def test_reference_value(self):
        assert sig6(rademacher_bound(10, 100, 0.5)) == 1.99813
        assert rademacher_bound(10, 100, 0.5) == pytest.approx(1.2 * math.sqrt(2 * math.log(4)), rel=1e-15)

    def test_inverse_in_m(self):
        assert rademacher_bound(10, 200, 0.5) == pytest.approx(rademacher_bound(10, 100, 0.5) / 2, rel=1e-15)

    def test_sqrt_hurst_scaling(self):
        near_one = rademacher_bound(10, 100, 1 - 1e-12)
        assert rademacher_bound(10, 100, 0.25) / near_one == pytest.approx(2.0, rel=1e-9)

    @pytest.mark.parametrize("h", [0.0, 1.0, 1.2, -0.1])
    def test_hurst_out_of_range(self, h):
        with pytest.raises(DomainError):
            rademacher_bound(10, 100, h)

    def test_zero_diameter(self):
        assert rademacher_bound(0.0, 100, 0.5) == 0.0

    @given(d=positive, m=st.integers(1, 10**6), h=hursts)
    def test_closed_form(self, d, m, h):
        assert rademacher_bound(d, m, h) == pytest.approx(12 * d / m * np.sqrt(np.log(4) / h), rel=1e-12)


class TestFullBound:
    def test_reference_total(self):
        rep = full_bound(BoundInputs(10, 100, 0.5, zeta=1, beta=0, tau=0.05, empirical_risk=0))
        assert sig6(rep.rademacher_term) == 3.99626
        assert sig6(rep.concentration_term) == 0.122387
        assert sig6(rep.total) == 4.11865
        assert rep.total == rep.rademacher_term + rep.concentration_term

    def test_concentration_vanishes_as_tau_to_one(self):
        assert concentration_term(1.0, 0.0, 100, 1 - 1e-12) < 1e-6

    def test_zeta_homogeneity(self):
        a = full_bound(BoundInputs(10, 100, 0.5, zeta=1.0))
        b = full_bound(BoundInputs(10, 100, 0.5, zeta=2.0))
        assert b.total == pytest.approx(2 * a.total, rel=1e-14)

    @given(d=positive, m=st.integers(1, 10**5), h=hursts, z=positive, b=st.floats(0, 10),
           tau=st.floats(1e-6, 0.999), r=st.floats(0, 10))
    def test_composition(self, d, m, h, z, b, tau, r):
        rep = full_bound(BoundInputs(d, m, h, z, b, tau, r))
        assert rep.rademacher_term == pytest.approx(2 * z * rademacher_bound(d, m, h), rel=1e-15)
        assert rep.total == pytest.approx(r + rep.rademacher_term + rep.concentration_term, rel=1e-14)
        assert min(rep.rademacher_complexity, rep.rademacher_term, rep.concentration_term) >= 0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(diam=-1, m=10, h=0.5),
            dict(diam=1, m=0, h=0.5),
            dict(diam=1, m=2.5, h=0.5),
            dict(diam=1, m=10, h=1.0),
            dict(diam=1, m=10, h=0.5, zeta=0.0),
            dict(diam=1, m=10, h=0.5, beta=-1),
            dict(diam=1, m=10, h=0.5, tau=0.0),
            dict(diam=1, m=10, h=0.5, tau=1.0),
            dict(diam=float("inf"), m=10, h=0.5),
            dict(diam=1, m=10, h=0.5, empirical_risk=-0.1),
        ],
    )
    def test_invalid_inputs(self, kwargs):
        with pytest.raises(DomainError):
            BoundInputs(**kwargs)


class TestClamp:
    def test_passthrough(self):
        assert clamp_hurst(0.7) == (0.7, False)

    @pytest.mark.parametrize("raw", [1.0, 1.07, 1.2])
    def test_above_one(self, raw):
        with pytest.warns(UserWarning):
            assert clamp_hurst(raw) == (H_CLAMP, True)

    def test_non_positive(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            h, clamped = clamp_hurst(-0.1)
        assert 0 < h < 1 and clamped

    def test_nan(self):
        with pytest.raises(DomainError):
            clamp_hurst(float("nan"))


def test_monotonicity_lattice():
    hs = np.linspace(0.1, 0.95, 6)
    diams = np.geomspace(0.1, 100, 6)
    ms = [1, 10, 50, 200, 1000, 5000]
    zetas = np.geomspace(0.1, 10, 6)
    betas = [0.0, 1e-4, 1e-3, 0.01, 0.1, 1.0]
    taus = np.linspace(0.01, 0.9, 6)

    grid = list(itertools.product(range(6), repeat=6))
    vals = np.empty((6,) * 6)
    rad = np.empty((6,) * 6)
    for idx in grid:
        i, j, k, l, n, o = idx
        rep = full_bound(BoundInputs(diams[j], ms[k], hs[i], zetas[l], betas[n], taus[o]))
        vals[idx] = rep.total
        rad[idx] = rep.rademacher_term
    assert np.all(np.diff(vals, axis=0) < 0)  # H
    assert np.all(np.diff(vals, axis=1) > 0)  # diam
    assert np.all(np.diff(rad, axis=2) < 0)   # m
    assert np.all(np.diff(vals, axis=3) > 0)  # zeta
    assert np.all(np.diff(vals, axis=4) > 0)  # beta
    assert np.all(np.diff(vals, axis=5) < 0)  # tau
