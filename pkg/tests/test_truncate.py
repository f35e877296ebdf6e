import math

import numpy as np
import pytest

from polybeam.errors import DomainError, EmptyTruncationError
from polybeam.model import BeamAngles
from polybeam.series import TruncatedSeries, rate_series, series_partial
from polybeam.truncate import (SparsePolynomial, approximation_error, normalize_magnitudes,
                               threshold_select)

O = BeamAngles(0.0, 0.0)


@pytest.fixture
def derivs(channel, params, center):
    r = rate_series(channel, params, center, 20)
    return series_partial(r, "rx"), series_partial(r, "tx")


def three_terms():
    return TruncatedSeries.from_terms({(0, 0): 2.0, (1, 0): -1.0, (0, 1): 0.5}, 2, O)


def test_sparse_polynomial_canonical_form():
    p = SparsePolynomial.from_dict({(0, 1): 1.0, (1, 0): 2.0, (2, 0): 0.0})
    assert p.exponents == [(1, 0), (0, 1)]
    assert len(p) == 2
    with pytest.raises(DomainError):
        SparsePolynomial((((1, 0), 1.0), ((1, 0), 2.0)))
    with pytest.raises(DomainError):
        SparsePolynomial((((1, 0), math.nan),))


def test_sparse_polynomial_evaluation_and_partial():
    p = SparsePolynomial.from_dict({(2, 1): 3.0, (0, 0): -1.0})
    assert p(2.0, 0.5) == 3.0 * 4 * 0.5 - 1
    assert p.partial(0) == SparsePolynomial.from_dict({(1, 1): 6.0})
    assert p.swapped() == SparsePolynomial.from_dict({(1, 2): 3.0, (0, 0): -1.0})


def test_sparse_polynomial_csv_round_trip(tmp_path):
    p = SparsePolynomial.from_dict({(0, 0): 0.1, (3, 2): -1e-17, (1, 4): 7.25})
    p.to_csv(tmp_path / "p.csv")
    assert SparsePolynomial.from_csv(tmp_path / "p.csv") == p
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "deg_rx,deg_tx,coeff"


def test_normalize_examples():
    assert [m for _, m in normalize_magnitudes(three_terms())][:3] == [1.0, 0.5, 0.25]
    single = TruncatedSeries.from_terms({(1, 1): -3.0}, 2, O)
    assert [m for _, m in normalize_magnitudes(single) if m > 0] == [1.0]
    with pytest.raises(DomainError, match="nothing to normalize"):
        normalize_magnitudes(TruncatedSeries.zero(2, O))


def test_normalize_rate_derivative(derivs):
    mags = np.array([m for _, m in normalize_magnitudes(derivs[0])])
    assert mags.max() == 1.0
    assert np.all((mags >= 0) & (mags <= 1))
    # independent recomputation of the normalization
    c = np.array([abs(v) for _, v in derivs[0].items()])
    np.testing.assert_allclose(mags, c / c.max(), rtol=1e-15)


def test_threshold_examples():
    s = TruncatedSeries.from_terms({(0, 0): 1.0, (1, 0): 0.5, (0, 1): 0.3}, 1, O)
    assert threshold_select(s, 0.4).exponents == [(0, 0), (1, 0)]
    assert threshold_select(s, 0.5).exponents == [(0, 0)]   # strict inequality
    assert len(threshold_select(s, 0.0)) == 3


def test_threshold_errors():
    with pytest.raises(EmptyTruncationError, match="empty truncation"):
        threshold_select(three_terms(), 1.0)
    with pytest.raises(EmptyTruncationError):
        threshold_select(TruncatedSeries.zero(3, O), 0.2)
    with pytest.raises(DomainError):
        threshold_select(three_terms(), -0.1)


def test_threshold_drops_imaginary_residue():
    s = TruncatedSeries.from_terms({(0, 0): 1 + 1e-12j, (1, 0): 0.5}, 1, O)
    p = threshold_select(s, 0.0)
    assert p.coefficients.dtype == float
    assert p.terms[0] == ((0, 0), 1.0)


def test_threshold_monotone(derivs):
    prev = None
    for eps in np.linspace(0, 0.95, 20):
        p = threshold_select(derivs[0], eps)
        if prev is not None:
            assert set(p.exponents) <= set(prev.exponents)
            assert p.abs_sum() <= prev.abs_sum()
        prev = p


def test_full_selection_reproduces_series(derivs):
    s = derivs[1]
    p = threshold_select(s, 0.0)
    for d in [(0.01, -0.02), (0.03, 0.04), (-0.05, 0.0)]:
        assert abs(p(*d) - s.evaluate(*d).real) < 1e-10


def test_threshold_deterministic(derivs):
    assert threshold_select(derivs[0], 0.3) == threshold_select(derivs[0], 0.3)


def test_delta_examples():
    p1 = SparsePolynomial.from_dict({(0, 0): 1.5, (1, 0): -0.5})
    p2 = SparsePolynomial.from_dict({(0, 1): 3.0})
    assert approximation_error(p1, p2) == 0.2
    assert approximation_error(p1.scaled(2), p2.scaled(2)) == 0.1
    with pytest.raises(DomainError):
        approximation_error(SparsePolynomial(()), SparsePolynomial(()))


def test_delta_matches_independent_sum(derivs):
    p1, p2 = (threshold_select(s, 0.7) for s in derivs)
    total = 0.0
    for s in derivs:
        mags = [abs(c) for _, c in s.items()]
        peak = max(mags)
        total += sum(abs(c.real) for (_, c), m in zip(s.items(), mags) if m / peak > 0.7)
    assert abs(approximation_error(p1, p2) - 1 / total) < 1e-12
