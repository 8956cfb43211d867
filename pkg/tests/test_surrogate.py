import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optsdd.basis import OrthonormalBasis
from optsdd.bspline import make_open_uniform
from optsdd.dataset import Dataset
from optsdd.distributions import InputSpec, Marginal, sample
from optsdd.errors import DataError
from optsdd.regression import FitConfig
from optsdd.surrogate import (SddModel, design_matrix, failure_fraction, fit_sdd, mean_abs_error, metrics,
                              r2_score, rel_variance_error)

U = Marginal.uniform(-3.0, 3.0)
SPEC1 = InputSpec([U])
SLS = FitConfig(method="sls")


def constant_model(value, n=9):
    basis = OrthonormalBasis.build([make_open_uniform(-3, 3, 1, n - 1)], [U], 1)
    c = np.zeros(n)
    c[0] = value
    return SddModel(SPEC1, basis, c)


def linear_fit():
    x = sample(SPEC1, 45, "lhs", seed=0)
    return fit_sdd(Dataset(x, x[:, 0]), SPEC1, S=1, p=1, I=8, knot_mode="uniform", fit=SLS)


def test_constant_model():
    m = constant_model(7.0)
    np.testing.assert_allclose(m.predict(np.linspace(-3, 3, 11)[:, None]), 7.0, atol=1e-13)
    assert m.mean() == 7.0 and m.variance() == 0.0
    y, pos = m.resample_cdf(100, seed=0)
    np.testing.assert_allclose(y, 7.0, atol=1e-13)
    np.testing.assert_allclose(pos, np.arange(1, 101) / 100)
    assert m.pfail(5.0, L=1000)[0] == 1.0
    assert m.pfail(8.0, L=1000)[0] == 0.0


def test_mean_and_variance_formulas():
    basis = OrthonormalBasis.build([make_open_uniform(-3, 3, 1, 2)], [U], 1)
    m = SddModel(SPEC1, basis, [2.0, 3.0, 4.0])
    assert m.mean() == 2.0 and m.variance() == 25.0


def test_coefficient_length_checked():
    basis = OrthonormalBasis.build([make_open_uniform(-3, 3, 1, 2)], [U], 1)
    with pytest.raises(ValueError):
        SddModel(SPEC1, basis, [1.0, 2.0])


def test_linear_function_reproduced():
    m = linear_fit()
    assert len(m.coef) == 9
    x = np.random.default_rng(1).uniform(-3, 3, (100, 1))
    assert np.max(np.abs(m.predict(x) - x[:, 0])) < 1e-6
    assert abs(m.mean()) < 1e-6
    assert m.variance() == pytest.approx(3.0, abs=1e-4)


def test_constant_function_mean():
    x = sample(SPEC1, 45, "lhs", seed=2)
    m = fit_sdd(Dataset(x, np.full(45, 5.0)), SPEC1, p=1, I=8, knot_mode="uniform", fit=SLS)
    assert m.mean() == pytest.approx(5.0, abs=1e-10)


def test_interpolation_regime():
    x = sample(SPEC1, 9, "lhs", seed=3)
    y = np.sin(x[:, 0])
    m = fit_sdd(Dataset(x, y), SPEC1, p=1, I=8, knot_mode="uniform", fit=SLS)
    np.testing.assert_allclose(m.predict(x), y, rtol=1e-6)


def test_predict_outside_support():
    with pytest.raises(DataError):
        linear_fit().predict([[3.1]])


def test_design_matrix_first_column():
    x = sample(SPEC1, 45, "lhs", seed=0)
    m = linear_fit()
    A = design_matrix(Dataset(x, x[:, 0]), m.basis)
    np.testing.assert_array_equal(A[:, 0], 1.0)
    np.testing.assert_allclose(design_matrix(Dataset(x[:1], [0.0]), m.basis)[0], A[0], rtol=1e-14, atol=1e-15)


def test_design_columns_have_zero_mean():
    basis = OrthonormalBasis.build([make_open_uniform(-3, 3, 1, 8)], [U], 1)
    x = sample(SPEC1, 100_000, "mcs", seed=4)
    A = design_matrix(Dataset(x, np.zeros(x.shape[0])), basis)
    se = A[:, 1:].std(axis=0) / np.sqrt(x.shape[0])
    assert np.all(np.abs(A[:, 1:].mean(axis=0)) <= 3 * se)


def test_save_load_bit_identical(tmp_path):
    spec = InputSpec([U, Marginal.truncated_gaussian(0, 1, -3, 3)])
    x = sample(spec, 200, "lhs", seed=5)
    y = np.exp(0.3 * x[:, 0]) * np.cos(x[:, 1])
    m = fit_sdd(Dataset(x, y), spec, S=2, p=[1, 2], I=[4, 3], knot_mode="optimal")
    path = tmp_path / "m.json"
    m.save(path)
    back = SddModel.load(path)
    pts = sample(spec, 100, "mcs", seed=6)
    assert back.predict(pts).tobytes() == m.predict(pts).tobytes()
    assert back.meta == m.meta
    assert back.coefficient_table() == m.coefficient_table()


def test_load_rejects_foreign_file():
    with pytest.raises(ValueError):
        SddModel.from_dict({"format": "other"})


def test_coefficient_table():
    m = constant_model(7.0, n=3)
    assert m.coefficient_table() == "1\t7.0\n2\t0.0\n3\t0.0\n"


@settings(max_examples=30, deadline=None)
@given(st.floats(-4, 4), st.floats(0, 2))
def test_pfail_monotone_in_threshold(t, dt):
    m = linear_fit()
    p1, _ = m.pfail(t, L=2000, seed=0)
    p2, _ = m.pfail(t + dt, L=2000, seed=0)
    assert p2 <= p1


def test_pfail_senses_and_se():
    y = np.array([1.0, 2.0, 3.0, 4.0])
    assert failure_fraction(y, 2.5, "exceed") == (0.5, pytest.approx(0.25))
    assert failure_fraction(y, 2.5, "fall-below")[0] == 0.5
    with pytest.raises(ValueError):
        failure_fraction(y, 2.5, "above")


def test_pfail_above_global_max():
    m = linear_fit()
    assert m.pfail(3.5, L=10_000)[0] == 0.0


def test_resampled_moments_match_coefficients():
    spec = InputSpec([U, U])
    x = sample(spec, 300, "lhs", seed=7)
    y = x[:, 0] ** 2 + np.sin(x[:, 1]) + 0.5 * x[:, 0] * x[:, 1]
    m = fit_sdd(Dataset(x, y), spec, S=2, p=2, I=4, knot_mode="uniform", fit=SLS)
    r = m.resample(1_000_000, seed=8)
    var = m.variance()
    assert abs(r.mean() - m.mean()) < 3 * np.sqrt(var / r.size)
    assert r.var() == pytest.approx(var, rel=0.01)


def test_resample_deterministic():
    m = linear_fit()
    assert m.resample(500, seed=3).tobytes() == m.resample(500, seed=3).tobytes()


def test_metrics_examples():
    assert r2_score([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0
    assert rel_variance_error(1.316, 1.316) == 0.0
    assert rel_variance_error(1.354, 1.316) == pytest.approx(2.888, abs=5e-4)
    assert mean_abs_error([1.0, 2.0], [1.5, 1.0]) == 0.75
    with pytest.raises(ValueError):
        r2_score([1.0, 1.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        mean_abs_error([1.0], [1.0, 2.0])


def test_metrics_on_holdout():
    m = linear_fit()
    x = sample(SPEC1, 200, "mcs", seed=9)
    out = metrics(m, Dataset(x, x[:, 0]))
    assert out["r2"] == pytest.approx(1.0, abs=1e-10)
    assert out["mean_abs_error"] < 1e-6
    assert out["rel_std_error"] < 10.0


def test_fit_meta():
    m = linear_fit()
    assert m.meta["method"] == "sls" and m.meta["training_size"] == 45 and m.meta["knot_mode"] == "uniform"


def test_fit_rejects_out_of_support_data():
    x = np.array([[0.0], [4.0], [1.0]])
    with pytest.raises(DataError, match="rows 2"):
        fit_sdd(Dataset(x, x[:, 0]), SPEC1, p=1, I=1, knot_mode="uniform", fit=SLS)
