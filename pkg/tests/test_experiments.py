import numpy as np
import pytest

from gsca.experiments import (
    TABLE_FAMILIES, best_row, build_penalty, family_label,
    full_information_row, make_benchmark_data, snr_sweep, sweep_lambda,
    table2_experiment,
)

TINY = dict(I=12, J1=6, J2=8, R=2)


class TestPenaltyBuilders:
    def test_known_families_and_defaults(self):
        assert build_penalty("nuclear", 2.0).family == "nuclear"
        assert build_penalty("lq", 2.0).hyper == 0.1
        assert build_penalty("lq", 2.0, 0.5).hyper == 0.5
        assert build_penalty("scad", 2.0).hyper == 5.0
        assert build_penalty("gdp", 2.0).hyper == 1.0

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            build_penalty("ridge", 1.0)

    def test_labels(self):
        assert family_label("nuclear", None) == "L1"
        assert family_label("lq", 0.1) == "L0.1"
        assert family_label("scad", 5.0) == "SCAD(5)"
        assert family_label("gdp", 1.0) == "GDP(1)"
        assert family_label("gdp", 7.0) == "gdp(7.0)"


class TestBenchmarkData:
    def test_shapes_and_determinism(self):
        data, truth = make_benchmark_data(5, **TINY)
        assert data.X1.shape == (12, data.J1) and data.J1 <= 6
        assert data.X2.shape == (12, 8)
        assert truth.Theta1.shape[1] == data.J1  # truth subset to kept columns
        data2, _ = make_benchmark_data(5, **TINY)
        assert np.array_equal(data.X1, data2.X1)
        assert np.array_equal(data.X2, data2.X2)


@pytest.fixture(scope="module")
def tiny():
    return make_benchmark_data(5, **TINY)


class TestSweepLambda:
    def test_rows_and_best(self, tiny):
        data, truth = tiny
        rows = sweep_lambda(data, truth, "gdp", 1.0, n_lambda=4,
                            lambda_max=60.0, lambda_min=5.0)
        assert len(rows) == 4
        lams = [r["lambda"] for r in rows]
        assert lams == sorted(lams, reverse=True)
        assert lams[0] == pytest.approx(60.0) and lams[-1] == pytest.approx(5.0)
        for key in ("label", "family", "hyper", "lambda", "rmse_theta",
                    "rmse_z", "rank", "sigma2_hat", "iterations", "converged",
                    "saturated", "singular_values"):
            assert key in rows[0], key
        best = best_row(rows)
        assert best["rmse_theta"] == min(r["rmse_theta"] for r in rows
                                         if not r["saturated"])

    def test_best_row_skips_saturated_points(self):
        rows = [{"rmse_theta": 0.5, "saturated": False},
                {"rmse_theta": 0.1, "saturated": True},
                {"rmse_theta": 0.3, "saturated": False}]
        assert best_row(rows)["rmse_theta"] == 0.3
        # all saturated: degenerate path, fall back to the raw minimum
        for r in rows:
            r["saturated"] = True
        assert best_row(rows)["rmse_theta"] == 0.1

    def test_full_information_row(self, tiny):
        data, truth = tiny
        row = full_information_row(data, truth, 5, truth.params.R)
        assert row["label"] == "full information"
        assert row["iterations"] == 0
        assert row["rank"] == truth.params.R
        assert row["rmse_theta"] > 0


def test_table2_experiment_tiny():
    res = table2_experiment(5, n_lambda=3, **TINY)
    assert set(res["best"]) == set(TABLE_FAMILIES) | {"full_information"}
    for key in TABLE_FAMILIES:
        assert len(res["paths"][key]) == 3
        assert res["best"][key]["rmse_theta"] > 0
    assert res["true_singular_values"].shape == (12,)
    assert np.all(np.diff(res["true_singular_values"]) <= 0)


def test_snr_sweep_tiny():
    rows = snr_sweep(5, [0.5, 2.0], families=(("gdp", 1.0),), n_lambda=3,
                     include_baseline=False, **TINY)
    assert [r["snr"] for r in rows] == [0.5, 2.0]
    assert all(r["family"] == "gdp" for r in rows)
