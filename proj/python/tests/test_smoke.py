import math

import pytest

import copadapt


def test_copula_functions():
    assert copadapt.copula_cdf("clayton", 1.81, 1.0, 0.3) == pytest.approx(0.3)
    assert copadapt.kendall_tau("survclayton", 1.81) == pytest.approx(1.81 / 3.81)
    u, v = copadapt.copula_sample("frank", 5.0, 2000, seed=3)
    assert len(u) == len(v) == 2000
    assert all(0.0 < x < 1.0 for x in u)
    assert copadapt.copula_pdf("independence", 0.0, 0.2, 0.7) == pytest.approx(1.0)


def test_errors_are_value_errors():
    with pytest.raises(copadapt.CopadaptError):
        copadapt.copula_pdf("clayton", -1.0, 0.5, 0.5)
    with pytest.raises(ValueError):
        copadapt.copula_cdf("gumbel", 1.0, 0.5, 0.5)


def test_metrics():
    m = copadapt.classification_metrics(8, 2, 5, 85)
    assert round(m["fnr"], 3) == 0.2
    assert round(m["mcc"], 3) == 0.664
    assert round(m["f1"], 3) == 1.656
    assert m["miscoverage"] is None


def test_pipeline():
    hgb, offs = copadapt.simulate_control(200, seed=1)
    summary, prior_json = copadapt.fit_prior(hgb, offs, chain_length=3000, posterior_rows=100, seed=2)
    assert abs(summary["mu_hgb"][0] - 15.77) < 0.4
    assert "theta_cop" in summary
    ph, po = copadapt.prior_predictive(prior_json, draws=1000, seed=4)
    assert len(ph) == 1000
    region = copadapt.hpr(ph, po, alpha=0.05)
    assert sum(region["inside"]) == 950
    assert region["sample_miscoverage"] == 0.05
    assert math.isfinite(region["threshold"])


def test_cli(tmp_path):
    code, out, err = copadapt.run_cli(["simulate", "--n", "20", "--out", str(tmp_path)])
    assert code == 0, err
    assert (tmp_path / "readings.csv").read_text().startswith("athlete_id,occasion,hgb,offs\n")
    assert copadapt.run_cli(["simulate", "--bogus"])[0] == 2
    assert "MvtClayCop" in copadapt.frameworks()
