import csv
import math

import pytest

import jitvar


def test_seeds():
    assert jitvar.mix(7, 1, 0) == 0x3F7023CE48685D62
    assert jitvar.derive_seed(7, "W", 3, False) == jitvar.derive_seed(7, "W", 9, False)
    assert jitvar.derive_seed(7, "W", 3, True) != jitvar.derive_seed(7, "W", 9, True)
    assert jitvar.settings()[:2] == ["N", "A"]
    with pytest.raises(ValueError):
        jitvar.derive_seed(7, "G", 0, True)


def test_metrics_and_stats():
    assert jitvar.auc([0.9, 0.4, 0.6, 0.4], [1, 1, 0, 0]) == 0.625
    assert jitvar.std_dev([0.8, 0.82, 0.81]) == pytest.approx(0.01)
    lev = jitvar.levene([1, 2, 3], [4, 5, 6])
    assert lev["statistic"] == 0.0 and lev["p_value"] == 1.0
    assert jitvar.mann_whitney_u([1, 2], [3, 4])["p_value"] == pytest.approx(1 / 3)
    assert jitvar.reg_inc_beta(0.5, 2, 3) == pytest.approx(0.6875)
    assert abs(jitvar.std_normal_cdf(1.96) - 0.9750021048517795) < 1e-12
    with pytest.raises(ValueError):
        jitvar.auc([0.1, 0.2], [1, 1])


def test_synthetic_counts():
    rows = jitvar.generate_synthetic("openstack-like", 2000)
    assert len(rows) == 2000
    assert sum(r["label"] for r in rows) == 260
    assert rows == jitvar.generate_synthetic("openstack-like", 2000)


def test_small_experiment_and_report(tmp_path):
    exp = tmp_path / "exp"
    recs = jitvar.run_experiment(exp, settings="N,W", runs=2, n_commits=300, epochs=1)
    assert len(recs) == 4
    assert all(r["status"] == "ok" for r in recs)
    n = [r["auc"] for r in recs if r["setting"] == "N"]
    assert n[0] == n[1]
    written = jitvar.write_report(exp)
    assert "variance.csv" in written
    with open(exp / "variance.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0]["setting"] == "N"
    assert rows[0]["auc_stddev_pct"] == "0.00"
    assert math.isfinite(float(rows[1]["auc_maxdiff_pct"]))


def test_cli_exit_codes(tmp_path):
    code, out, _ = jitvar.cli(["gen-data", "--n", "50", "--out", str(tmp_path / "d.jsonl")])
    assert code == 0 and "50 commits" in out
    assert jitvar.cli(["frobnicate"])[0] == 1
