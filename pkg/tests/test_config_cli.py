import csv
import json

import numpy as np
import pytest

from triad_charts.cli import main
from triad_charts.config import DEFAULTS, RunConfig, load_config
from triad_charts.errors import ConfigError


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run(tmp_path, cmd, doc=None, *extra):
    cfg = write(tmp_path, doc or {})
    out = tmp_path / "out"
    rc = main([cmd, "--config", cfg, "--out", str(out), *extra])
    rep = out / (cmd.replace("-", "_") + ".json")
    return rc, (json.loads(rep.read_text()) if rep.exists() else None), out


def test_defaults_validate():
    cfg = RunConfig()
    assert cfg.masses.m2 == DEFAULTS["masses"]["m2"]
    assert len(cfg.hash) == 64
    assert RunConfig({}).hash == cfg.hash
    assert RunConfig({"seed": 1}).hash != cfg.hash


@pytest.mark.parametrize("doc,msg", [
    ({"masses": {"m2": 0.5}}, "m2 < sqrt(alpha_minus)/(2 chi) m1"),
    ({"domain": {"chi": 0.5}}, "chi > 1"),
    ({"domain": {"alpha_minus": 0.3}}, "alpha_minus < alpha_plus"),
    ({"mu": -1.0}, "mu must be positive"),
    ({"bogus": 1}, "unknown config key"),
    ({"integrate": {"scheme": "rk4"}}, "integrate.scheme"),
    ({"quadrature": {"cauchy_N": 5}}, "cauchy_N must be even"),
])
def test_invalid_configs(doc, msg):
    with pytest.raises(ConfigError, match=msg.replace("(", r"\(").replace(")", r"\)")):
        RunConfig(doc)


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    assert main(["torsion-scan", "--config", str(bad)]) == 2


def test_mass_bound_exit_code(tmp_path, capsys):
    rc, rep, _ = run(tmp_path, "verify-symplectic", {"masses": {"m2": 0.5}})
    assert rc == 2 and rep is None
    assert "m2 < sqrt(alpha_minus)/(2 chi) m1" in capsys.readouterr().err


def test_verify_symplectic_default(tmp_path):
    rc, rep, _ = run(tmp_path, "verify-symplectic")
    assert rc == 0
    assert rep["schema"] == 1 and rep["config_hash"] == RunConfig().hash
    for ch in ("jrd", "rps_pi", "p"):
        r = rep["results"][ch]
        assert r["points"] == 1000 and r["max_defect"] < 1e-6 and r["max_roundtrip"] < 1e-9


def test_verify_symplectic_flags(tmp_path):
    rc, rep, _ = run(tmp_path, "verify-symplectic", None, "--chart", "p", "--points", "50")
    assert rc == 0 and list(rep["results"]) == ["p", "diagnostics"]
    assert rep["results"]["p"]["points"] == 50
    rc, _, _ = run(tmp_path, "verify-symplectic", None, "--points", "0")
    assert rc == 2


def test_verify_symplectic_failure_exit(tmp_path):
    rc, rep, _ = run(tmp_path, "verify-symplectic", {"symplectic": {"tol": 1e-30, "points": 5}})
    assert rc == 1 and rep["passed"] is False


def test_report_config_roundtrips(tmp_path):
    doc = {"seed": 3, "torsion": {"n1": 10, "n2": 5}}
    rc, rep, _ = run(tmp_path, "torsion-scan", doc)
    assert rc == 0
    again = RunConfig(rep["config"])
    assert again.hash == rep["config_hash"]


def test_torsion_scan(tmp_path):
    rc, rep, out = run(tmp_path, "torsion-scan")
    assert rc == 0
    r = rep["results"]
    assert 0.13 < r["root_bracket"][0] < r["root_bracket"][1] < 0.15
    assert r["root_unique_in_01"] and r["p0"] == 12 and r["p1"] == -44
    assert r["certified"]
    rows = list(csv.DictReader(open(out / "torsion_scan.csv")))
    assert len(rows) == r["n_valid"]
    rc, rep, _ = run(tmp_path, "torsion-scan", None, "--t-range", "0.15", "0.2")
    assert rc == 0 and rep["results"]["t_range"] == [0.15, 0.2]
    assert rep["results"]["n_degenerate"] == 0
    # a range the domain grid never reaches certifies nothing
    rc, rep, _ = run(tmp_path, "torsion-scan", None, "--t-range", "0.5", "0.9")
    assert rc == 1 and rep["results"]["diagnostics"]["reason"] == "empty certified region"


def test_torsion_scan_bad_range(tmp_path):
    rc, rep, _ = run(tmp_path, "torsion-scan", None, "--t-range", "0.9", "0.5")
    assert rc == 1 and "error" in rep["results"]["diagnostics"]


def test_equilibrium(tmp_path):
    rc, rep, out = run(tmp_path, "equilibrium")
    assert rc == 0
    rows = rep["results"]["rows"]
    labels = {r.get("label") for r in rows}
    assert {"hyperbolic", "elliptic", "empty G_u"} <= labels
    hyp = [r for r in rows if r.get("label") == "hyperbolic"]
    assert hyp and all(r["omega"] > 0 and r["a_coeff"] > 0 and r["b_coeff"] < 0 for r in hyp)
    assert any(r.get("label") == "empty G_u" and r["case"] == "a" for r in rows)
    assert all(r["aligned_classification"] == "elliptic" for r in rows
               if "a_hat" in r and (r["G2"] >= 4 * r["G"] or r["aligned_admissible"]))
    assert all(r["a_hat_bound_holds"] for r in rows if "a_hat_bound_holds" in r)
    assert rep["results"]["whiskers"]["max_rel_error"] < 0.1
    assert (out / "heff_levels.csv").exists()


def test_secular_check_default(tmp_path):
    rc, rep, out = run(tmp_path, "secular-check", None, "--emit-coefficients")
    assert rc == 0
    assert all(c["passed"] for c in rep["results"]["checks"].values())
    rows = list(csv.reader(open(out / "dalembert_coefficients.csv")))
    assert rows[0] == ["a1", "a2", "a3", "a1s", "a2s", "a3s", "re", "im"]
    assert len(rows) > 100


def test_secular_large_alpha(tmp_path):
    # at alpha = 0.3 only the documented O(alpha^3) remainder bound applies
    from triad_charts.cli import REMAINDER_BOUND, secular_identities
    r = secular_identities(RunConfig(), 0.3, 8, np.random.default_rng(0))
    assert r["remainder_over_bound"] < 1
    assert r["remainder_over_alpha3"] > 1e-3
    assert REMAINDER_BOUND == 4.0
    rc, _, _ = run(tmp_path, "secular-check", None, "--alpha", "1.5")
    assert rc == 2


def test_integrate(tmp_path):
    T = 20 * 2 * np.pi
    rc, rep, out = run(tmp_path, "integrate", {"mu": 1e-4}, "--T", str(T))
    assert rc == 0, rep["results"]
    r = rep["results"]
    assert r["energy_drift"] < 1e-9 and r["C_drift"] < 1e-9
    assert r["cyclic_jrd"]["G_drift"] < 1e-8 and r["cyclic_p"]["Z_drift"] < 1e-8
    rows = list(csv.reader(open(out / "trajectory.csv")))
    assert len(rows[0]) == 17 and len(rows) == r["samples"] + 1


def test_integrate_bad_point(tmp_path):
    rc, _, _ = run(tmp_path, "integrate", {"integrate": {"point": [1, 2, 3]}})
    assert rc == 2
