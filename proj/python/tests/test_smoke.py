import math

import numpy as np
import pytest

import qpkdv

FORCED = {"text": "z0^2*z3 + 40*cos(phi_1)*sin(x)", "form": "raw_f"}


def small(**extra):
    cfg = {
        "nonlinearity": FORCED,
        "epsilon": 1e-3,
        "lambda": 1.25,
        "truncation": {"n_phi": 4, "n_x": 4},
        "kam": {"gamma": 1e-2, "target_decay": 1e-14},
        "dynamics": {"T": 5, "dt": 0.01},
    }
    cfg.update(extra)
    return cfg


def test_builtins_and_structure():
    names = qpkdv.builtin_names()
    assert "quasilinear_cubic" in names
    info = qpkdv.nonlinearity_info("z0^2*z3")
    assert info["reversible"]
    assert info["df"][3] == info["df"][3].strip()
    assert not qpkdv.nonlinearity_info("2.5")["reversible"]
    with pytest.raises(qpkdv.ParseError):
        qpkdv.nonlinearity_info("z0^^2")


def test_config_defaults_and_errors():
    cfg, warnings = qpkdv.parse_config({})
    assert cfg["truncation"]["n_phi"] == 8
    assert warnings == []
    with pytest.raises(qpkdv.ConfigError, match="kam.taux"):
        qpkdv.parse_config({"kam": {"taux": 1}})
    with pytest.raises(ValueError):
        qpkdv.run("bogus", {})


def test_solve_returns_converged_field():
    r = qpkdv.run("solve", small())
    assert r.ok
    run = r.report["runs"][0]
    assert run["converged"]
    assert run["iterates"][-1]["residual"] < 1e-10
    assert r.trace[-1]["residual"] < 1e-10

    u = r.fields["u_000"]
    coeffs = qpkdv.field_array(u)
    assert coeffs.shape == (9, 9)
    # Real field: c_{-l,-j} = conj c_{l,j}.
    assert np.max(np.abs(coeffs - np.conj(coeffs[::-1, ::-1]))) < 1e-14

    samples = qpkdv.field_samples(u)
    m_phi, m_x = samples.shape
    phi, x = 2 * math.pi * 1 / m_phi, 2 * math.pi * 3 / m_x
    l = np.arange(-4, 5)[:, None]
    j = np.arange(-4, 5)[None, :]
    direct = np.sum(coeffs * np.exp(1j * (l * phi + j * x))).real
    assert abs(samples[1, 3] - direct) < 1e-12


def test_resonant_lambda_is_excluded():
    r = qpkdv.run("solve", small(**{"lambda": [1.0, 1.25]}))
    assert r.exit_code == 2
    assert r.report["runs"][0]["excluded_lambda"]


def test_reduce_and_stability():
    red = qpkdv.run("reduce", small())
    assert red.ok
    assert red.report["runs"][0]["eigenvalue_report"]["max_re"] < 1e-10

    st = qpkdv.run("stability", small(seed=3))
    s = st.report["runs"][0]["stability"]
    assert s["v_drift"] < 1e-8
    assert s["endpoint_discrepancy"] < 1e-4
    assert len(st.trace) == 6


def test_verify_checks_pass():
    r = qpkdv.run("verify", small())
    assert r.ok
    assert len(r.checks) >= 12
    assert all(c.passed for c in r.checks), [c for c in r.checks if not c.passed]
