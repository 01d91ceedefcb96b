"""Smoke test for the swe_esdg extension module.

Build and install first:

    pip install --no-build-isolation -e crates/python
"""

import math

import numpy as np

import swe_esdg


def check_operators():
    for n in (1, 3, 7):
        x, w = swe_esdg.lgl(n)
        assert abs(sum(w) - 2.0) < 1e-13
        d = np.array(swe_esdg.derivative_matrix(n))
        # differentiates x^n exactly
        err = np.max(np.abs(d @ np.power(x, n) - n * np.power(x, n - 1)))
        assert err < 1e-11, err
        # SBP: W D + (W D)^T = diag(-1, 0, .., 0, 1)
        q = np.diag(w) @ d
        b = np.zeros((n + 1, n + 1))
        b[0, 0], b[-1, -1] = -1.0, 1.0
        assert np.max(np.abs(q + q.T - b)) < 1e-13


def check_fluxes():
    s = [1.2, 0.3, -0.1]
    f = swe_esdg.es_flux(s, s, 0.0, 0.0, 1.0, 0.0, g=9.81)
    u = s[1] / s[0]
    exact = [s[1], s[1] * u + 0.5 * 9.81 * s[0] ** 2, s[2] * u]
    assert max(abs(a - b) for a, b in zip(f, exact)) < 1e-12
    rng = np.random.default_rng(3)
    for _ in range(200):
        wm = [rng.uniform(0, 2), rng.normal(), rng.normal()]
        wp = [rng.uniform(0, 2), rng.normal(), rng.normal()]
        t = rng.uniform(0, 2 * math.pi)
        n = (math.cos(t), math.sin(t))
        full = swe_esdg.es_flux(wm, wp, 0.1, 0.1, *n)
        compact = swe_esdg.h_flux(wm, wp, 0.1, 0.1, *n)
        assert abs(full[0] - compact) <= 1e-12 * (1.0 + abs(full[0]))
    try:
        swe_esdg.es_flux(s, s, 0.0, 0.0, 1.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("non-unit normal accepted")


def check_counts():
    for n in (1, 4, 15):
        c = swe_esdg.count_ops(n, 10)
        assert c["evals_split"] == 2 * (n + 1) ** 3 * 10
        assert c["evals_standard"] == 2 * (n + 1) ** 2 * 10
    c = swe_esdg.count_ops(15, 1)
    ratio = c["flops_split"] / c["flops_standard"]
    assert 4.0 <= ratio <= 8.0, ratio


def check_runs():
    assert "wetdry_dambreak" in swe_esdg.scenarios()
    r = swe_esdg.run("lake_at_rest", kx=6, ky=6, t_final=0.05)
    assert abs(r["mass"] - r["mass0"]) <= 1e-12 * r["mass0"]
    r = swe_esdg.run("wetdry_dambreak", kx=12, ky=12, t_final=0.2)
    e = np.array(r["entropy_series"])
    assert r["min_h"] >= 0.0
    assert np.all(np.diff(e) <= 1e-10 * np.abs(e[:-1]))
    assert abs(r["mass"] - r["mass0"]) <= 1e-12 * r["mass0"]
    try:
        swe_esdg.run("wetdry_dambreak", kx=12, ky=12, t_final=0.2, limiter=False)
    except RuntimeError as err:
        assert "negative depth" in str(err)
    else:
        raise AssertionError("dam break without limiter did not abort")


if __name__ == "__main__":
    check_operators()
    check_fluxes()
    check_counts()
    check_runs()
    print("swe_esdg smoke test passed")
