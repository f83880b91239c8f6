"""
Golden reference values produced by the independent oracles.

Every entry stores ``value``, ``tol`` (the reproduction tolerance) and a
``provenance`` tag naming the oracle and its settings.  The file is only
rewritten through ``multitime goldens --regenerate``.
"""

import json

import numpy as np

from multitime.charfunc import ordered_moments, principal_axes, quadratic_form
from multitime.fock import fock_commutator, fock_moments
from multitime.magnus import ModelParams
from multitime.propagator import ode_trajectory

MISMATCH_RATIO = 3.18
ORACLE_TOL = 1e-13


def _entry(value, tol, provenance):
    if isinstance(value, complex):
        value = [value.real, value.imag]
    return {"value": value, "tol": tol, "provenance": provenance}


def generate():
    params = ModelParams(1.0, MISMATCH_RATIO)
    out = {}
    taus = [0.2, 0.4, 0.5, 0.6, 0.8]
    props = ode_trajectory(params, taus, ORACLE_TOL)
    for t, p in zip(taus, props):
        out[f"oracle_u11_r3.18_tau{t}"] = _entry(p.u11, 1e-11, f"ode_oracle tol={ORACLE_TOL}")
        out[f"oracle_u12_r3.18_tau{t}"] = _entry(p.u12, 1e-11, f"ode_oracle tol={ORACLE_TOL}")
    for t, p in zip(taus, props):
        lm = principal_axes(quadratic_form(ordered_moments([p]))).lambda_max
        out[f"oracle_lambda_max_r3.18_tau{t}"] = _entry(lm, 1e-10, f"ode_oracle tol={ORACLE_TOL}")

    two = ode_trajectory(params, [0.4, 0.7], ORACLE_TOL)
    lm2 = principal_axes(quadratic_form(ordered_moments(two))).lambda_max
    out["oracle_det2_top_axis_r3.18_tau0.4_0.7"] = _entry(
        1.0 - float(np.exp(lm2)), 1e-9, f"ode_oracle tol={ORACLE_TOL}, unit displacement on top axis"
    )

    m = fock_moments(ModelParams(1.0, 0.0), [0.3, 0.3], dim=100)
    sup = float(np.exp(max(principal_axes(quadratic_form(m)).lambda_max, 0.0)))
    out["fock_twotime_sup_r0_diag_tau0.3"] = _entry(sup, 1e-6, "fock_oracle dim=100 n_substeps=20000")

    comm = fock_commutator(params, 0.3, 0.5, dim=200)
    out["fock_commutator_r3.18_tau0.3_dtau0.2"] = _entry(comm, 1e-6, "fock_oracle dim=200 n_substeps=20000")
    return out


def save(data, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def verify(stored):
    """Regenerate and compare; returns a list of ``(name, message)`` failures."""
    fresh = generate()
    failures = []
    for name, entry in stored.items():
        if name not in fresh:
            failures.append((name, "no longer generated"))
            continue
        a = np.atleast_1d(np.asarray(entry["value"], dtype=float))
        b = np.atleast_1d(np.asarray(fresh[name]["value"], dtype=float))
        err = float(np.max(np.abs(a - b)))
        if err > entry["tol"]:
            failures.append((name, f"differs by {err:.3e} > tol {entry['tol']:.1e}"))
    return failures
