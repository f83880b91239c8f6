"""
Bogoliubov propagators U(tau) with (a(tau), a^dag(tau)) = U(tau) (a, a^dag).

Three independent routes produce a :class:`Propagator`:

* :func:`assemble` exponentiates a truncated Magnus sum (tau < 1),
* :func:`assemble_stepped` multiplies Magnus propagators of adjacent
  sub-intervals (any tau),
* :func:`ode_oracle` integrates dU/dtau = G(tau) U directly with RK4.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from multitime import linalg2
from multitime.errors import ConvergenceGateViolation, ParamMismatch, ToleranceNotReached
from multitime.magnus import DEFAULT_N_MAX, magnus_terms

STEP_LENGTH = 0.9


@dataclass(frozen=True)
class Propagator:
    """Evolution matrix at scaled time ``tau``.

    ``provenance`` records how it was produced, e.g. ``{"kind": "magnus",
    "n_max": 11, "grid_points": 1025}``.  For Magnus-assembled propagators
    ``c``, ``s`` and ``p`` hold the summed diagonal coefficient, the summed
    off-diagonal coefficient and sqrt(|S|^2 - C^2).
    """

    params: object
    tau: float
    U: np.ndarray = field(repr=False)
    provenance: dict = field(default_factory=dict, compare=False)
    c: float = None
    s: complex = None
    p: complex = None

    @property
    def u11(self):
        return complex(self.U[0, 0])

    @property
    def u12(self):
        return complex(self.U[0, 1])

    def det(self):
        return complex(linalg2.det(self.U))

    def bogoliubov_defect(self):
        """|U11|^2 - |U12|^2 - 1, zero for a valid Bogoliubov map."""
        return abs(self.u11) ** 2 - abs(self.u12) ** 2 - 1.0


def assemble(series, tau, n_max=None):
    """U(tau) = exp(sum_n Omega_n(tau)) from a series that starts at tau = 0."""
    if series.tau_start != 0.0:
        raise ValueError("assemble needs a series anchored at tau = 0")
    omega = series.total(tau, n_max)
    U = linalg2.exp_traceless(omega)
    return Propagator(
        params=series.params,
        tau=float(tau),
        U=U,
        provenance={
            "kind": "magnus",
            "n_max": series.n_max if n_max is None else n_max,
            "grid_points": len(series.grid),
        },
        c=float(omega[1, 1].imag),
        s=complex(omega[0, 1]),
        p=complex(np.sqrt(-linalg2.det(omega))),
    )


def min_steps(tau_end):
    return max(1, math.ceil(tau_end / STEP_LENGTH))


def assemble_stepped(params, tau_end, n_max=DEFAULT_N_MAX, n_steps=None, grid_points=None):
    """Ordered product of Magnus propagators over ``n_steps`` equal sub-intervals.

    Each sub-interval sees the generator at absolute time, so the pump phase
    e^{-i delta t} is never re-zeroed.
    """
    if tau_end < 0:
        raise ValueError("tau_end must be non-negative")
    n_steps = min_steps(tau_end) if n_steps is None else int(n_steps)
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    length = tau_end / n_steps
    if length >= 1.0:
        raise ConvergenceGateViolation(
            f"sub-interval length {length} >= 1; use at least {min_steps(tau_end)} steps"
        )
    U = np.eye(2, dtype=complex)
    for k in range(n_steps):
        start = k * length
        end = tau_end if k == n_steps - 1 else (k + 1) * length
        series = magnus_terms(params, end, n_max, grid_points, tau_start=start)
        U = linalg2.exp_traceless(series.total(end)) @ U
    return Propagator(
        params=params,
        tau=float(tau_end),
        U=U,
        provenance={"kind": "stepped", "n_max": n_max, "n_steps": n_steps},
    )


def _rk4(ratio, tau0, tau1, n, u):
    """Advance U over [tau0, tau1] with ``n`` classical RK4 steps."""
    a, b, c, d = u
    h = (tau1 - tau0) / n
    w = ratio * math.pi / 2.0
    pi = math.pi
    for i in range(n):
        t = tau0 + i * h
        e0 = cmath.exp(1j * w * t)
        e1 = cmath.exp(1j * w * (t + 0.5 * h))
        e2 = cmath.exp(1j * w * (t + h))
        # G = [[0, g], [q, 0]] with g = -i pi e^{-i theta}, q = i pi e^{i theta}
        g0, q0 = -1j * pi / e0, 1j * pi * e0
        g1, q1 = -1j * pi / e1, 1j * pi * e1
        g2, q2 = -1j * pi / e2, 1j * pi * e2
        ka, kb, kc, kd = g0 * c, g0 * d, q0 * a, q0 * b
        a1, b1, c1, d1 = a + 0.5 * h * ka, b + 0.5 * h * kb, c + 0.5 * h * kc, d + 0.5 * h * kd
        la, lb, lc, ld = g1 * c1, g1 * d1, q1 * a1, q1 * b1
        a2, b2, c2, d2 = a + 0.5 * h * la, b + 0.5 * h * lb, c + 0.5 * h * lc, d + 0.5 * h * ld
        ma, mb, mc, md = g1 * c2, g1 * d2, q1 * a2, q1 * b2
        a3, b3, c3, d3 = a + h * ma, b + h * mb, c + h * mc, d + h * md
        na, nb, nc, nd = g2 * c3, g2 * d3, q2 * a3, q2 * b3
        a = a + h / 6.0 * (ka + 2 * la + 2 * ma + na)
        b = b + h / 6.0 * (kb + 2 * lb + 2 * mb + nb)
        c = c + h / 6.0 * (kc + 2 * lc + 2 * mc + nc)
        d = d + h / 6.0 * (kd + 2 * ld + 2 * md + nd)
    return a, b, c, d


def _trajectory(ratio, taus, base_steps, level):
    out = []
    u = (1.0 + 0j, 0j, 0j, 1.0 + 0j)
    prev = 0.0
    for tau, base in zip(taus, base_steps):
        if tau > prev:
            u = _rk4(ratio, prev, tau, base << level, u)
        out.append(u)
        prev = tau
    return out


def ode_trajectory(params, taus, tol=1e-12, max_level=16):
    """Oracle propagators for every ``tau`` in ``taus`` from a single RK4 sweep.

    The step count is doubled until the largest entrywise difference between
    successive sweeps, divided by ``max(1, max |U_ij|)``, falls below ``tol``;
    the finer sweep is returned.
    """
    if not 1e-13 <= tol <= 1e-6:
        raise ValueError("tol must lie in [1e-13, 1e-6]")
    taus = [float(t) for t in taus]
    if any(t < 0 for t in taus):
        raise ValueError("taus must be non-negative")
    order = sorted(range(len(taus)), key=taus.__getitem__)
    sorted_taus = [taus[i] for i in order]
    base, prev = [], 0.0
    for t in sorted_taus:
        base.append(max(1, math.ceil(64 * (t - prev))))
        prev = t

    coarse = _trajectory(params.ratio, sorted_taus, base, 0)
    for level in range(1, max_level + 1):
        fine = _trajectory(params.ratio, sorted_taus, base, level)
        # entries grow like cosh(pi tau); compare relative to the largest one
        scale = max((max(abs(x) for x in u) for u in fine), default=1.0)
        diff = max(
            (max(abs(x - y) for x, y in zip(uf, uc)) for uf, uc in zip(fine, coarse)),
            default=0.0,
        ) / max(1.0, scale)
        if diff < tol:
            break
        coarse = fine
    else:
        raise ToleranceNotReached(f"RK4 self-difference {diff:.2e} above tol {tol:.1e}")

    result = [None] * len(taus)
    for slot, tau, (a, b, c, d) in zip(order, sorted_taus, fine):
        result[slot] = Propagator(
            params=params,
            tau=tau,
            U=np.array([[a, b], [c, d]]),
            provenance={"kind": "oracle", "tol": tol, "self_difference": diff},
        )
    return result


def ode_oracle(params, tau_end, tol=1e-12):
    """Reference propagator from direct integration of dU/dtau = G(tau) U."""
    return ode_trajectory(params, [tau_end], tol)[0]


def propagators(params, taus, n_max=DEFAULT_N_MAX, method="magnus", grid_points=None, tol=1e-12):
    """Propagators for several times with one of the three routes.

    ``method="magnus"`` builds a single series up to max(taus) and therefore
    needs max(taus) < 1; ``"stepped"`` splits each time into sub-intervals of
    length <= 0.9; ``"oracle"`` uses the RK4 reference.
    """
    taus = [float(t) for t in taus]
    if not taus:
        return []
    if method == "magnus":
        series = magnus_terms(params, max(taus), n_max, grid_points)
        return [assemble(series, t) for t in taus]
    if method == "stepped":
        return [assemble_stepped(params, t, n_max, grid_points=grid_points) for t in taus]
    if method == "oracle":
        return ode_trajectory(params, taus, tol)
    raise ValueError(f"unknown method {method!r}")


def unequal_time_commutator(p1, p2):
    """[a(tau1), a(tau2)] = U11(tau1) U12(tau2) - U12(tau1) U11(tau2), a c-number."""
    if p1.params != p2.params:
        raise ParamMismatch("propagators come from different model parameters")
    return p1.u11 * p2.u12 - p1.u12 * p2.u11
