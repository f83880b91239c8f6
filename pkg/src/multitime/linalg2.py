"""
Closed-form complex 2x2 matrix algebra.

Matrices are numpy arrays of shape ``(..., 2, 2)``; every function broadcasts
over leading axes so that a whole time grid of matrices can be processed in
one call.  Complex scalars are plain Python/numpy complex numbers.
"""

import numpy as np

IDENTITY = np.eye(2, dtype=complex)

# below this |p| the even series for sinh(p)/p is used
SERIES_THRESHOLD = 1e-4
TRACE_RTOL = 1e-10


def as_mat2(a):
    a = np.asarray(a, dtype=complex)
    if a.shape[-2:] != (2, 2):
        raise ValueError(f"expected trailing shape (2, 2), got {a.shape}")
    return a


def mat_mul(a, b):
    return np.matmul(as_mat2(a), as_mat2(b))


def commutator(a, b):
    """Return ``a @ b - b @ a``."""
    a, b = as_mat2(a), as_mat2(b)
    return a @ b - b @ a


def det(a):
    a = as_mat2(a)
    return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]


def trace(a):
    a = as_mat2(a)
    return a[..., 0, 0] + a[..., 1, 1]


def adjoint(a):
    return np.conj(np.swapaxes(as_mat2(a), -1, -2))


def spectral_norm(a):
    """Largest singular value of a 2x2 matrix.

    sigma_max^2 is the top eigenvalue of B = A^dag A = [[p, q], [q*, r]],
    taken as (p + r)/2 + hypot((p - r)/2, |q|).  The form via the Frobenius
    norm and |det| cancels catastrophically when both singular values
    coincide, which is the case for every odd Magnus term.
    """
    a = as_mat2(a)
    c0, c1 = a[..., :, 0], a[..., :, 1]
    p = np.sum(np.abs(c0) ** 2, axis=-1)
    r = np.sum(np.abs(c1) ** 2, axis=-1)
    q = np.sum(np.conj(c0) * c1, axis=-1)
    return np.sqrt(0.5 * (p + r) + np.hypot(0.5 * (p - r), np.abs(q)))


def _sinhc(p):
    """sinh(p)/p for complex p, with the p -> 0 limit handled by series."""
    p = np.asarray(p, dtype=complex)
    small = np.abs(p) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, p)
    out = np.sinh(safe) / safe
    p2 = p * p
    series = 1.0 + p2 / 6.0 + p2 * p2 / 120.0 + p2 * p2 * p2 / 5040.0
    return np.where(small, series, out)


def exp_traceless(omega):
    """Exponential of a traceless 2x2 matrix.

    For tr(omega) = 0 the Cayley-Hamilton theorem gives omega^2 = p^2 I with
    p = sqrt(-det omega), hence

        exp(omega) = cosh(p) I + sinh(p)/p omega.

    The result is even in p, so the principal branch of the square root is
    used without loss of generality.

    Raises
    ------
    ValueError
        If ``|tr omega|`` exceeds ``1e-10 * max(1, ||omega||_2)``.
    """
    omega = as_mat2(omega)
    tr = np.abs(trace(omega))
    limit = TRACE_RTOL * np.maximum(1.0, spectral_norm(omega))
    if np.any(tr > limit):
        raise ValueError(f"exp_traceless: input is not traceless (|tr| = {np.max(tr):.3e})")
    p = np.sqrt(-det(omega))
    c = np.cosh(p)[..., None, None]
    s = _sinhc(p)[..., None, None]
    return c * IDENTITY + s * omega
