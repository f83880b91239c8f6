"""Cumulative composite Simpson integration and Hermite interpolation on a
uniform grid."""

import math

import numpy as np


def uniform_grid(length, n_nodes):
    """Uniform nodes on [0, length]; ``n_nodes`` is forced odd (even interval count)."""
    if n_nodes < 3:
        raise ValueError("need at least 3 nodes")
    if n_nodes % 2 == 0:
        n_nodes += 1
    return np.linspace(0.0, length, n_nodes)


def cumulative_simpson(y, h):
    """Running integral of samples ``y`` (first axis = grid) with spacing ``h``.

    Even nodes carry the composite Simpson sum.  Each odd node adds the
    integral of the interpolating parabola over the first half of its pair,
    h/12 (5 y0 + 8 y1 - y2), to the preceding even-node value, so the local
    error at odd nodes does not accumulate.
    """
    y = np.asarray(y)
    n = y.shape[0]
    if n % 2 == 0:
        raise ValueError("cumulative_simpson needs an odd number of nodes")
    out = np.zeros_like(y)
    if n == 1:
        return out
    y0, y1, y2 = y[0:-2:2], y[1:-1:2], y[2::2]
    pair = (h / 3.0) * (y0 + 4.0 * y1 + y2)
    out[2::2] = np.cumsum(pair, axis=0)
    out[1::2] = out[0:-2:2] + (h / 12.0) * (5.0 * y0 + 8.0 * y1 - y2)
    return out


def simpson_error_bound(length, h, d4_max):
    """A-priori composite Simpson bound ``length * h^4 / 180 * max|f''''|``."""
    return length * h**4 / 180.0 * d4_max


def odd_node_error_bound(h, d3_max):
    """Bound for the half-pair parabola rule used at odd nodes."""
    return h**4 / 24.0 * d3_max


def hermite(grid, values, rates, x):
    """Cubic Hermite interpolation of tabulated ``values`` with derivatives ``rates``.

    ``grid`` must be uniform.  Returns the node value exactly when ``x`` hits a
    node.
    """
    h = grid[1] - grid[0]
    if h == 0:
        # zero-length interval: every node is the start point
        return values[0]
    pos = (x - grid[0]) / h
    j = int(math.floor(pos))
    j = min(max(j, 0), len(grid) - 2)
    s = pos - j
    if abs(s) < 1e-12:
        return values[j]
    if abs(s - 1.0) < 1e-12:
        return values[j + 1]
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return (
        h00 * values[j]
        + h10 * h * rates[j]
        + h01 * values[j + 1]
        + h11 * h * rates[j + 1]
    )
