"""Fixed-step RK4 on a half lattice, plus midpoint interpolation.

The classical RK4 stages need the driving terms at t, t + dt/2 and
t + dt.  All drivers are therefore precomputed on the half lattice
(grid points interleaved with midpoints) and the right-hand side is
called with a half-lattice *index* instead of a time, which keeps the
stepping loop free of interpolation and bitwise reproducible.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import NonFiniteState

Rhs = Callable[[int, np.ndarray], np.ndarray]


def cubic_midpoints(y: np.ndarray) -> np.ndarray:
    """Midpoints of uniformly sampled data, 4th-order accurate.

    Interior midpoints use the centered 4-point stencil
    (-1, 9, 9, -1)/16; the two boundary midpoints use the one-sided
    cubic through the first (last) four samples.
    """
    y = np.asarray(y)
    n = y.shape[0] - 1
    if n < 1:
        raise ValueError("need at least two samples")
    if n == 1:
        return (y[:-1] + y[1:]) / 2.0
    if n == 2:
        return np.stack(
            [
                (3.0 * y[0] + 6.0 * y[1] - y[2]) / 8.0,
                (-y[0] + 6.0 * y[1] + 3.0 * y[2]) / 8.0,
            ]
        )
    m = np.empty((n,) + y.shape[1:], dtype=y.dtype)
    m[1:-1] = (-y[:-3] + 9.0 * y[1:-2] + 9.0 * y[2:-1] - y[3:]) / 16.0
    m[0] = (5.0 * y[0] + 15.0 * y[1] - 5.0 * y[2] + y[3]) / 16.0
    m[-1] = (y[-4] - 5.0 * y[-3] + 15.0 * y[-2] + 5.0 * y[-1]) / 16.0
    return m


def half_lattice(y: np.ndarray) -> np.ndarray:
    """Interleave samples with their cubic midpoints (length 2n + 1)."""
    y = np.asarray(y)
    n = y.shape[0] - 1
    out = np.empty((2 * n + 1,) + y.shape[1:], dtype=y.dtype)
    out[0::2] = y
    out[1::2] = cubic_midpoints(y)
    return out


def rk4(y0: np.ndarray, rhs: Rhs, dt: float, n_steps: int) -> np.ndarray:
    """Integrate forward from t = 0; returns the (n_steps+1, dim) path.

    ``rhs(j, y)`` receives the half-lattice index of the stage time
    (j = 2k at t_k, j = 2k + 1 at the midpoint).  Raises
    :class:`NonFiniteState` as soon as an amplitude stops being finite.
    """
    y = np.array(y0, dtype=complex)
    path = np.empty((n_steps + 1, y.size), dtype=complex)
    path[0] = y
    h = dt / 2.0
    for k in range(n_steps):
        j = 2 * k
        k1 = rhs(j, y)
        k2 = rhs(j + 1, y + h * k1)
        k3 = rhs(j + 1, y + h * k2)
        k4 = rhs(j + 2, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NonFiniteState((k + 1) * dt)
        path[k + 1] = y
    return path


