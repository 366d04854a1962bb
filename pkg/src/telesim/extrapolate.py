"""Richardson extrapolation of scenario quantities to zero coupling.

Conditional-output quantities of the apparatus are analytic in the squared
coupling, so polynomial extrapolation of samples F(g) in h = g^2 to h -> 0
recovers the leading-order value; the error estimate is the difference
between the last two extrapolation orders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Extrapolation:
    value: float
    error: float
    orders: tuple[float, ...]
    residuals_monotone: bool


def richardson(h: np.ndarray, values: np.ndarray) -> Extrapolation:
    """Neville extrapolation of samples (h_i, f_i) to h = 0.

    `h` must be positive and strictly decreasing with at least three entries.
    `orders` holds the best estimate at each polynomial order; a non-monotone
    correction sequence is reported via `residuals_monotone`, not masked.
    """
    h = np.asarray(h, dtype=float)
    values = np.asarray(values, dtype=float)
    if h.ndim != 1 or h.shape != values.shape:
        raise ValueError("h and values must be 1-d arrays of equal length")
    if len(h) < 3:
        raise ValueError("extrapolation needs at least three samples")
    if np.any(h <= 0) or np.any(np.diff(h) >= 0):
        raise ValueError("h must be positive and strictly decreasing")
    n = len(h)
    tableau = np.zeros((n, n))
    tableau[:, 0] = values
    for j in range(1, n):
        for i in range(j, n):
            num = h[i - j] * tableau[i, j - 1] - h[i] * tableau[i - 1, j - 1]
            tableau[i, j] = num / (h[i - j] - h[i])
    orders = tuple(float(tableau[j, j]) for j in range(n))
    corrections = np.abs(np.diff(orders))
    monotone = bool(np.all(np.diff(corrections) <= 0)) if len(corrections) > 1 else True
    return Extrapolation(
        value=float(tableau[n - 1, n - 1]),
        error=float(abs(tableau[n - 1, n - 1] - tableau[n - 1, n - 2])),
        orders=orders,
        residuals_monotone=monotone,
    )


def coupling_ladder(base: float, points: int = 4, ratio: float = 2.0**-0.5) -> tuple[float, ...]:
    """Geometric coupling ladder descending from `base` (h = g^2 halves per step)."""
    if points < 3:
        raise ValueError("ladder needs at least three points")
    if not 0 < ratio < 1:
        raise ValueError("ratio must be in (0, 1)")
    return tuple(base * ratio**k for k in range(points))
