"""Orthonormalized associated Legendre functions.

All functions return ``Pbar[l, q](x) = sqrt((2l+1)/(4 pi) (l-q)!/(l+q)!) P_l^q(x)``
with the Condon-Shortley phase, so that ``Pbar[l, q](cos theta) e^{i q phi}``
is the orthonormal spherical harmonic ``Y_l^q``. Values are produced by the
upward recurrence in ``l`` at fixed ``q``, seeded from the sectoral terms,
which never forms a factorial and stays finite to ``l`` in the tens of
thousands.
"""

import math

import numpy as np


def _sin_from_cos(x, s):
    if s is None:
        return np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    return np.asarray(s, dtype=float)


def _coefficients(l, q):
    a = np.sqrt((4.0 * l * l - 1.0) / (l * l - q * q))
    b = -np.sqrt((2.0 * l + 1.0) * ((l - 1.0) ** 2 - q * q) / ((2.0 * l - 3.0) * (l * l - q * q)))
    return a, b


def sectoral(q, x, s=None):
    """``Pbar[q, q](x)``; ``s`` may pass ``sin(theta)`` directly for accuracy near the poles."""
    x = np.asarray(x, dtype=float)
    s = _sin_from_cos(x, s)
    p = np.full(x.shape, 1.0 / math.sqrt(4.0 * math.pi))
    for j in range(1, q + 1):
        p = -math.sqrt((2.0 * j + 1.0) / (2.0 * j)) * s * p
    return p


def legendre_column(lmax, q, x, s=None):
    """``Pbar[l, q](x)`` for ``l = 0..lmax`` at fixed order ``q >= 0``.

    Rows with ``l < q`` are zero. Output shape is ``(lmax + 1,) + x.shape``.
    """
    if q < 0:
        raise ValueError("order q must be non-negative")
    x = np.asarray(x, dtype=float)
    out = np.zeros((lmax + 1,) + x.shape)
    if q > lmax:
        return out
    out[q] = sectoral(q, x, s)
    if q + 1 <= lmax:
        out[q + 1] = math.sqrt(2.0 * q + 3.0) * x * out[q]
    for l in range(q + 2, lmax + 1):
        a, b = _coefficients(l, q)
        out[l] = a * x * out[l - 1] + b * out[l - 2]
    return out


def legendre_table(lmax, x, s=None):
    """All ``Pbar[l, q](x)`` with ``0 <= q <= l <= lmax``.

    Output shape is ``(lmax + 1, lmax + 1) + x.shape`` indexed ``[l, q]``;
    entries with ``q > l`` are zero. The recurrence runs over ``l`` with all
    orders advanced together.
    """
    x = np.asarray(x, dtype=float)
    s = _sin_from_cos(x, s)
    out = np.zeros((lmax + 1, lmax + 1) + x.shape)
    out[0, 0] = 1.0 / math.sqrt(4.0 * math.pi)
    for l in range(1, lmax + 1):
        out[l, l] = -math.sqrt((2.0 * l + 1.0) / (2.0 * l)) * s * out[l - 1, l - 1]
        out[l, l - 1] = math.sqrt(2.0 * l + 1.0) * x * out[l - 1, l - 1]
        if l >= 2:
            q = np.arange(l - 1, dtype=float)
            a, b = _coefficients(float(l), q)
            shape = (l - 1,) + (1,) * x.ndim
            out[l, : l - 1] = (a.reshape(shape) * x * out[l - 1, : l - 1]
                               + b.reshape(shape) * out[l - 2, : l - 1])
    return out
