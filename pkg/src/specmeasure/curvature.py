"""Numerical checks of the geometric estimates behind the heat asymptotic.

Three pieces:

* principal curvatures of geodesic spheres, from the scalar Riccati
  equation ``k' = k^2 + K`` against constant-curvature closed forms and the
  comparison envelope ``-sqrt(l)/tanh(s sqrt(l)) <= k <= -sqrt(l)/tan(s sqrt(l))``;
* the Hessian on ``N`` of ``rho_x(y) = d(x, y)^2 - d(x, N)^2`` at the foot
  point, by finite differences, against its curvature envelope;
* the Gaussian-type integral ``(4 pi t)^{-n/2} int_N exp(-rho_x/4t) g dnu`` and
  its ``t -> 0`` limit ``2^{n/2} g(foot) / sqrt(det Hessian)``.

Curvatures use the sign convention in which a small geodesic sphere in flat
space has principal curvature ``-1/s``.
"""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import (ConjugatePointError, InsufficientResolution, InvalidArgument,
                     NumericalInstability)
from .measures import (TrigPoly, ambient_distance, embed, foot_point,
                       submanifold_distance)
from .spectra import TWO_PI


# -- geodesic spheres ---------------------------------------------------------

def model_shape_value(K, s):
    """Principal curvature at radius ``s`` of a geodesic sphere in constant curvature ``K``."""
    if not s > 0:
        raise InvalidArgument("s must be positive")
    if K == 0:
        return -1.0 / s
    r = math.sqrt(abs(K))
    if K > 0:
        if s * r >= math.pi:
            raise ConjugatePointError(f"s*sqrt(K) = {s * r} reaches the conjugate point pi")
        return -r / math.tan(s * r)
    return -r / math.tanh(s * r)


class Envelope(NamedTuple):
    lo: float
    hi: float

    @property
    def note(self):
        if math.isinf(self.hi) or math.isinf(self.lo):
            return "outside s*sqrt(lambda) < pi/2; bound not finite"
        return ""


def shape_envelope(lam, s):
    """Envelope for geodesic-sphere curvatures when sectional curvature lies in ``[-lam, lam]``.

    The upper bound is reported as ``+inf`` once ``s sqrt(lam) >= pi/2``.
    """
    if lam < 0 or not s > 0:
        raise InvalidArgument("need lam >= 0 and s > 0")
    if lam == 0:
        return Envelope(-1.0 / s, -1.0 / s)
    r = math.sqrt(lam)
    lo = -r / math.tanh(s * r)
    hi = -r / math.tan(s * r) if s * r < 0.5 * math.pi else math.inf
    return Envelope(lo, hi)


@dataclass
class RiccatiTrace:
    s: np.ndarray
    k: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    lam: float
    blowup_at: Optional[float] = None

    def envelope_violation(self):
        """Largest excursion outside the envelope over samples where it is finite."""
        fin = np.isfinite(self.hi)
        below = np.max(self.lo[fin] - self.k[fin], initial=0.0)
        above = np.max(self.k[fin] - self.hi[fin], initial=0.0)
        return float(max(below, above, 0.0))


def random_profile(rng, lam=1.0, modes=4):
    """Smooth random curvature profile with ``|K(s)| <= lam``."""
    a = rng.uniform(-1.0, 1.0, modes)
    w = rng.uniform(0.0, 6.0, modes)
    ph = rng.uniform(0.0, TWO_PI, modes)
    scale = lam / np.sum(np.abs(a))

    def profile(s):
        return float(scale * np.sum(a * np.sin(w * s + ph)))

    return profile


def riccati_integrate(profile, s_start, s_end, steps, lam=None, blowup=1e8,
                      rtol=1e-11, atol=1e-12):
    """Integrate ``k' = k^2 + K(s)`` from the geodesic-sphere singularity.

    The start value comes from the expansion ``k ~ -1/s + K s/3``.
    ``profile`` is a callable or a constant. ``lam`` sets the comparison
    envelope (default: the largest ``|K|`` seen on the sample grid).
    Integration stops early when ``|k|`` exceeds ``blowup``, which signals a
    conjugate point; ``blowup_at`` then records where.
    """
    if not 0 < s_start < s_end:
        raise InvalidArgument("need 0 < s_start < s_end")
    K: Callable = profile if callable(profile) else (lambda s, c=float(profile): c)
    grid = np.linspace(s_start, s_end, steps)
    k0 = -1.0 / s_start + K(s_start) * s_start / 3.0

    def rhs(s, y):
        return [y[0] * y[0] + K(s)]

    def escape(s, y):
        return abs(y[0]) - blowup
    escape.terminal = True

    sol = solve_ivp(rhs, (s_start, s_end), [k0], method="RK45", t_eval=grid,
                    events=escape, rtol=rtol, atol=atol)
    s = sol.t
    k = sol.y[0]
    blowup_at = float(sol.t_events[0][0]) if sol.t_events[0].size else None
    if lam is None:
        lam = max(abs(K(x)) for x in grid)
    bounds = [shape_envelope(lam, x) for x in s]
    lo = np.array([b.lo for b in bounds])
    hi = np.array([b.hi for b in bounds])
    return RiccatiTrace(s, k, lo, hi, float(lam), blowup_at)


# -- rho_x and its Hessian ----------------------------------------------------

@dataclass(frozen=True)
class GeodesicProbe:
    """A point ``x`` near ``N`` together with finite-difference settings."""

    measure: object
    x: tuple
    h: float = 1e-2
    depth: int = 3

    def __post_init__(self):
        d = submanifold_distance(self.measure, self.x)
        if d >= self.measure.tubular_radius:
            raise InvalidArgument(
                f"probe at distance {d} is outside the tubular radius {self.measure.tubular_radius}")

    @property
    def distance(self):
        return submanifold_distance(self.measure, self.x)

    @property
    def n(self):
        return self.measure.n


def probe_at_distance(measure, d, along=0.0, **kwargs):
    """Probe at normal distance ``d`` above the intrinsic location ``along``."""
    if not 0 <= d < measure.tubular_radius:
        raise InvalidArgument(f"d={d} outside [0, {measure.tubular_radius})")
    if measure.kind == "subtorus":
        base = np.broadcast_to(np.asarray(along, dtype=float), (measure.n,))
        normal = np.array(measure.offset, dtype=float)
        normal[0] += d
        x = tuple(np.concatenate([base, normal]))
    elif measure.kind == "equator":
        x = (0.5 * math.pi - d, float(along))
    elif measure.kind == "point":
        x = tuple(np.asarray(measure.location, dtype=float) + d * np.eye(len(measure.location))[0])
    else:
        raise InvalidArgument("probes need a proper submanifold")
    return GeodesicProbe(measure, x, **kwargs)


def rho_value(probe, y):
    """``rho_x(y) = d_M(x, y)^2 - d_M(x, N)^2`` for ambient points ``y``."""
    cat = probe.measure.ambient
    return ambient_distance(cat, probe.x, y) ** 2 - probe.distance**2


def _rho_along(probe, direction, s):
    base, _ = foot_point(probe.measure, probe.x)
    return rho_value(probe, embed(probe.measure, base + s * direction))


def _second_difference(probe, direction):
    h0 = probe.h
    table = []
    for i in range(probe.depth + 1):
        h = h0 / 2**i
        row = [(_rho_along(probe, direction, h) - 2.0 * _rho_along(probe, direction, 0.0)
                + _rho_along(probe, direction, -h)) / (h * h)]
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (4**j - 1))
        table.append(row)
    diag = [row[-1] for row in table]
    est = abs(diag[-1] - diag[-2]) if len(diag) > 1 else math.inf
    return float(diag[-1]), float(est), diag


def rho_hessian_fd(probe, direction=None, tol=1e-5):
    """``(rho_x o c)''(0)`` along the unit-speed geodesic ``c`` of ``N`` through the foot point.

    Central second differences with ``h`` halved ``depth`` times and
    Richardson extrapolation. Returns ``(value, error_estimate)``; an
    estimate above ``tol`` raises :class:`NumericalInstability`.
    """
    n = probe.n
    if n == 0:
        raise InvalidArgument("a point has no tangent directions")
    direction = np.eye(n)[0] if direction is None else np.asarray(direction, dtype=float)
    norm = np.linalg.norm(direction)
    if not norm > 0:
        raise InvalidArgument("direction must be non-zero")
    value, est, diag = _second_difference(probe, direction / norm)
    if not est <= tol:
        raise NumericalInstability(
            f"Richardson extrapolation did not settle (estimate {est:.3g})",
            {"diagonal": diag, "h": probe.h, "depth": probe.depth})
    return value, est


def rho_hessian_matrix(probe, tol=1e-5):
    """Full Hessian in the orthonormal coordinate frame of ``N``, via polarization."""
    n = probe.n
    H = np.zeros((n, n))
    err = 0.0
    eye = np.eye(n)
    for i in range(n):
        H[i, i], e = rho_hessian_fd(probe, eye[i], tol)
        err = max(err, e)
    for i in range(n):
        for j in range(i + 1, n):
            hu, e = rho_hessian_fd(probe, eye[i] + eye[j], tol)
            H[i, j] = H[j, i] = hu - 0.5 * (H[i, i] + H[j, j])
            err = max(err, e)
    return H, err


def hessian_envelope(d, kappa, lam):
    """Envelope for the Hessian of ``rho_x`` at the foot point, for unit tangent vectors.

    ``d`` is the distance to ``N``, ``kappa`` bounds its second fundamental
    form and ``[-lam, lam]`` contains the sectional curvatures.
    """
    if d < 0 or kappa < 0 or lam < 0:
        raise InvalidArgument("d, kappa and lam must be non-negative")
    if d == 0 or lam == 0:
        return Envelope(2.0 - 2.0 * kappa * d, 2.0 + 2.0 * kappa * d)
    r = math.sqrt(lam)
    hi = 2.0 * d * r / math.tanh(d * r) + 2.0 * kappa * d
    lo = 2.0 * d * r / math.tan(d * r) - 2.0 * kappa * d if d * r < 0.5 * math.pi else -math.inf
    return Envelope(lo, hi)


# -- Laplace's method ---------------------------------------------------------

class LaplaceValue(NamedTuple):
    value: float
    limit_target: float


def minimal_laplace_resolution(t):
    """Smallest grid with node spacing ``2 pi / resolution <= sqrt(t)``."""
    return math.ceil(TWO_PI / math.sqrt(t) - 1e-9)


def _as_density(g, n):
    if isinstance(g, TrigPoly):
        if g.dim != n:
            raise InvalidArgument("g must be a function on N")
        return g
    return TrigPoly.constant(n, complex(g))


def _real_if_close(z):
    z = complex(z)
    return z.real if abs(z.imag) <= 1e-14 * max(abs(z), 1e-300) else z


def laplace_method_value(probe, g, t, resolution=None):
    """``(4 pi t)^{-n/2} int_N exp(-rho_x/4t) g dnu`` and its ``t -> 0`` limit.

    The integral uses the uniform rule on ``N``; ``resolution`` defaults to
    the coarsest grid whose spacing does not exceed ``sqrt(t)``. The limit is
    ``2^{n/2} g(foot) / sqrt(det H)`` with ``H`` the finite-difference Hessian.
    """
    if not t > 0:
        raise InvalidArgument("t must be positive")
    measure = probe.measure
    n = probe.n
    g = _as_density(g, n)
    foot, _ = foot_point(measure, probe.x)
    g_foot = g(foot[None, :])[0] if n else g(np.empty((1, 0)))[0]
    if n == 0:
        return LaplaceValue(_real_if_close(g_foot), _real_if_close(g_foot))

    minimal = minimal_laplace_resolution(t)
    if resolution is None:
        resolution = minimal
    elif resolution < minimal:
        raise InsufficientResolution(
            f"resolution {resolution} too coarse for the Gaussian at t={t}; need >= {minimal}",
            minimal)
    axis = TWO_PI * np.arange(resolution) / resolution
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    y = np.stack([m.ravel() for m in mesh], axis=-1)
    rho = rho_value(probe, embed(measure, y))
    integrand = np.exp(-rho / (4.0 * t)) * g(y)
    w = (TWO_PI / resolution) ** n
    value = (4.0 * math.pi * t) ** (-n / 2) * w * complex(
        math.fsum(integrand.real), math.fsum(integrand.imag))

    H, _ = rho_hessian_matrix(probe)
    target = 2.0 ** (n / 2) * g_foot / math.sqrt(np.linalg.det(H))
    return LaplaceValue(_real_if_close(value), _real_if_close(target))


@dataclass
class RateFit:
    t: np.ndarray
    value: np.ndarray
    target: np.ndarray
    error: np.ndarray
    exponent: float      # slope of log|error| against log t
    constant: float      # smallest C with |error| <= C sqrt(t) on the grid


def laplace_rate(probe, g, t_values):
    """Fit ``|value(t) - limit| ~ C t^p`` over ``t_values``.

    Errors at rounding level carry no rate information; they are clamped to
    that floor, and a grid that sits entirely on it reports ``p = inf``.
    """
    t = np.asarray(t_values, dtype=float)
    pairs = [laplace_method_value(probe, g, x) for x in t]
    value = np.array([p.value for p in pairs])
    target = np.array([p.limit_target for p in pairs])
    err = np.abs(value - target)
    floor = 1e3 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(target))))
    if np.all(err <= floor):
        slope = math.inf
    else:
        slope = float(np.polyfit(np.log(t), np.log(np.maximum(err, floor)), 1)[0])
    return RateFit(t, value, target, err, slope, float(np.max(err / np.sqrt(t))))
