"""Smooth measures on catalog submanifolds and their Fourier coefficients.

A measure ``tau = psi * nu`` lives on one of four submanifold kinds:

* ``point``    -- a weighted delta measure (n = 0);
* ``subtorus`` -- the flat sub-torus of a torus spanned by the first ``n``
  angles, the remaining ``k`` angles held at ``offset``;
* ``equator``  -- the unit-speed great circle theta = pi/2 of the sphere;
* ``full``     -- the whole ambient manifold (k = 0).

Densities are finite trigonometric polynomials in the intrinsic angles
(:class:`TrigPoly`); on the whole sphere they are finite spherical-harmonic
expansions (:class:`SphPoly`). Every integral is therefore exact, either in
closed form or by a quadrature rule of sufficient degree.

Coefficients use the conjugate-linear pairing
``tau_hat(j) = integral of conj(phi_j) d tau``.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import (InsufficientResolution, InvalidArgument, PrecisionWarning,
                     UnsupportedConfiguration)
from .legendre import legendre_column
from .spectra import (SpectralCatalog, TWO_PI, eigenfunction_values, eval_eigenfunction,
                      normalize_sphere_point,
                      sphere_harmonic, torus_mode)

KINDS = ("point", "subtorus", "equator", "full")


@dataclass(frozen=True)
class TrigPoly:
    """``psi(y) = sum_p c_p exp(i p.y)`` on the flat torus ``[0, 2 pi)^dim``."""

    dim: int
    terms: tuple  # ((freq tuple, complex coefficient), ...) sorted by freq

    @classmethod
    def from_dict(cls, dim, mapping):
        terms = []
        for freq, c in mapping.items():
            freq = (int(freq),) if np.isscalar(freq) else tuple(int(f) for f in freq)
            if len(freq) != dim:
                raise InvalidArgument(f"frequency {freq} does not have {dim} components")
            if c != 0:
                terms.append((freq, complex(c)))
        return cls(dim, tuple(sorted(terms)))

    @classmethod
    def constant(cls, dim, value=1.0):
        return cls.from_dict(dim, {(0,) * dim: value})

    @property
    def band(self):
        return max((max(map(abs, f), default=0) for f, _ in self.terms), default=0)

    def coefficient(self, freq):
        return dict(self.terms).get(tuple(freq), 0j)

    def coefficients_at(self, freqs):
        """Coefficient lookup for an integer array of frequencies ``(P, dim)``."""
        freqs = np.asarray(freqs).reshape(-1, self.dim)
        out = np.zeros(len(freqs), dtype=complex)
        for f, c in self.terms:
            out[np.all(freqs == np.asarray(f), axis=1)] = c
        return out

    def __call__(self, angles):
        angles = np.asarray(angles, dtype=float)
        out = np.zeros(angles.shape[:-1], dtype=complex)
        for f, c in self.terms:
            out += c * np.exp(1j * (angles @ np.asarray(f, dtype=float)))
        return out

    def norm_sq(self):
        """``integral |psi|^2`` over ``[0, 2 pi)^dim`` by Parseval."""
        return TWO_PI**self.dim * math.fsum(abs(c) ** 2 for _, c in self.terms)

    def scaled(self, factor):
        return TrigPoly(self.dim, tuple((f, factor * c) for f, c in self.terms))

    def describe(self):
        return ";".join(f"{','.join(map(str, f))}:{c!r}" for f, c in self.terms)


@dataclass(frozen=True)
class SphPoly:
    """``psi = sum c_{l,q} Y_l^q`` on the unit sphere."""

    terms: tuple  # (((l, q), complex), ...)

    @classmethod
    def from_dict(cls, mapping):
        terms = []
        for (l, q), c in mapping.items():
            l, q = int(l), int(q)
            if l < 0 or abs(q) > l:
                raise InvalidArgument(f"invalid spherical index {(l, q)}")
            if c != 0:
                terms.append(((l, q), complex(c)))
        return cls(tuple(sorted(terms)))

    @property
    def band(self):
        return max((l for (l, _), _ in self.terms), default=0)

    def coefficients_at(self, indices):
        indices = np.asarray(indices).reshape(-1, 2)
        out = np.zeros(len(indices), dtype=complex)
        for (l, q), c in self.terms:
            out[(indices[:, 0] == l) & (indices[:, 1] == q)] = c
        return out

    def __call__(self, theta, phi):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=complex)
        for (l, q), c in self.terms:
            out += c * sphere_harmonic(l, q, theta, phi)
        return out

    def norm_sq(self):
        return math.fsum(abs(c) ** 2 for _, c in self.terms)

    def scaled(self, factor):
        return SphPoly(tuple((i, factor * c) for i, c in self.terms))

    def describe(self):
        return ";".join(f"{l},{q}:{c!r}" for (l, q), c in self.terms)


@dataclass(frozen=True)
class MeasureSpec:
    ambient: SpectralCatalog
    kind: str
    n: int
    density: object = None  # TrigPoly, SphPoly, or None for a point
    location: tuple = ()
    offset: tuple = ()
    weight: float = 1.0

    def __post_init__(self):
        m = self.ambient.dimension
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown submanifold kind {self.kind!r}")
        if not 0 <= self.n <= m:
            raise InvalidArgument(f"submanifold dimension {self.n} outside [0, {m}]")
        if self.kind == "subtorus" and self.ambient.kind != "torus":
            raise UnsupportedConfiguration("sub-tori live in tori")
        if self.kind == "equator" and self.ambient.kind != "sphere2":
            raise UnsupportedConfiguration("the equator lives in the sphere")
        if self.kind == "point" and len(self.location) != m:
            raise InvalidArgument("point location must have one coordinate per dimension")
        if self.kind == "subtorus" and len(self.offset) != m - self.n:
            raise InvalidArgument("sub-torus offset needs one coordinate per normal direction")

    @property
    def k(self):
        return self.ambient.dimension - self.n

    @property
    def curvature_bound(self):
        return 0.0 if self.ambient.kind == "torus" else 1.0

    @property
    def sff_bound(self):
        # every catalog submanifold is totally geodesic
        return 0.0

    @property
    def band(self):
        return 0 if self.density is None else self.density.band

    @property
    def tubular_radius(self):
        if self.kind == "point":
            return math.pi
        return 0.5 * math.pi

    @property
    def nu_total(self):
        """Riemannian measure of the submanifold."""
        if self.kind == "point":
            return 1.0
        if self.kind == "full":
            return self.ambient.volume
        return TWO_PI**self.n

    def describe(self):
        parts = [self.ambient.describe(), self.kind, f"n={self.n}"]
        if self.kind == "point":
            parts += ["at=" + ",".join(repr(float(v)) for v in self.location),
                      f"w={float(self.weight)!r}"]
        if self.kind == "subtorus":
            parts.append("offset=" + ",".join(repr(float(v)) for v in self.offset))
        if self.density is not None:
            parts.append("psi=" + self.density.describe())
        return "|".join(parts)

    def scaled(self, factor):
        """Same submanifold, density multiplied by ``factor``."""
        if self.kind == "point":
            return replace(self, weight=self.weight * factor)
        return replace(self, density=self.density.scaled(factor))


def point_measure(catalog, location, weight=1.0):
    return MeasureSpec(catalog, "point", 0, None, tuple(float(v) for v in location),
                       (), float(weight))


def subtorus_measure(catalog, n, offset=None, density=None):
    m = catalog.dimension
    if not 1 <= n < m:
        raise InvalidArgument(f"sub-torus dimension must lie in [1, {m - 1}]")
    offset = (0.0,) * (m - n) if offset is None else tuple(float(v) for v in offset)
    density = TrigPoly.constant(n) if density is None else density
    if density.dim != n:
        raise InvalidArgument("density dimension must equal the sub-torus dimension")
    return MeasureSpec(catalog, "subtorus", n, density, (), offset)


def equator_measure(density=None):
    density = TrigPoly.constant(1) if density is None else density
    if density.dim != 1:
        raise InvalidArgument("equator densities are functions of one angle")
    return MeasureSpec(SpectralCatalog.sphere2(), "equator", 1, density)


def full_measure(catalog, density):
    if catalog.kind == "torus":
        if not isinstance(density, TrigPoly) or density.dim != catalog.dimension:
            raise InvalidArgument("torus densities are trig polynomials in all angles")
    elif not isinstance(density, SphPoly):
        raise InvalidArgument("sphere densities are spherical-harmonic expansions")
    return MeasureSpec(catalog, "full", catalog.dimension, density)


def density_norm_sq(measure):
    """``integral over N of |psi|^2 d nu`` (``weight^2`` for a point)."""
    if measure.kind == "point":
        return float(measure.weight) ** 2
    return measure.density.norm_sq()


# -- quadrature ---------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    intrinsic: np.ndarray  # nodes in the submanifold's own coordinates
    ambient: np.ndarray    # the same nodes as ambient points
    weights: np.ndarray
    exactness: int         # highest frequency integrated exactly

    def __len__(self):
        return len(self.weights)


def max_frequency(catalog, lambda_max):
    """Largest single-axis frequency (torus) or degree (sphere) below ``lambda_max``."""
    bound = int(math.floor(lambda_max))
    if catalog.kind == "torus":
        return math.isqrt(bound)
    return (math.isqrt(4 * bound + 1) - 1) // 2


def index_frequency(catalog, index):
    if catalog.kind == "torus":
        return max(abs(int(c)) for c in index)
    return int(index[0])


def required_exactness(measure, frequency):
    return 2 * measure.band + frequency


def _uniform_grid(dim, resolution):
    axis = TWO_PI * np.arange(resolution) / resolution
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=-1)


def quadrature_nodes(measure, resolution, lambda_max=None):
    """Quadrature rule on the measure's submanifold.

    Flat pieces (sub-tori, the equator, the full torus) get the uniform
    tensor trapezoidal rule with ``resolution`` points per angle, exact for
    trigonometric integrands of frequency below ``resolution``. The full
    sphere gets ``resolution`` Gauss-Legendre nodes in ``cos theta`` times
    ``2 * resolution`` uniform longitudes.

    With ``lambda_max`` given, a rule too coarse for every eigenfunction up
    to that eigenvalue is refused with the minimal admissible resolution.
    """
    if measure.kind == "point":
        raise InvalidArgument("a point measure needs no quadrature rule")
    if resolution < 1:
        raise InvalidArgument("resolution must be >= 1")
    catalog = measure.ambient
    sphere_full = measure.kind == "full" and catalog.kind == "sphere2"
    if lambda_max is not None:
        need = required_exactness(measure, max_frequency(catalog, lambda_max))
        have = 2 * resolution - 1 if sphere_full else resolution - 1
        if have < need:
            minimal = (need + 2) // 2 if sphere_full else need + 1
            raise InsufficientResolution(
                f"resolution {resolution} integrates up to frequency {have}; "
                f"lambda_max={lambda_max} needs {need} (resolution >= {minimal})", minimal)

    if sphere_full:
        x, w = np.polynomial.legendre.leggauss(resolution)
        theta = np.arccos(x)
        phi = TWO_PI * np.arange(2 * resolution) / (2 * resolution)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        nodes = np.column_stack([tt.ravel(), pp.ravel()])
        weights = np.repeat(w * (TWO_PI / (2 * resolution)), 2 * resolution)
        return QuadratureRule(nodes, nodes, weights, 2 * resolution - 1)

    dim = measure.n
    nodes = _uniform_grid(dim, resolution)
    weights = np.full(len(nodes), (TWO_PI / resolution) ** dim)
    if measure.kind == "subtorus":
        ambient = np.column_stack([nodes, np.tile(measure.offset, (len(nodes), 1))])
    elif measure.kind == "equator":
        ambient = np.column_stack([np.full(len(nodes), 0.5 * math.pi), nodes[:, 0]])
    else:
        ambient = nodes
    return QuadratureRule(nodes, ambient, weights, resolution - 1)


def _eigen_values_at(catalog, index, points):
    if catalog.kind == "torus":
        return torus_mode(index, points)
    return sphere_harmonic(int(index[0]), int(index[1]), points[:, 0], points[:, 1])


def _density_values(measure, rule):
    if measure.kind == "full" and measure.ambient.kind == "sphere2":
        return measure.density(rule.intrinsic[:, 0], rule.intrinsic[:, 1])
    return measure.density(rule.intrinsic)


def fourier_coefficient(measure, index, rule=None):
    """``tau_hat(index)`` by quadrature (or directly, for a point).

    Warns with :class:`PrecisionWarning` when the rule is not exact for the
    integrand ``psi * conj(phi_j)``.
    """
    catalog = measure.ambient
    if measure.kind == "point":
        return measure.weight * eval_eigenfunction(catalog, index, measure.location).conjugate()
    if rule is None:
        raise InvalidArgument("a quadrature rule is required for extended measures")
    need = required_exactness(measure, index_frequency(catalog, index))
    if rule.exactness < need:
        warnings.warn(f"rule exact to frequency {rule.exactness}, integrand needs {need}",
                      PrecisionWarning, stacklevel=2)
    vals = rule.weights * _density_values(measure, rule) * np.conj(
        _eigen_values_at(catalog, index, rule.ambient))
    return complex(math.fsum(vals.real), math.fsum(vals.imag))


# -- closed forms -------------------------------------------------------------

def closed_form_coefficients(measure, indices):
    """Vectorized closed-form ``tau_hat`` for an index array ``(P, index_width)``.

    Supported pairs: torus with point / sub-torus / full, sphere with
    point / equator / full. Anything else raises
    :class:`UnsupportedConfiguration` so the caller can fall back to
    quadrature.
    """
    catalog = measure.ambient
    idx = np.asarray(indices, dtype=np.int64).reshape(-1, catalog.index_width)
    m = catalog.dimension
    pair = (catalog.kind, measure.kind)

    if pair == ("torus", "point"):
        phase = idx.astype(float) @ np.mod(np.asarray(measure.location, dtype=float), TWO_PI)
        return measure.weight * TWO_PI ** (-m / 2) * np.exp(-1j * phase)

    if pair == ("torus", "subtorus"):
        n = measure.n
        c = measure.density.coefficients_at(idx[:, :n])
        phase = idx[:, n:].astype(float) @ np.asarray(measure.offset, dtype=float)
        return TWO_PI ** (n - m / 2) * c * np.exp(-1j * phase)

    if pair == ("torus", "full"):
        return TWO_PI ** (m / 2) * measure.density.coefficients_at(idx)

    if pair == ("sphere2", "full"):
        return measure.density.coefficients_at(idx)

    if pair == ("sphere2", "point"):
        return measure.weight * np.conj(eigenfunction_values(catalog, idx, measure.location))

    if pair == ("sphere2", "equator"):
        out = np.zeros(len(idx), dtype=complex)
        if len(idx) == 0:
            return out
        lmax = int(idx[:, 0].max())
        for (q,), c in measure.density.terms:
            if abs(q) > lmax:
                continue
            col = legendre_column(lmax, abs(q), 0.0)
            sign = -1.0 if (q < 0 and abs(q) % 2 == 1) else 1.0
            mask = idx[:, 1] == q
            out[mask] = TWO_PI * c * sign * col[idx[mask, 0]]
        return out

    raise UnsupportedConfiguration(f"no closed form for {catalog.kind} with {measure.kind}")


def fourier_coefficient_closed(measure, index):
    return complex(closed_form_coefficients(measure, [tuple(index)])[0])


# -- geometry of the catalog configurations -----------------------------------

def _wrap(v):
    return np.mod(np.asarray(v, dtype=float) + math.pi, TWO_PI) - math.pi


def _unit_vector(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def ambient_distance(catalog, x, y):
    """Geodesic distance on the catalog manifold; broadcasts over leading axes.

    Torus: Euclidean length of the shortest lattice translate. Sphere:
    ``atan2(|u x v|, u.v)``, which stays accurate for nearby and antipodal points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if catalog.kind == "torus":
        return np.sqrt(np.sum(_wrap(x - y) ** 2, axis=-1))
    u = _unit_vector(x[..., 0], x[..., 1])
    v = _unit_vector(y[..., 0], y[..., 1])
    cross = np.linalg.norm(np.cross(u, v), axis=-1)
    return np.arctan2(cross, np.sum(u * v, axis=-1))


def foot_point(measure, x):
    """Nearest point of the submanifold, as ``(intrinsic coords, ambient point)``."""
    x = np.asarray(x, dtype=float)
    if measure.kind == "point":
        return np.empty(0), np.asarray(measure.location, dtype=float)
    if measure.kind == "full":
        return x.copy(), x.copy()
    if measure.kind == "subtorus":
        y = np.mod(x[:measure.n], TWO_PI)
        return y, np.concatenate([y, measure.offset])
    theta, phi = normalize_sphere_point(*x)
    return np.array([phi]), np.array([0.5 * math.pi, phi])


def submanifold_distance(measure, x):
    """``d_M(x, N)``."""
    x = np.asarray(x, dtype=float)
    if measure.kind == "full":
        return 0.0
    if measure.kind == "subtorus":
        return float(np.sqrt(np.sum(_wrap(x[measure.n:] - np.asarray(measure.offset)) ** 2)))
    if measure.kind == "equator":
        theta, _ = normalize_sphere_point(*x)
        return abs(0.5 * math.pi - theta)
    return float(ambient_distance(measure.ambient, x, measure.location))


def embed(measure, y):
    """Ambient points of intrinsic coordinates ``y`` (shape ``(..., n)``)."""
    y = np.asarray(y, dtype=float)
    if measure.kind == "subtorus":
        off = np.broadcast_to(np.asarray(measure.offset, dtype=float), y.shape[:-1] + (measure.k,))
        return np.concatenate([y, off], axis=-1)
    if measure.kind == "equator":
        return np.stack([np.full(y.shape[:-1], 0.5 * math.pi), y[..., 0]], axis=-1)
    if measure.kind == "full" and measure.ambient.kind == "torus":
        return y
    raise UnsupportedConfiguration(f"no flat intrinsic chart for {measure.kind}")
