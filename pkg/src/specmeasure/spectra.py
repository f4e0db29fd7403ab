"""Exact Laplace-Beltrami spectra of flat tori and the round 2-sphere.

The torus ``T^m = R^m / (2 pi Z)^m`` has eigenfunctions
``(2 pi)^{-m/2} exp(i k.x)`` for lattice points ``k`` with eigenvalue
``|k|^2``; the unit sphere has the spherical harmonics ``Y_l^q`` with
eigenvalue ``l(l+1)``. Both eigenvalue sets are integers, so levels are
grouped with exact integer arithmetic.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, OutOfRange, ResourceLimitError
from .legendre import legendre_column, legendre_table

TWO_PI = 2.0 * math.pi

DEFAULT_MEMORY_BUDGET = 2 * 1024**3


@dataclass(frozen=True)
class SpectralCatalog:
    """A compact manifold with enumerable exact spectrum.

    Use :meth:`torus` or :meth:`sphere2` rather than the constructor.
    """

    kind: str
    dimension: int

    def __post_init__(self):
        if self.kind not in ("torus", "sphere2"):
            raise InvalidArgument(f"unknown catalog kind {self.kind!r}")
        if self.dimension < 1:
            raise InvalidArgument("dimension must be >= 1")
        if self.kind == "sphere2" and self.dimension != 2:
            raise InvalidArgument("the sphere catalog is two-dimensional")

    @classmethod
    def torus(cls, m):
        return cls("torus", int(m))

    @classmethod
    def sphere2(cls):
        return cls("sphere2", 2)

    @property
    def volume(self):
        if self.kind == "torus":
            return TWO_PI**self.dimension
        return 4.0 * math.pi

    @property
    def index_width(self):
        """Number of integers in one eigen-index."""
        return self.dimension if self.kind == "torus" else 2

    def describe(self):
        return f"torus{self.dimension}" if self.kind == "torus" else "sphere2"


@dataclass(frozen=True)
class EigenLevel:
    lam: int
    indices: np.ndarray  # shape (multiplicity, index_width)

    @property
    def multiplicity(self):
        return len(self.indices)


def eigenvalue(catalog, index):
    """Eigenvalue of one index: ``|k|^2`` on the torus, ``l(l+1)`` on the sphere."""
    if catalog.kind == "torus":
        return sum(int(c) * int(c) for c in index)
    l, q = (int(v) for v in index)
    if l < 0 or abs(q) > l:
        raise InvalidArgument(f"invalid spherical index {(l, q)}")
    return l * (l + 1)


def isqrt_array(x):
    """Elementwise floor(sqrt(x)) for non-negative int64 arrays, exact."""
    x = np.asarray(x, dtype=np.int64)
    h = np.floor(np.sqrt(x.astype(float))).astype(np.int64)
    h = np.where(h * h > x, h - 1, h)
    h = np.where((h + 1) * (h + 1) <= x, h + 1, h)
    return h


def _disc_points(radius_sq):
    r = math.isqrt(radius_sq)
    a = np.arange(-r, r + 1, dtype=np.int64)
    h = isqrt_array(radius_sq - a * a)
    counts = 2 * h + 1
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    total = int(counts.sum())
    b = np.arange(total, dtype=np.int64) - np.repeat(starts, counts) - np.repeat(h, counts)
    return np.column_stack([np.repeat(a, counts), b])


def _ball_points(m, radius_sq):
    # slabs over the leading coordinate; the last two axes are vectorized
    if radius_sq < 0:
        return np.empty((0, m), dtype=np.int64)
    if m == 1:
        r = math.isqrt(radius_sq)
        return np.arange(-r, r + 1, dtype=np.int64)[:, None]
    if m == 2:
        return _disc_points(radius_sq)
    r = math.isqrt(radius_sq)
    slabs = []
    for a in range(-r, r + 1):
        sub = _ball_points(m - 1, radius_sq - a * a)
        slabs.append(np.column_stack([np.full(len(sub), a, dtype=np.int64), sub]))
    return np.concatenate(slabs)


def estimate_index_count(catalog, lambda_max):
    if catalog.kind == "sphere2":
        lmax = math.isqrt(int(lambda_max)) + 1
        return (lmax + 1) ** 2
    m = catalog.dimension
    unit_ball = math.pi ** (m / 2) / math.gamma(m / 2 + 1)
    return int(unit_ball * (math.sqrt(lambda_max) + math.sqrt(m)) ** m) + 1


def index_arrays(catalog, lambda_max, memory_budget=DEFAULT_MEMORY_BUDGET):
    """All indices with eigenvalue <= ``lambda_max``, sorted by (eigenvalue, index).

    Returns ``(eigs, indices)``: an int64 eigenvalue per index and an int64
    array of shape ``(count, index_width)``.
    """
    if not lambda_max > 0:
        raise InvalidArgument(f"lambda_max must be positive, got {lambda_max}")
    width = catalog.index_width
    estimate = estimate_index_count(catalog, lambda_max) * (width + 1) * 8 * 3
    if estimate > memory_budget:
        raise ResourceLimitError(
            f"enumeration up to lambda_max={lambda_max} needs about {estimate} bytes "
            f"(budget {memory_budget})", estimate)
    bound = int(math.floor(lambda_max))
    if catalog.kind == "torus":
        pts = _ball_points(catalog.dimension, bound)
        eigs = np.einsum("ij,ij->i", pts, pts)
    else:
        lmax = (math.isqrt(4 * bound + 1) - 1) // 2
        ls = np.arange(lmax + 1, dtype=np.int64)
        counts = 2 * ls + 1
        l_rep = np.repeat(ls, counts)
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        q = np.arange(l_rep.size, dtype=np.int64) - np.repeat(starts, counts) - l_rep
        pts = np.column_stack([l_rep, q])
        eigs = l_rep * (l_rep + 1)
    keys = tuple(pts[:, j] for j in range(width - 1, -1, -1)) + (eigs,)
    order = np.lexsort(keys)
    return eigs[order], pts[order]


def enumerate_levels(catalog, lambda_max, memory_budget=DEFAULT_MEMORY_BUDGET):
    """Distinct eigenvalues up to ``lambda_max`` with their complete index lists."""
    eigs, pts = index_arrays(catalog, lambda_max, memory_budget)
    values, starts = np.unique(eigs, return_index=True)
    ends = np.append(starts[1:], len(eigs))
    return [EigenLevel(int(v), pts[s:e]) for v, s, e in zip(values, starts, ends)]


def normalize_sphere_point(theta, phi):
    theta = math.fmod(float(theta), TWO_PI)
    if theta < 0:
        theta += TWO_PI
    if theta > math.pi:
        theta = TWO_PI - theta
        phi = float(phi) + math.pi
    return theta, math.fmod(float(phi), TWO_PI) % TWO_PI


def sphere_harmonic(l, q, theta, phi):
    """Orthonormal complex ``Y_l^q(theta, phi)`` (Condon-Shortley phase), vectorized."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    aq = abs(q)
    x = np.where(theta == 0.5 * math.pi, 0.0, np.cos(theta))
    s = np.where((theta == 0.0) | (theta == math.pi), 0.0, np.sin(theta))
    p = legendre_column(l, aq, x, s)[l]
    if q < 0 and aq % 2 == 1:
        p = -p
    return p * np.exp(1j * q * phi)


def torus_mode(kappa, x):
    """``(2 pi)^{-m/2} exp(i kappa.x)`` for points ``x`` of shape ``(..., m)``."""
    kappa = np.asarray(kappa, dtype=float)
    x = np.asarray(x, dtype=float)
    phase = np.mod(x, TWO_PI) @ kappa
    return TWO_PI ** (-len(kappa) / 2) * np.exp(1j * phase)


def eigenfunction_values(catalog, indices, point):
    """Values of many eigenfunctions at one point; ``indices`` is ``(P, index_width)``."""
    idx = np.asarray(indices, dtype=np.int64).reshape(-1, catalog.index_width)
    if catalog.kind == "torus":
        x = np.mod(np.asarray(point, dtype=float), TWO_PI)
        return TWO_PI ** (-catalog.dimension / 2) * np.exp(1j * (idx.astype(float) @ x))
    out = np.zeros(len(idx), dtype=complex)
    if len(idx) == 0:
        return out
    theta, phi = normalize_sphere_point(*point)
    x = 0.0 if theta == 0.5 * math.pi else math.cos(theta)
    s = 0.0 if theta in (0.0, math.pi) else math.sin(theta)
    table = legendre_table(int(idx[:, 0].max()), x, s)
    l, q = idx[:, 0], idx[:, 1]
    p = table[l, np.abs(q)]
    p = np.where((q < 0) & (np.abs(q) % 2 == 1), -p, p)
    return p * np.exp(1j * q * phi)


def eval_eigenfunction(catalog, index, point):
    """Value of the orthonormal eigenfunction ``index`` at ``point``.

    Torus points are angle tuples (wrapped mod 2 pi). Sphere points are
    ``(theta, phi)`` with colatitude ``theta``; out-of-range coordinates are
    folded back onto the sphere, and the poles give exactly 0 for ``q != 0``.
    """
    if catalog.kind == "torus":
        if len(index) != catalog.dimension or len(point) != catalog.dimension:
            raise InvalidArgument("index and point must match the torus dimension")
        return complex(torus_mode(index, point))
    l, q = (int(v) for v in index)
    if l < 0 or abs(q) > l:
        raise InvalidArgument(f"invalid spherical index {(l, q)}")
    theta, phi = normalize_sphere_point(*point)
    if q != 0 and theta in (0.0, math.pi):
        return 0j
    return complex(sphere_harmonic(l, q, theta, phi))


def _count_ball(m, bound):
    # lattice points with |k|^2 <= bound
    if bound < 0:
        return 0
    r = math.isqrt(bound)
    if m == 1:
        return 2 * r + 1
    if m == 2:
        a = np.arange(-r, r + 1, dtype=np.int64)
        return int(np.sum(2 * isqrt_array(bound - a * a) + 1))
    return sum(_count_ball(m - 1, bound - a * a) for a in range(-r, r + 1))


def weyl_count(catalog, T, lambda_max=None):
    """Number of eigenvalues strictly below ``T``, counted with multiplicity.

    ``lambda_max`` is the top of the enumerated range the caller works with;
    asking beyond it is an :class:`OutOfRange` error.
    """
    if lambda_max is not None and T > lambda_max:
        raise OutOfRange(f"T={T} exceeds the enumerated range lambda_max={lambda_max}",
                         lambda_max)
    if T <= 0:
        return 0
    bound = math.ceil(T) - 1
    if catalog.kind == "torus":
        return _count_ball(catalog.dimension, bound)
    lmax = (math.isqrt(4 * bound + 1) - 1) // 2
    return (lmax + 1) ** 2


def weyl_constant(catalog):
    """Leading Weyl coefficient ``vol / ((4 pi)^{m/2} Gamma(m/2 + 1))``."""
    m = catalog.dimension
    return catalog.volume / ((4.0 * math.pi) ** (m / 2) * math.gamma(m / 2 + 1))
