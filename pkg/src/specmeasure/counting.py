"""Coefficient tables and the spectral counting function.

``alpha(T) = sum over lambda_j < T of |tau_hat(j)|^2`` is the quantity whose
growth ``T^{k/2} ||psi||^2 / ((4 pi)^{k/2} Gamma(k/2 + 1))`` is being
checked. Tables hold one summed weight per distinct eigenvalue; prefix sums
are kept in double-double form so that jumps of ``alpha`` are recoverable
to full precision.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidArgument, OutOfRange, UnsupportedConfiguration
from .measures import (closed_form_coefficients, density_norm_sq, fourier_coefficient,
                       max_frequency, quadrature_nodes, required_exactness)
from .spectra import DEFAULT_MEMORY_BUDGET, SpectralCatalog, index_arrays
from .summation import compensated_cumsum, segmented_sum


@dataclass(eq=False)
class CoefficientTable:
    catalog: SpectralCatalog
    measure: str  # measure descriptor
    k: int
    norm_sq: float
    lambda_max: float
    lambdas: np.ndarray
    weights: np.ndarray
    # index-resolved data, present only when built with resolve_indices=True
    index_lambdas: np.ndarray = field(default=None, repr=False)
    indices: np.ndarray = field(default=None, repr=False)
    coefficients: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=np.float64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.lambdas.shape != self.weights.shape:
            raise InvalidArgument("lambdas and weights differ in length")
        if np.any(np.diff(self.lambdas) <= 0):
            raise InvalidArgument("levels must be strictly ascending")
        if np.any(self.weights < 0):
            raise InvalidArgument("level weights must be non-negative")

    @cached_property
    def _prefix(self):
        return compensated_cumsum(self.weights)

    @property
    def index_resolved(self):
        return self.coefficients is not None

    def prefix(self, i):
        hi, lo = self._prefix
        return hi[i] + lo[i]

    def total(self):
        return self.prefix(len(self.weights))

    def jumps(self):
        """Jumps of ``alpha`` recovered from the double-double prefix sums."""
        hi, lo = self._prefix
        return np.diff(hi) + np.diff(lo)

    def level_weight(self, lam):
        i = np.searchsorted(self.lambdas, lam)
        if i < len(self.lambdas) and self.lambdas[i] == lam:
            return float(self.weights[i])
        return 0.0

    def same_levels(self, other):
        return (self.lambdas.tobytes() == other.lambdas.tobytes()
                and self.weights.tobytes() == other.weights.tobytes())


def _quadrature_coefficients(measure, indices, lambda_max):
    freq = max_frequency(measure.ambient, lambda_max)
    need = required_exactness(measure, freq)
    sphere_full = measure.kind == "full" and measure.ambient.kind == "sphere2"
    resolution = (need + 2) // 2 if sphere_full else need + 1
    rule = quadrature_nodes(measure, resolution, lambda_max)
    return np.array([fourier_coefficient(measure, tuple(j), rule) for j in indices])


def build_coefficient_table(catalog, measure, lambda_max, resolve_indices=False,
                            memory_budget=DEFAULT_MEMORY_BUDGET):
    """Per-level sums of ``|tau_hat|^2`` for every eigenvalue ``<= lambda_max``.

    Closed-form coefficients are used for catalog pairs, quadrature
    otherwise. With ``resolve_indices`` the per-index coefficients are kept
    too (needed by :func:`specmeasure.heat.heat_flow_eval`).
    """
    if measure.ambient != catalog:
        raise InvalidArgument("measure is not defined on this catalog")
    eigs, idx = index_arrays(catalog, lambda_max, memory_budget)
    try:
        coef = closed_form_coefficients(measure, idx)
    except UnsupportedConfiguration:
        coef = _quadrature_coefficients(measure, idx, lambda_max)
    sq = coef.real**2 + coef.imag**2
    values, level_of = np.unique(eigs, return_inverse=True)
    weights = segmented_sum(sq, level_of, len(values))
    table = CoefficientTable(catalog, measure.describe(), measure.k, density_norm_sq(measure),
                             float(lambda_max), values.astype(np.float64), weights)
    if resolve_indices:
        table.index_lambdas = eigs.astype(np.float64)
        table.indices = idx
        table.coefficients = coef
    return table


def counting_sum(table, T):
    """``alpha(T)``: total weight of levels with eigenvalue strictly below ``T``."""
    if T > table.lambda_max:
        raise OutOfRange(f"T={T} beyond the table's lambda_max={table.lambda_max}",
                         table.lambda_max)
    return table.prefix(int(np.searchsorted(table.lambdas, T, side="left")))


def predicted_counting(k, norm_sq, T):
    """Leading-order prediction ``T^{k/2} norm_sq / ((4 pi)^{k/2} Gamma(k/2 + 1))``."""
    if T < 0 or norm_sq < 0:
        raise InvalidArgument("T and norm_sq must be non-negative")
    if k == 0:
        return float(norm_sq)
    return T ** (k / 2) * norm_sq / ((4.0 * math.pi) ** (k / 2) * math.gamma(k / 2 + 1))


def laplace_transform(table, t):
    """``integral of exp(-t T) d alpha(T)`` as a Stieltjes sum over the jumps of alpha."""
    return math.fsum(table.jumps() * np.exp(-table.lambdas * t))


def midpoint_grid(table, T_min, T_max, count):
    """Log-uniform thresholds in ``[T_min, T_max]`` snapped to eigenvalue midpoints.

    ``alpha`` jumps exactly at eigenvalues, so thresholds sitting halfway
    between consecutive levels are insensitive to the strict inequality.
    """
    mids = 0.5 * (table.lambdas[1:] + table.lambdas[:-1])
    mids = mids[(mids >= T_min * (1 - 1e-12)) & (mids <= T_max)]
    if mids.size == 0:
        raise InvalidArgument(f"no eigenvalue midpoints in [{T_min}, {T_max}]")
    targets = np.geomspace(T_min, T_max, count)
    pos = np.clip(np.searchsorted(mids, targets), 1, max(mids.size - 1, 1))
    left = mids[pos - 1]
    right = mids[np.minimum(pos, mids.size - 1)]
    snapped = np.where(np.abs(targets - left) <= np.abs(right - targets), left, right)
    return np.unique(snapped)


@dataclass
class CountingCurve:
    T: np.ndarray
    alpha: np.ndarray
    predicted: np.ndarray
    ratio: np.ndarray
    flagged: np.ndarray
    window: tuple
    window_ratio: float

    @property
    def top_ratio(self):
        return float(self.ratio[-1])

    def rows(self):
        for row in zip(self.T, self.alpha, self.predicted, self.ratio, self.flagged):
            yield float(row[0]), float(row[1]), float(row[2]), float(row[3]), bool(row[4])


def convergence_diagnostic(table, T_grid, window=None):
    """Sample ``alpha`` against its prediction over ``T_grid``.

    ``window_ratio`` is the mean ratio over grid points inside ``window``
    (default: the top decade of the grid). On a log-uniform grid this is a
    log-uniform Cesaro average, which damps the arithmetic oscillation of
    the raw ratio.
    """
    T = np.sort(np.asarray(T_grid, dtype=float))
    if T.size == 0:
        raise InvalidArgument("empty T grid")
    if T[-1] > table.lambda_max:
        raise OutOfRange(f"T grid reaches {T[-1]} beyond lambda_max={table.lambda_max}",
                         table.lambda_max)
    alpha = np.array([counting_sum(table, x) for x in T])
    pred = np.array([predicted_counting(table.k, table.norm_sq, x) for x in T])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(pred > 0, alpha / pred, np.nan)
    flagged = (pred == 0) & (alpha > 0)
    if window is None:
        window = (T[-1] / 10.0, T[-1])
    inside = (T >= window[0]) & (T <= window[1]) & np.isfinite(ratio)
    window_ratio = float(np.mean(ratio[inside])) if inside.any() else float("nan")
    return CountingCurve(T, alpha, pred, ratio, flagged, tuple(map(float, window)), window_ratio)
