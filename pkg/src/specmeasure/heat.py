"""Heat flow of a measure, evaluated by eigen-expansion.

``||f_{t/2}||^2 = sum_j |tau_hat(j)|^2 exp(-lambda_j t)`` is the Laplace
transform of ``d alpha``; its small-``t`` behaviour ``(4 pi t)^{-k/2}
||psi||^2`` is what the Tauberian step turns into the counting asymptotic.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from .errors import GridRejected, InvalidArgument, TruncationWarning, UnsupportedConfiguration
from .spectra import eigenfunction_values

# exp(-20) ~ 2e-9 per unit of envelope beyond lambda_max
TRUNCATION_FACTOR = 20.0


def tail_estimate(table, t):
    """Envelope estimate of the weight beyond ``lambda_max`` (not a certified bound).

    Fits ``alpha(T) ~ C T^{k/2}`` with ``C = 1.5 alpha(lambda_max) /
    lambda_max^{k/2}`` and integrates ``exp(-t T)`` against it above the cutoff.
    """
    lam_max = table.lambda_max
    a = table.k / 2
    c = 1.5 * table.total() / lam_max**a
    return float(c * t ** (-a) * gammaincc(a + 1.0, t * lam_max))


def heat_norm_sq(table, t, warn=True):
    """``(||f_{t/2}||^2, tail_estimate)`` from a level table."""
    if not t > 0:
        raise InvalidArgument(f"t must be positive, got {t}")
    if warn and t * table.lambda_max < TRUNCATION_FACTOR:
        warnings.warn(f"t*lambda_max = {t * table.lambda_max:.3g} < {TRUNCATION_FACTOR}; "
                      "truncation may dominate", TruncationWarning, stacklevel=2)
    value = math.fsum(table.weights * np.exp(-table.lambdas * t))
    return value, tail_estimate(table, t)


def heat_flow_eval(table, t, x):
    """``f_t(x) = sum_j exp(-lambda_j t) tau_hat(j) phi_j(x)``, truncated at ``lambda_max``.

    For a delta measure at ``P`` this is the heat kernel ``k_t(x, P)``.
    Requires a table built with ``resolve_indices=True``.
    """
    if not t > 0:
        raise InvalidArgument(f"t must be positive, got {t}")
    if not table.index_resolved:
        raise UnsupportedConfiguration(
            "per-index coefficients unavailable; rebuild the table with resolve_indices=True")
    phi = eigenfunction_values(table.catalog, table.indices, x)
    terms = np.exp(-table.index_lambdas * t) * table.coefficients * phi
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


@dataclass
class HeatCurve:
    t: np.ndarray
    value: np.ndarray
    tail_bound: np.ndarray
    predicted: np.ndarray
    ratio: np.ndarray
    k: int

    @property
    def drift(self):
        """Spread of the ratio across the grid."""
        return float(np.max(self.ratio) - np.min(self.ratio))

    def rows(self):
        for row in zip(self.t, self.value, self.tail_bound, self.predicted, self.ratio):
            yield tuple(float(v) for v in row)


def heat_diagnostic(table, t_grid):
    """Compare ``||f_{t/2}||^2`` with ``(4 pi t)^{-k/2} ||psi||^2`` on ``t_grid``.

    Every ``t`` must satisfy ``t * lambda_max >= 20`` so truncation stays
    negligible; otherwise the grid is rejected with the smallest admissible ``t``.
    """
    t = np.sort(np.asarray(t_grid, dtype=float))
    if t.size == 0:
        raise InvalidArgument("empty t grid")
    t_min = TRUNCATION_FACTOR / table.lambda_max
    if t[0] < t_min * (1 - 1e-12):
        raise GridRejected(f"t={t[0]} violates t*lambda_max >= {TRUNCATION_FACTOR}; "
                           f"smallest admissible t is {t_min}", t_min)
    pairs = [heat_norm_sq(table, x, warn=False) for x in t]
    value = np.array([p[0] for p in pairs])
    tail = np.array([p[1] for p in pairs])
    pred = (4.0 * math.pi * t) ** (-table.k / 2) * table.norm_sq
    return HeatCurve(t, value, tail, pred, value / pred, table.k)


@dataclass
class KaramataResult:
    exponent: float          # free log-log fit of value ~ A t^{-exponent}
    amplitude: float         # A with the exponent held at k/2
    fit_residual: float      # rms log residual of the free fit
    T: np.ndarray            # counting samples in the comparison window
    alpha: np.ndarray
    alpha_pred: np.ndarray
    max_rel_deviation: float
    status: str              # "ok" or "inconclusive"


def karamata_crosscheck(heat_curve, counting_curve, k, residual_threshold=0.05):
    """Carry the heat asymptotic over to the counting function.

    Fits ``value ~ A t^{-k/2}`` on the heat curve, predicts
    ``alpha(T) ~ A T^{k/2} / Gamma(k/2 + 1)`` and reports the largest relative
    deviation from the measured ``alpha`` over the top decade of the counting
    curve. A poor power-law fit yields status ``"inconclusive"``.
    """
    logt = np.log(heat_curve.t)
    logv = np.log(heat_curve.value)
    slope, intercept = np.polyfit(logt, logv, 1)
    resid = logv - (slope * logt + intercept)
    rms = float(np.sqrt(np.mean(resid**2)))
    amplitude = float(np.exp(np.mean(logv + (k / 2) * logt)))

    T = counting_curve.T
    top = (T >= T[-1] / 10.0) & (counting_curve.alpha > 0)
    T_top = T[top]
    alpha = counting_curve.alpha[top]
    alpha_pred = amplitude * T_top ** (k / 2) / math.gamma(k / 2 + 1)
    dev = float(np.max(np.abs(alpha_pred / alpha - 1.0))) if alpha.size else float("nan")
    status = "ok" if rms <= residual_threshold and alpha.size else "inconclusive"
    return KaramataResult(float(-slope), amplitude, rms, T_top, alpha, alpha_pred, dev, status)
