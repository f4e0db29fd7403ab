"""Config-driven experiment runs.

A run builds (or loads from cache) the coefficient table, then executes the
requested suites in dependency order: counting, heat, karamata; the
curvature suites need no table. Every suite writes one CSV whose numbers
use the shortest round-trip float representation, so reruns are
byte-identical. Timing and provenance go to ``report.json`` only.
"""

import hashlib
import json
import logging
import math
import os
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .counting import build_coefficient_table, convergence_diagnostic, midpoint_grid
from .curvature import (laplace_rate, hessian_envelope, model_shape_value,
                        probe_at_distance, random_profile, rho_hessian_fd, riccati_integrate)
from .errors import TableFormatError, TableVersionMismatch
from .heat import heat_diagnostic, karamata_crosscheck
from .tablefile import decode_table, encode_table

log = logging.getLogger(__name__)

CACHE_ENV = "SPECMEASURE_CACHE"


class CacheWarning(UserWarning):
    pass


# -- cache --------------------------------------------------------------------

def cache_root(root=None):
    if root is not None:
        return Path(root)
    env = os.environ.get(CACHE_ENV)
    return Path(env) if env else Path.home() / ".cache" / "specmeasure"


def cache_key(catalog, measure, lambda_max):
    text = f"{catalog.describe()}\n{measure.describe()}\n{float(lambda_max).hex()}"
    return hashlib.sha256(text.encode()).hexdigest()


def cache_path(key, root=None):
    return cache_root(root) / f"{key}.tbl"


def cache_store(key, table, root=None):
    path = cache_path(key, root)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(encode_table(table, key))
    tmp.replace(path)
    return path


def cache_lookup(key, root=None):
    """The cached table for ``key``, or ``None``.

    A stale format version counts as absent. A damaged file (short, bad
    checksum, wrong key in the header) also counts as absent and warns.
    """
    path = cache_path(key, root)
    if not path.is_file():
        return None
    try:
        table, header = decode_table(path.read_bytes())
    except TableVersionMismatch:
        return None
    except (TableFormatError, KeyError, ValueError) as exc:
        warnings.warn(f"discarding corrupt cache entry {path.name}: {exc}", CacheWarning,
                      stacklevel=2)
        return None
    if header.get("key") != key:
        warnings.warn(f"discarding cache entry {path.name}: header hash mismatch", CacheWarning,
                      stacklevel=2)
        return None
    return table


def cache_list(root=None):
    base = cache_root(root)
    return sorted(base.glob("*.tbl")) if base.is_dir() else []


def cache_clear(root=None):
    entries = cache_list(root)
    for p in entries:
        p.unlink()
    return len(entries)


# -- output helpers -----------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


PLOT_TEMPLATE = '''"""Plot {title} from {csv}. Run: python {script}"""
import csv
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "{csv}")) as fh:
    rows = list(csv.reader(fh))[1:]
x = [float(r[{x}]) for r in rows]
y = [float(r[{y}]) for r in rows]
plt.semilogx(x, y, ".-")
plt.axhline(1.0, color="grey", lw=0.8)
plt.xlabel("{xlabel}")
plt.ylabel("{ylabel}")
plt.title("{title}")
plt.savefig(os.path.join(here, "{stem}.png"), dpi=150)
'''


def write_plot_script(out, stem, csv_name, x, y, xlabel, ylabel, title):
    """Standalone matplotlib script plotting column ``y`` against column ``x``."""
    script = f"plot_{stem}.py"
    (out / script).write_text(PLOT_TEMPLATE.format(
        title=title, csv=csv_name, script=script, x=x, y=y, xlabel=xlabel,
        ylabel=ylabel, stem=stem))
    return out / script


# -- runs ---------------------------------------------------------------------

@dataclass
class RunReport:
    csv: dict = field(default_factory=dict)
    plots: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(s.get("pass") is not False for s in self.summary.values())

    def to_json(self):
        return json.dumps({"csv": self.csv, "plots": self.plots, "summary": self.summary,
                           "provenance": self.provenance, "passed": self.passed},
                          indent=2, sort_keys=True, default=float)


def _load_or_build(cfg, use_cache, root):
    key = cache_key(cfg.catalog, cfg.measure, cfg.lambda_max)
    policy = cfg.cache_policy if use_cache else "off"
    if policy == "use":
        table = cache_lookup(key, root)
        if table is not None:
            log.info("cache hit %s", key[:12])
            return table, "hit"
    log.info("building table for %s up to %g", cfg.measure.describe(), cfg.lambda_max)
    table = build_coefficient_table(cfg.catalog, cfg.measure, cfg.lambda_max)
    if policy != "off":
        cache_store(key, table, root)
    return table, "miss" if policy != "off" else "off"


def _counting_suite(cfg, table, tol, out, report):
    T_min, T_max, points = cfg.counting_grid
    curve = convergence_diagnostic(table, midpoint_grid(table, T_min, T_max, points))
    write_csv(out / "counting.csv", ["T [1/length^2]", "alpha [mass^2]", "predicted [mass^2]", "ratio [1]", "flagged [bool]"], curve.rows())
    report.csv["counting"] = "counting.csv"
    report.plots["counting"] = write_plot_script(
        out, "counting", "counting.csv", 0, 3, "T", "alpha / predicted",
        f"{cfg.name}: counting ratio").name
    top_dev = abs(curve.top_ratio - 1.0)
    win_dev = abs(curve.window_ratio - 1.0)
    report.summary["counting"] = {
        "top_T": float(curve.T[-1]), "top_ratio": curve.top_ratio,
        "window": list(curve.window), "window_ratio": curve.window_ratio,
        "tolerance": tol["counting"], "pass": bool(max(top_dev, win_dev) <= tol["counting"]),
    }
    return curve


def _heat_suite(cfg, table, tol, out, report):
    t_min, t_max, points = cfg.heat_grid
    curve = heat_diagnostic(table, np.geomspace(t_min, t_max, points))
    write_csv(out / "heat.csv", ["t [length^2]", "norm_sq [mass^2]", "tail_bound [mass^2]", "predicted [mass^2]", "ratio [1]"],
              curve.rows())
    report.csv["heat"] = "heat.csv"
    report.plots["heat"] = write_plot_script(
        out, "heat", "heat.csv", 0, 4, "t", "heat norm / predicted",
        f"{cfg.name}: heat ratio").name
    dev = float(np.max(np.abs(curve.ratio - 1.0)))
    report.summary["heat"] = {"max_ratio_deviation": dev, "drift": curve.drift,
                              "tolerance": tol["heat"], "pass": bool(dev <= tol["heat"])}
    return curve


def exponent_deviation(exponent, k):
    """Relative deviation of a fitted exponent from ``k/2`` (absolute when ``k = 0``)."""
    half = k / 2
    return abs(exponent - half) / half if half else abs(exponent)


def _karamata_suite(cfg, heat_curve, counting_curve, tol, out, report):
    k = cfg.measure.k
    res = karamata_crosscheck(heat_curve, counting_curve, k)
    rows = ((T, a, p, p / a - 1.0) for T, a, p in zip(res.T, res.alpha, res.alpha_pred))
    write_csv(out / "karamata.csv", ["T [1/length^2]", "alpha [mass^2]", "alpha_pred [mass^2]", "rel_dev [1]"], rows)
    report.csv["karamata"] = "karamata.csv"
    exp_dev = exponent_deviation(res.exponent, k)
    ok = exp_dev <= tol["karamata_exponent"] and res.max_rel_deviation <= tol["karamata_alpha"]
    report.summary["karamata"] = {
        "exponent": res.exponent, "expected_exponent": k / 2, "amplitude": res.amplitude,
        "fit_residual": res.fit_residual, "max_rel_deviation": res.max_rel_deviation,
        "status": res.status, "pass": None if res.status == "inconclusive" else bool(ok),
    }


def _curvature_suite(cfg, tol, out, report):
    rc = cfg.riccati
    rows = []
    closed_err = 0.0
    for K in (-1.0, 0.0, 1.0):
        tr = riccati_integrate(K, rc["s_start"], rc["s_end"], rc["steps"], lam=1.0)
        ref = np.array([model_shape_value(K, s) for s in tr.s])
        closed_err = max(closed_err, float(np.max(np.abs(tr.k - ref))))
        rows += [(f"K={K:g}", s, k, r, lo, hi) for s, k, r, lo, hi
                 in zip(tr.s, tr.k, ref, tr.lo, tr.hi)]
    rng = np.random.default_rng(rc["seed"])
    violation = 0.0
    for i in range(rc["profiles"]):
        tr = riccati_integrate(random_profile(rng, 1.0), rc["s_start"], min(rc["s_end"], 1.5),
                               rc["steps"], lam=1.0)
        violation = max(violation, tr.envelope_violation())
        rows += [(f"random{i}", s, k, math.nan, lo, hi) for s, k, lo, hi
                 in zip(tr.s, tr.k, tr.lo, tr.hi)]
    write_csv(out / "riccati.csv", ["profile", "s [length]", "k [1/length]", "closed_form [1/length]", "lo [1/length]", "hi [1/length]"], rows)

    measure = cfg.measure
    hrows = []
    hess_ok = True
    for d in cfg.probe_distances:
        probe = probe_at_distance(measure, d, along=cfg.probe_along)
        value, est = rho_hessian_fd(probe)
        env = hessian_envelope(d, measure.sff_bound, measure.curvature_bound)
        slack = est + tol["hessian"]
        hess_ok &= env.lo - slack <= value <= env.hi + slack
        hrows.append((d, value, est, env.lo, env.hi))
    write_csv(out / "hessian.csv", ["d [length]", "hessian [1]", "error_estimate [1]", "lo [1]", "hi [1]"], hrows)
    report.csv["riccati"] = "riccati.csv"
    report.csv["hessian"] = "hessian.csv"
    report.summary["curvature"] = {
        "riccati_closed_form_error": closed_err, "envelope_violation": violation,
        "hessian_within_bounds": bool(hess_ok),
        "pass": bool(closed_err <= tol["riccati"] and violation <= tol["envelope"] and hess_ok),
    }


def _laplace_suite(cfg, tol, out, report):
    probe = probe_at_distance(cfg.measure, cfg.laplace_distance, along=cfg.probe_along)
    fit = laplace_rate(probe, cfg.laplace_density, np.sort(cfg.laplace_t)[::-1])
    rows = zip(fit.t, fit.value, fit.target, fit.error)
    write_csv(out / "laplace.csv", ["t [length^2]", "value [1]", "limit_target [1]", "abs_error [1]"], rows)
    report.csv["laplace_method"] = "laplace.csv"
    ok = fit.error[-1] <= tol["laplace"] and fit.exponent >= 0.4
    report.summary["laplace_method"] = {
        "final_error": float(fit.error[-1]), "rate_exponent": fit.exponent,
        "sqrt_t_constant": fit.constant, "pass": bool(ok),
    }


def run_experiment(cfg, out_dir=None, use_cache=True, cache_dir=None, profile="default"):
    """Execute the configured suites and write CSVs, plot scripts and ``report.json``."""
    started = time.perf_counter()
    tol = cfg.tolerances(profile)
    out = Path(out_dir or cfg.output_dir or Path("out") / cfg.name)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport()
    suites = set(cfg.suites)
    cache_state = None

    if suites & {"counting", "heat", "karamata"}:
        table, cache_state = _load_or_build(cfg, use_cache, cache_dir)
        counting_curve = heat_curve = None
        if suites & {"counting", "karamata"}:
            counting_curve = _counting_suite(cfg, table, tol, out, report)
        if suites & {"heat", "karamata"}:
            heat_curve = _heat_suite(cfg, table, tol, out, report)
        if "karamata" in suites:
            _karamata_suite(cfg, heat_curve, counting_curve, tol, out, report)
    if "curvature" in suites:
        _curvature_suite(cfg, tol, out, report)
    if "laplace_method" in suites:
        _laplace_suite(cfg, tol, out, report)

    report.provenance = {
        "config": cfg.name, "config_sha256": cfg.digest(), "version": __version__,
        "tolerance_profile": profile, "cache": cache_state,
        "wall_time_s": time.perf_counter() - started,
    }
    (out / "report.json").write_text(report.to_json())
    return report
