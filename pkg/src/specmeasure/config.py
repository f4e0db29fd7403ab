"""Experiment configuration files.

Grammar: one ``key = value`` assignment per line; ``#`` starts a comment;
blank lines are ignored; keys are dotted lower-case names. Lists are
comma-separated. Densities are ``;``-separated terms ``freq:coef`` where
``freq`` is a comma-separated integer tuple (``l,q`` for sphere
expansions) and ``coef`` a Python complex literal, e.g.
``0,0:1; 1,0:0.5; -1,0:0.5``.

Recognised keys (defaults in parentheses)::

    name                      run label (file stem)
    catalog.kind              torus | sphere2
    catalog.dimension         torus dimension (2)
    measure.kind              point | subtorus | equator | full
    measure.location          point coordinates (origin)
    measure.weight            point weight (1)
    measure.dimension         sub-torus dimension (1)
    measure.offset            sub-torus normal coordinates (zeros)
    measure.density           density terms (constant 1)
    lambda_max                spectral cutoff (required for counting/heat/karamata)
    counting.T_min/T_max/points   log-uniform counting grid, midpoint-snapped
    heat.t_min/t_max/points       log-uniform heat grid
    suites                    subset of counting, heat, karamata, curvature, laplace_method
    output.dir                output directory (out/<name>)
    cache.policy              use | refresh | off (use)
    probe.distances           Hessian probe distances (0.05, 0.10, ..., 0.50)
    probe.along               intrinsic location of the probes (0.7)
    laplace.t                 Laplace-method times (1e-2, 1e-3, 1e-4)
    laplace.distance          Laplace-method probe distance (0.3)
    laplace.density           g on N (constant 1)
    riccati.profiles/seed     random curvature profiles (20, 0)
    riccati.s_start/s_end/steps   (1e-3, 1.5, 200)
    tolerance.<check>         override one tolerance of the active profile
"""

import hashlib
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError, InvalidArgument
from .heat import TRUNCATION_FACTOR
from .measures import (SphPoly, TrigPoly, equator_measure, full_measure, point_measure,
                       subtorus_measure)
from .spectra import SpectralCatalog

SUITES = ("counting", "heat", "karamata", "curvature", "laplace_method")
TABLE_SUITES = ("counting", "heat", "karamata")

TOLERANCE_PROFILES = {
    "default": {
        "counting": 0.05,
        "heat": 0.03,
        "karamata_exponent": 0.02,
        "karamata_alpha": 0.03,
        "riccati": 1e-6,
        "envelope": 1e-9,
        "hessian": 1e-9,
        "laplace": 1e-2,
    },
    "strict": {
        "counting": 0.01,
        "heat": 0.01,
        "karamata_exponent": 0.01,
        "karamata_alpha": 0.02,
        "riccati": 1e-8,
        "envelope": 1e-10,
        "hessian": 1e-10,
        "laplace": 5e-3,
    },
}

KNOWN_KEYS = {
    "name", "catalog.kind", "catalog.dimension", "measure.kind", "measure.location",
    "measure.weight", "measure.dimension", "measure.offset", "measure.density",
    "lambda_max", "counting.T_min", "counting.T_max", "counting.points", "heat.t_min",
    "heat.t_max", "heat.points", "suites", "output.dir", "cache.policy",
    "probe.distances", "probe.along", "laplace.t", "laplace.distance", "laplace.density",
    "riccati.profiles", "riccati.seed", "riccati.s_start", "riccati.s_end", "riccati.steps",
}


def parse_text(text, source="<config>"):
    """Parse the key-value grammar into an ordered dict of raw strings."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}", "expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not all(p.replace("_", "").isalnum() for p in key.split(".")):
            raise ConfigError(f"{source}:{lineno}", f"malformed key {key!r}")
        if key in values:
            raise ConfigError(key, f"assigned twice (line {lineno})")
        values[key] = value
    return values


def _float(raw, key):
    try:
        return float(raw[key])
    except ValueError:
        raise ConfigError(key, f"not a number: {raw[key]!r}") from None


def _int(raw, key):
    try:
        return int(raw[key])
    except ValueError:
        raise ConfigError(key, f"not an integer: {raw[key]!r}") from None


def _floats(raw, key):
    try:
        return tuple(float(v) for v in raw[key].split(",") if v.strip())
    except ValueError:
        raise ConfigError(key, f"not a list of numbers: {raw[key]!r}") from None


def parse_terms(text, key="measure.density"):
    """``"1,0:0.5; -1,0:0.5"`` -> ``{(1, 0): 0.5, (-1, 0): 0.5}``."""
    terms = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ConfigError(key, f"term {chunk!r} is not 'freq:coef'")
        freq, coef = chunk.split(":", 1)
        try:
            f = tuple(int(v) for v in freq.split(","))
            c = complex(coef.strip().replace(" ", ""))
        except ValueError:
            raise ConfigError(key, f"cannot read term {chunk!r}") from None
        terms[f] = terms.get(f, 0) + c
    if not terms:
        raise ConfigError(key, "no density terms")
    return terms


@dataclass
class ExperimentConfig:
    raw: dict
    name: str
    catalog: SpectralCatalog
    measure: object
    suites: tuple
    lambda_max: float = None
    counting_grid: tuple = None  # (T_min, T_max, points)
    heat_grid: tuple = None      # (t_min, t_max, points)
    output_dir: str = None
    cache_policy: str = "use"
    probe_distances: tuple = tuple(round(0.05 * i, 2) for i in range(1, 11))
    probe_along: float = 0.7
    laplace_t: tuple = (1e-2, 1e-3, 1e-4)
    laplace_distance: float = 0.3
    laplace_density: object = None
    riccati: dict = field(default_factory=lambda: {"profiles": 20, "seed": 0,
                                                   "s_start": 1e-3, "s_end": 1.5, "steps": 200})
    tolerance_overrides: dict = field(default_factory=dict)

    def tolerances(self, profile="default"):
        if profile not in TOLERANCE_PROFILES:
            raise ConfigError("tolerance-profile", f"unknown profile {profile!r}")
        tol = dict(TOLERANCE_PROFILES[profile])
        tol.update(self.tolerance_overrides)
        return tol

    def digest(self):
        text = "\n".join(f"{k}={self.raw[k]}" for k in sorted(self.raw))
        return hashlib.sha256(text.encode()).hexdigest()


def _build_measure(raw, catalog):
    kind = raw.get("measure.kind", "point")
    m = catalog.dimension
    try:
        if kind == "point":
            loc = _floats(raw, "measure.location") if "measure.location" in raw else (0.0,) * m
            weight = _float(raw, "measure.weight") if "measure.weight" in raw else 1.0
            return point_measure(catalog, loc, weight)
        density_terms = parse_terms(raw["measure.density"]) if "measure.density" in raw else None
        if kind == "subtorus":
            n = _int(raw, "measure.dimension") if "measure.dimension" in raw else 1
            offset = _floats(raw, "measure.offset") if "measure.offset" in raw else None
            density = TrigPoly.from_dict(n, density_terms) if density_terms else None
            return subtorus_measure(catalog, n, offset, density)
        if kind == "equator":
            density = TrigPoly.from_dict(1, density_terms) if density_terms else None
            return equator_measure(density)
        if kind == "full":
            if catalog.kind == "torus":
                density = TrigPoly.from_dict(m, density_terms or {(0,) * m: 1.0})
            else:
                density = SphPoly.from_dict(density_terms or {(0, 0): 1.0})
            return full_measure(catalog, density)
    except ConfigError:
        raise
    except (InvalidArgument, NotImplementedError) as exc:
        raise ConfigError("measure", str(exc)) from None
    raise ConfigError("measure.kind", f"unknown submanifold kind {kind!r}")


def _grid(raw, prefix, lo_key, hi_key):
    keys = [f"{prefix}.{lo_key}", f"{prefix}.{hi_key}", f"{prefix}.points"]
    missing = [k for k in keys if k not in raw]
    if missing:
        raise ConfigError(missing[0], "required by the selected suites")
    lo, hi, points = _float(raw, keys[0]), _float(raw, keys[1]), _int(raw, keys[2])
    if not 0 < lo < hi:
        raise ConfigError(keys[0], f"need 0 < {lo_key} < {hi_key}")
    if points < 2:
        raise ConfigError(keys[2], "need at least two grid points")
    return lo, hi, points


def build_config(raw, default_name="experiment"):
    """Validate raw key-values into an :class:`ExperimentConfig`.

    Every validity precondition of the selected suites is enforced here,
    before any computation starts.
    """
    for key in raw:
        if key not in KNOWN_KEYS and not key.startswith("tolerance."):
            raise ConfigError(key, "unknown key")
    name = raw.get("name", default_name)

    kind = raw.get("catalog.kind")
    if kind not in ("torus", "sphere2"):
        raise ConfigError("catalog.kind", f"expected torus or sphere2, got {kind!r}")
    if kind == "torus":
        dim = _int(raw, "catalog.dimension") if "catalog.dimension" in raw else 2
        if dim < 1:
            raise ConfigError("catalog.dimension", "must be >= 1")
        catalog = SpectralCatalog.torus(dim)
    else:
        if "catalog.dimension" in raw and _int(raw, "catalog.dimension") != 2:
            raise ConfigError("catalog.dimension", "the sphere catalog is two-dimensional")
        catalog = SpectralCatalog.sphere2()
    measure = _build_measure(raw, catalog)

    suites = tuple(s.strip() for s in raw.get("suites", "").split(",") if s.strip())
    for s in suites:
        if s not in SUITES:
            raise ConfigError("suites", f"unknown suite {s!r}")
    if len(set(suites)) != len(suites):
        raise ConfigError("suites", "suite listed twice")

    cfg = ExperimentConfig(raw, name, catalog, measure, suites)
    cfg.output_dir = raw.get("output.dir")
    cfg.cache_policy = raw.get("cache.policy", "use")
    if cfg.cache_policy not in ("use", "refresh", "off"):
        raise ConfigError("cache.policy", "expected use, refresh or off")

    needs_table = any(s in TABLE_SUITES for s in suites)
    if needs_table:
        if "lambda_max" not in raw:
            raise ConfigError("lambda_max", "required by the selected suites")
        cfg.lambda_max = _float(raw, "lambda_max")
        if not cfg.lambda_max > 0:
            raise ConfigError("lambda_max", "must be positive")
    if "counting" in suites or "karamata" in suites:
        cfg.counting_grid = _grid(raw, "counting", "T_min", "T_max")
        if cfg.counting_grid[1] > cfg.lambda_max:
            raise ConfigError("counting.T_max", f"exceeds lambda_max={cfg.lambda_max}")
    if "heat" in suites or "karamata" in suites:
        cfg.heat_grid = _grid(raw, "heat", "t_min", "t_max")
        t_min = TRUNCATION_FACTOR / cfg.lambda_max
        if cfg.heat_grid[0] < t_min:
            raise ConfigError("heat.t_min", f"violates t*lambda_max >= {TRUNCATION_FACTOR}; "
                                            f"smallest admissible t is {t_min!r}")

    if "curvature" in suites or "laplace_method" in suites:
        if measure.kind not in ("subtorus", "equator"):
            raise ConfigError("measure.kind", "curvature suites need a sub-torus or the equator")
        if "probe.distances" in raw:
            cfg.probe_distances = _floats(raw, "probe.distances")
        if "probe.along" in raw:
            cfg.probe_along = _float(raw, "probe.along")
        for d in cfg.probe_distances:
            if not 0 < d < measure.tubular_radius:
                raise ConfigError("probe.distances",
                                  f"{d} outside (0, {measure.tubular_radius})")
        if "laplace.t" in raw:
            cfg.laplace_t = _floats(raw, "laplace.t")
        if any(not t > 0 for t in cfg.laplace_t) or len(cfg.laplace_t) < 2:
            raise ConfigError("laplace.t", "need at least two positive times")
        if "laplace.distance" in raw:
            cfg.laplace_distance = _float(raw, "laplace.distance")
        if not 0 < cfg.laplace_distance < measure.tubular_radius:
            raise ConfigError("laplace.distance", "outside the tubular neighbourhood")
        g_terms = parse_terms(raw["laplace.density"], "laplace.density") \
            if "laplace.density" in raw else {(0,) * measure.n: 1.0}
        try:
            cfg.laplace_density = TrigPoly.from_dict(measure.n, g_terms)
        except InvalidArgument as exc:
            raise ConfigError("laplace.density", str(exc)) from None
        for key, conv in (("profiles", _int), ("seed", _int), ("s_start", _float),
                          ("s_end", _float), ("steps", _int)):
            if f"riccati.{key}" in raw:
                cfg.riccati[key] = conv(raw, f"riccati.{key}")
        if not 0 < cfg.riccati["s_start"] < cfg.riccati["s_end"] < math.pi:
            raise ConfigError("riccati.s_end", "need 0 < s_start < s_end < pi")

    for key in raw:
        if key.startswith("tolerance."):
            check = key.split(".", 1)[1]
            if check not in TOLERANCE_PROFILES["default"]:
                raise ConfigError(key, "unknown tolerance")
            cfg.tolerance_overrides[check] = _float(raw, key)
    return cfg


def canonical_names():
    return sorted(p.name[:-4] for p in resources.files(__package__).joinpath("configs").iterdir()
                  if p.name.endswith(".cfg"))


def load_config(source):
    """Load a config from a file path or a canonical name such as ``torus2-delta``."""
    path = Path(source)
    if path.is_file():
        return build_config(parse_text(path.read_text(), str(path)), path.stem)
    res = resources.files(__package__).joinpath("configs", f"{source}.cfg")
    if res.is_file():
        return build_config(parse_text(res.read_text(), f"{source}.cfg"), str(source))
    raise ConfigError("config", f"no such file or canonical config: {source}")
