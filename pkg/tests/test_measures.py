import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specmeasure.errors import (InsufficientResolution, InvalidArgument, PrecisionWarning,
                                UnsupportedConfiguration)
from specmeasure.measures import (MeasureSpec, SphPoly, TrigPoly, ambient_distance,
                                  closed_form_coefficients, density_norm_sq, equator_measure,
                                  foot_point, fourier_coefficient, full_measure, max_frequency,
                                  point_measure, quadrature_nodes, submanifold_distance,
                                  subtorus_measure)
from specmeasure.spectra import SpectralCatalog, index_arrays

T2, T3, S2 = SpectralCatalog.torus(2), SpectralCatalog.torus(3), SpectralCatalog.sphere2()

MEASURES = {
    "t2-point": point_measure(T2, (0.4, 1.1), 0.7),
    "t3-circle": subtorus_measure(T3, 1, (0.5, 1.0), TrigPoly.from_dict(1, {0: 1, 2: 0.3j})),
    "t3-plane": subtorus_measure(T3, 2, (2.0,), TrigPoly.from_dict(2, {(0, 0): 1, (1, -1): 0.2})),
    "t2-full": full_measure(T2, TrigPoly.from_dict(2, {(0, 0): 1, (3, 1): 0.5 - 0.1j})),
    "s2-point": point_measure(S2, (0.9, 2.2), 1.3),
    "s2-equator": equator_measure(TrigPoly.from_dict(1, {0: 1, 3: 0.4, -1: 0.25j})),
    "s2-full": full_measure(S2, SphPoly.from_dict({(0, 0): 1, (4, -2): 0.3, (7, 5): 0.2j})),
}


def random_indices(catalog, lambda_max, count, seed):
    _, pts = index_arrays(catalog, lambda_max)
    rng = np.random.default_rng(seed)
    return pts[rng.choice(len(pts), size=count, replace=False)]


@pytest.mark.parametrize("name", sorted(MEASURES))
def test_closed_form_matches_quadrature(name):
    measure = MEASURES[name]
    lam = 1e4
    idx = random_indices(measure.ambient, lam, 100, seed=len(name))
    closed = closed_form_coefficients(measure, idx)
    if measure.kind == "point":
        quad = [fourier_coefficient(measure, tuple(i)) for i in idx]
    else:
        need = 2 * measure.band + max_frequency(measure.ambient, lam)
        res = (need + 2) // 2 if name == "s2-full" else need + 1
        rule = quadrature_nodes(measure, res, lambda_max=lam)
        quad = [fourier_coefficient(measure, tuple(i), rule) for i in idx]
    assert np.max(np.abs(closed - np.array(quad))) <= 1e-10


def test_equator_closed_form_low_degree():
    measure = equator_measure()
    c = closed_form_coefficients(measure, [(0, 0), (1, 0), (2, 0), (2, 1), (4, 0)])
    # 2 pi Y_l^0(pi/2) = 2 pi sqrt((2l+1)/4pi) P_l(0)
    ref = [math.sqrt(math.pi), 0, -0.5 * math.sqrt(5 * math.pi), 0, 3 / 8 * math.sqrt(9 * math.pi)]
    assert np.allclose(c, ref, atol=1e-14)


def test_rule_refusal_reports_minimal_resolution():
    measure = MEASURES["t3-circle"]
    with pytest.raises(InsufficientResolution) as exc:
        quadrature_nodes(measure, 50, lambda_max=1e4)
    minimal = exc.value.minimal_resolution
    quadrature_nodes(measure, minimal, lambda_max=1e4)
    with pytest.raises(InsufficientResolution):
        quadrature_nodes(measure, minimal - 1, lambda_max=1e4)


def test_inexact_rule_warns():
    measure = MEASURES["s2-equator"]
    rule = quadrature_nodes(measure, 8)
    with pytest.warns(PrecisionWarning):
        fourier_coefficient(measure, (20, 0), rule)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fourier_coefficient(measure, (1, 0), rule)


def test_validation():
    with pytest.raises(InvalidArgument):
        point_measure(T2, (0.0,))
    with pytest.raises(InvalidArgument):
        subtorus_measure(T2, 2)
    with pytest.raises(UnsupportedConfiguration):
        MeasureSpec(S2, "subtorus", 1, TrigPoly.constant(1))
    with pytest.raises(InvalidArgument):
        SphPoly.from_dict({(2, 3): 1.0})
    with pytest.raises(InvalidArgument):
        full_measure(S2, TrigPoly.constant(2))
    with pytest.raises(InvalidArgument):
        quadrature_nodes(MEASURES["t2-point"], 10)


def test_norms_and_codimension():
    assert MEASURES["t3-circle"].k == 2
    assert density_norm_sq(MEASURES["t3-circle"]) == pytest.approx(2 * math.pi * (1 + 0.09))
    assert density_norm_sq(MEASURES["s2-point"]) == pytest.approx(1.69)
    assert density_norm_sq(equator_measure()) == pytest.approx(2 * math.pi)
    assert MEASURES["s2-full"].k == 0


def test_scaling_is_quadratic_in_weights():
    m = MEASURES["s2-equator"]
    idx = random_indices(S2, 400, 30, seed=1)
    a = closed_form_coefficients(m, idx)
    b = closed_form_coefficients(m.scaled(-2.5), idx)
    assert np.allclose(b, -2.5 * a)
    assert density_norm_sq(m.scaled(-2.5)) == pytest.approx(6.25 * density_norm_sq(m))


angles = st.floats(-10, 10, allow_nan=False)


@given(angles, angles, angles, angles)
@settings(max_examples=60)
def test_sphere_distance_symmetric_and_bounded(a, b, c, d):
    x, y = (abs(a) % math.pi, b), (abs(c) % math.pi, d)
    dxy = ambient_distance(S2, x, y)
    assert dxy == pytest.approx(ambient_distance(S2, y, x), abs=1e-14)
    assert -1e-15 <= dxy <= math.pi + 1e-15


@given(angles, angles, angles)
def test_subtorus_foot_point_realises_distance(a, b, c):
    m = MEASURES["t3-circle"]
    x = np.array([a, b, c])
    _, foot = foot_point(m, x)
    assert float(ambient_distance(T3, x, foot)) == pytest.approx(submanifold_distance(m, x),
                                                                 abs=1e-12)


def test_equator_distance():
    m = equator_measure()
    assert submanifold_distance(m, (0.3, 1.0)) == pytest.approx(math.pi / 2 - 0.3)
    assert submanifold_distance(m, (2.0, 5.0)) == pytest.approx(2.0 - math.pi / 2)
    _, foot = foot_point(m, (0.3, 1.0))
    assert float(ambient_distance(S2, (0.3, 1.0), foot)) == pytest.approx(math.pi / 2 - 0.3)


def test_trapezoid_exact_on_circle():
    circle = subtorus_measure(SpectralCatalog.torus(2), 1, (0.0,))
    rule = quadrature_nodes(circle, 3)
    vals = rule.weights * np.exp(1j * rule.intrinsic[:, 0])
    assert abs(vals.sum()) < 1e-15
    assert rule.exactness == 2
