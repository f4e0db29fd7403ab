import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specmeasure.counting import (CoefficientTable, build_coefficient_table,
                                  convergence_diagnostic, counting_sum, laplace_transform,
                                  midpoint_grid, predicted_counting)
from specmeasure.errors import InvalidArgument, OutOfRange, TableFormatError, TableVersionMismatch
from specmeasure.measures import (SphPoly, TrigPoly, equator_measure, full_measure,
                                  point_measure, subtorus_measure)
from specmeasure.spectra import SpectralCatalog
from specmeasure.tablefile import decode_table, encode_table, read_table, write_table

T1, T2, S2 = SpectralCatalog.torus(1), SpectralCatalog.torus(2), SpectralCatalog.sphere2()


def gauss_circle(bound):
    # lattice points with x^2 + y^2 < bound, by direct enumeration
    r = math.isqrt(max(int(math.ceil(bound)) - 1, 0))
    a = np.arange(-r, r + 1)
    return int(np.sum(a[:, None] ** 2 + a[None, :] ** 2 < bound))


@pytest.fixture(scope="module")
def delta_table():
    return build_coefficient_table(T2, point_measure(T2, (0.3, 2.0)), 2500.0)


def test_delta_counting_equals_lattice_count(delta_table):
    for T in (0.5, 1, 1.5, 2, 25, 100.5, 2500):
        assert counting_sum(delta_table, T) == pytest.approx(gauss_circle(T) / (4 * math.pi**2),
                                                             rel=1e-14)


def test_counting_is_strict(delta_table):
    assert counting_sum(delta_table, 0) == 0
    assert counting_sum(delta_table, 1) == pytest.approx(1 / (4 * math.pi**2))
    assert delta_table.level_weight(1.0) == pytest.approx(4 / (4 * math.pi**2))
    assert delta_table.level_weight(3.0) == 0.0


def test_beyond_lambda_max_is_error(delta_table):
    with pytest.raises(OutOfRange) as exc:
        counting_sum(delta_table, 2501)
    assert exc.value.lambda_max == 2500.0


def test_predicted_counting_values():
    assert predicted_counting(2, 1.0, 4 * math.pi) == pytest.approx(1.0)
    assert predicted_counting(1, 2 * math.pi, 100) == pytest.approx(2 * 10)
    assert predicted_counting(0, 3.5, 1e9) == 3.5


def test_equator_levels_use_even_degrees_only():
    table = build_coefficient_table(S2, equator_measure(), 1000)
    odd = (np.sqrt(4 * table.lambdas + 1) - 1) / 2 % 2 == 1
    assert np.all(table.weights[odd] == 0)
    l = np.arange(0, 31, 2)
    p0 = np.array([(-1) ** (k // 2) * math.prod(range(k - 1, 0, -2)) / math.prod(range(k, 0, -2))
                   for k in l.tolist()])
    assert np.allclose(table.weights[~odd], math.pi * (2 * l + 1) * p0**2, rtol=1e-12)


def test_full_measure_saturates():
    psi = SphPoly.from_dict({(0, 0): 2.0, (3, 1): 1j, (5, -5): 0.5})
    table = build_coefficient_table(S2, full_measure(S2, psi), 200)
    assert counting_sum(table, 30.0001) == pytest.approx(psi.norm_sq(), rel=1e-15)
    assert counting_sum(table, 12.5) == pytest.approx(5.0, rel=1e-15)


def test_quadrature_fallback_matches_closed_form(monkeypatch):
    import specmeasure.counting as counting
    measure = subtorus_measure(SpectralCatalog.torus(3), 1, (0.5, 1.0),
                               TrigPoly.from_dict(1, {0: 1, 1: 0.25, -1: 0.25}))
    fast = build_coefficient_table(measure.ambient, measure, 150)

    def refuse(*_):
        raise counting.UnsupportedConfiguration("forced")
    monkeypatch.setattr(counting, "closed_form_coefficients", refuse)
    slow = build_coefficient_table(measure.ambient, measure, 150)
    assert np.allclose(fast.weights, slow.weights, rtol=0, atol=1e-13)


def test_laplace_transform_equals_level_sum(delta_table):
    for t in (0.01, 0.1, 1.0):
        direct = math.fsum(delta_table.weights * np.exp(-delta_table.lambdas * t))
        assert laplace_transform(delta_table, t) == pytest.approx(direct, rel=1e-14)


def test_midpoint_grid_avoids_eigenvalues(delta_table):
    grid = midpoint_grid(delta_table, 10, 2500, 25)
    assert np.all(np.isin(grid, delta_table.lambdas, invert=True))
    assert grid[0] >= 10 * (1 - 1e-12) and grid[-1] <= 2500


def test_convergence_diagnostic_flags_and_window(delta_table):
    curve = convergence_diagnostic(delta_table, midpoint_grid(delta_table, 10, 2500, 30))
    assert curve.window == (curve.T[-1] / 10, curve.T[-1])
    assert abs(curve.window_ratio - 1) < 0.02
    assert not curve.flagged.any()
    with pytest.raises(OutOfRange):
        convergence_diagnostic(delta_table, [3000.0])


@given(st.floats(0.1, 100), st.floats(-3, 3))
@settings(max_examples=30, deadline=None)
def test_weight_scaling(c, x):
    base = build_coefficient_table(T1, point_measure(T1, (x,)), 400)
    scaled = build_coefficient_table(T1, point_measure(T1, (x,), c), 400)
    assert np.allclose(scaled.weights, c * c * base.weights, rtol=1e-13)


def test_table_validation():
    with pytest.raises(InvalidArgument):
        CoefficientTable(T1, "x", 1, 1.0, 4.0, [0.0, 0.0], [1.0, 1.0])
    with pytest.raises(InvalidArgument):
        CoefficientTable(T1, "x", 1, 1.0, 4.0, [0.0, 1.0], [1.0, -1.0])


def test_table_roundtrip_bit_exact(delta_table, tmp_path):
    blob = encode_table(delta_table, key="abc")
    back, header = decode_table(blob)
    assert header["key"] == "abc"
    assert back.same_levels(delta_table)
    assert back.lambda_max == delta_table.lambda_max and back.norm_sq == delta_table.norm_sq
    assert encode_table(back, key="abc") == blob
    write_table(tmp_path / "t.tbl", delta_table)
    assert read_table(tmp_path / "t.tbl")[0].same_levels(delta_table)


def test_table_corruption_detected(delta_table):
    blob = bytearray(encode_table(delta_table))
    with pytest.raises(TableFormatError):
        decode_table(bytes(blob[:-5]))
    blob[-3] ^= 0xFF
    with pytest.raises(TableFormatError):
        decode_table(bytes(blob))
    with pytest.raises(TableFormatError):
        decode_table(b"garbage" * 4)
    bumped = bytearray(encode_table(delta_table))
    bumped[8] += 1
    with pytest.raises(TableVersionMismatch):
        decode_table(bytes(bumped))
