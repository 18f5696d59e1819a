import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helmsource.errors import LayoutError
from helmsource.sources import (
    GaussianSource,
    ParameterLayout,
    PointSource,
    Rectangle,
    SourceConfiguration,
    density_at,
    make_gaussian_config,
    make_point_config,
    pack,
    unpack,
    validate,
)

EX1 = make_point_config([6, 5, 7], [(0, 0)] * 3, [(2, 2), (-2, 2), (0, -2)])
EX2 = make_point_config([0, 9, 0], [(math.sqrt(2), -math.sqrt(2)), (0, 0), (2, 0)], [(2, 0), (-2, 2), (-2, -2)])
EX3 = make_gaussian_config([3, -4], [2.5, 1], [(2, 2), (-1.5, -1.5)])


def test_validate_accepts_examples():
    assert validate(EX1) == []
    assert validate(EX2) == []
    assert validate(EX3) == []


def test_validate_mixed_type():
    cfg = make_point_config([1], [(1, 0)], [(0, 0)])
    assert any("mixed monopole/dipole" in p for p in validate(cfg))


def test_validate_zero_source():
    cfg = make_point_config([0], [(0, 0)], [(0, 0)])
    assert any("zero source" in p for p in validate(cfg))


def test_validate_gaussian_decay():
    cfg = make_gaussian_config([1], [0], [(0, 0)])
    assert any("xi must be > 0" in p for p in validate(cfg))


def test_validate_outside_domain_and_mixed_family():
    cfg = SourceConfiguration("point", (PointSource((4.0, 0.0), 1.0), GaussianSource((0, 0), 1.0, 1.0)))
    problems = validate(cfg)
    assert any("not strictly inside" in p for p in problems)
    assert any("mixed source families" in p for p in problems)


def test_validate_reports_all_violations():
    cfg = make_point_config([1, 0], [(1, 0), (0, 0)], [(0, 0), (9, 9)])
    assert len(validate(cfg)) == 3


def test_density_examples():
    one = make_gaussian_config([3], [2.5], [(2, 2)])
    assert density_at(one, (2, 2)) == 3.0
    assert density_at(one, (3, 2)) == pytest.approx(3 * math.exp(-2.5))
    want = 3 * math.exp(-2.5 * 8) - 4 * math.exp(-1 * 4.5)
    assert density_at(EX3, (0, 0)) == pytest.approx(want, rel=1e-14)


def test_density_rejects_point_sources():
    with pytest.raises(TypeError):
        density_at(EX1, (0, 0))


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-10, 10), x=st.floats(-4, 4), y=st.floats(-4, 4))
def test_density_linear_in_amplitudes(a, x, y):
    scaled = make_gaussian_config([3 * a, -4 * a], [2.5, 1], [(2, 2), (-1.5, -1.5)])
    assert density_at(scaled, (x, y)) == pytest.approx(a * density_at(EX3, (x, y)), abs=1e-12)


def test_vector_lengths():
    assert len(pack(EX1)) == 15
    assert len(pack(EX3)) == 8


def test_pack_layout_order():
    v = pack(EX2).values
    J = 3
    np.testing.assert_array_equal(v[:J], [0, 9, 0])
    np.testing.assert_allclose(v[J:3 * J], [math.sqrt(2), -math.sqrt(2), 0, 0, 2, 0])
    np.testing.assert_array_equal(v[3 * J:], [2, 0, -2, 2, -2, -2])
    assert pack(EX2).layout.types == ("dipole", "monopole", "dipole")


def test_round_trip_configuration():
    for cfg in (EX1, EX2, EX3):
        assert unpack(pack(cfg)) == cfg


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=8, max_size=8))
def test_round_trip_vector_gaussian(vals):
    layout = ParameterLayout("gaussian", 2)
    v = np.array(vals)
    np.testing.assert_array_equal(pack(unpack(v, layout)).values, v)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=15, max_size=15))
def test_round_trip_vector_point(vals):
    layout = ParameterLayout("point", 3, ("dipole", "monopole", "dipole"))
    v = np.array(vals)
    v[~layout.active_mask()] = 0.0
    back = pack(unpack(v, layout))
    np.testing.assert_array_equal(back.values, v)


def test_unpack_rejects_type_mask_violation():
    layout = ParameterLayout("point", 1, ("monopole",))
    with pytest.raises(LayoutError):
        unpack(np.array([1.0, 0.5, 0.0, 0.0, 0.0]), layout)


def test_unpack_rejects_wrong_length():
    with pytest.raises(LayoutError):
        unpack(np.zeros(7), ParameterLayout("gaussian", 2))


def test_names():
    assert ParameterLayout("point", 1).names() == ["lambda_1", "xi_1_x", "xi_1_y", "z_1_x", "z_1_y"]
    assert ParameterLayout("gaussian", 1).names() == ["lambda_1", "xi_1", "z_1_x", "z_1_y"]


def test_rectangle():
    r = Rectangle()
    assert r.area == 64
    assert r.circumradius == pytest.approx(4 * math.sqrt(2))
    assert r.contains((0, 0)) and not r.contains((4, 0))
