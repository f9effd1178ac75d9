import numpy as np
import pytest

from obliqueshell import geometry
from obliqueshell.errors import ParameterError


def test_circle_points_and_normals(circle):
    t = np.linspace(0, 2 * np.pi, 17)
    p = circle.point(t)
    assert np.allclose(np.linalg.norm(p, axis=-1), 1.0, atol=1e-14)
    nu = circle.normal(t)
    # outward normal of the unit circle is the position vector
    assert np.allclose(nu, p, atol=1e-14)
    assert np.allclose(circle.jacobian(t), 1.0, atol=1e-14)


def test_circle_length_and_area(circle):
    g = geometry.grid(circle, 64)
    assert g.length() == pytest.approx(2 * np.pi, rel=1e-13)
    assert circle.signed_area() == pytest.approx(np.pi, rel=1e-13)


def test_ellipse_geometry(ellipse):
    p = ellipse.point(np.array([0.0, np.pi / 2]))
    assert np.allclose(p, [[2, 0], [0, 1]], atol=1e-14)
    assert ellipse.signed_area() == pytest.approx(2 * np.pi, rel=1e-12)
    assert ellipse.diameter == pytest.approx(4.0, rel=1e-4)


def test_kite_parametrization(kite):
    p = kite.point(np.array([0.0, np.pi]))
    # (cos t + 0.65 cos 2t - 0.65, 1.5 sin t)
    assert np.allclose(p[0], [1.0, 0.0], atol=1e-14)
    assert np.allclose(p[1], [-1.0, 0.0], atol=1e-14)
    kite.validate()  # regular and counterclockwise


def test_derivative_is_exact(circle, kite):
    t = np.linspace(0, 2 * np.pi, 11)
    h = 1e-6
    for curve in (circle, kite):
        fd = (curve.point(t + h) - curve.point(t - h)) / (2 * h)
        assert np.allclose(curve.derivative(t), fd, atol=1e-8)


def test_clockwise_curve_rejected():
    # circle traversed clockwise: x = cos t, y = -sin t
    cx = np.array([0.0, 0.5], dtype=complex)
    cy = np.array([0.0, 0.5j], dtype=complex)
    with pytest.raises(ParameterError, match="clockwise"):
        geometry.make_curve("custom", x_coeffs=cx, y_coeffs=cy)


def test_degenerate_curve_rejected():
    # cusp at t = 0: p(t) = (cos t - cos(2t)/4, sin t - sin(2t)/2) has p'(0) = 0
    cx = np.array([0.0, 0.5, -0.125], dtype=complex)
    cy = np.array([0.0, -0.5j, 0.25j], dtype=complex)
    with pytest.raises(ParameterError):
        geometry.make_curve("custom", x_coeffs=cx, y_coeffs=cy)


def test_bad_parameters():
    with pytest.raises(ParameterError):
        geometry.make_curve("circle", R=-1.0)
    with pytest.raises(ParameterError):
        geometry.make_curve("hexagon")
    with pytest.raises(ParameterError):
        geometry.make_curve("custom")


def test_grid_validation(circle):
    with pytest.raises(ParameterError):
        geometry.grid(circle, 15)
    with pytest.raises(ParameterError):
        geometry.grid(circle, 14)
    g = geometry.grid(circle, 16)
    assert g.weight == pytest.approx(2 * np.pi / 16)
    with pytest.raises(ValueError):
        g.points[0, 0] = 5.0  # arrays are frozen


def test_curve_from_config_roundtrip():
    c = geometry.curve_from_config({"kind": "ellipse", "a": 3, "b": 1})
    assert c.point(np.array([0.0]))[0, 0] == pytest.approx(3.0)
    c2 = geometry.curve_from_config(
        '{"kind": "custom", "x_coeffs": [[0,0],[0.5,0]], '
        '"y_coeffs": [[0,0],[0,-0.5]], "name": "c"}'
    )
    assert np.allclose(c2.point(np.array([0.0]))[0], [1.0, 0.0], atol=1e-14)
    with pytest.raises(ParameterError):
        geometry.curve_from_config({"radius": 1})
