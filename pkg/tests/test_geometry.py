import numpy as np
import pytest

from symphonic import charts, geometry as geo
from symphonic import expr as ex


def chart(name, coords, rows, intervals, periodic=None):
    metric = [[ex.parse(s, coords) for s in row] for row in rows]
    return geo.ManifoldModel(name, coords, metric, intervals, periodic)


@pytest.fixture
def exp_line():
    return chart("expline", ["x"], [["exp(2*x)"]], [(-1.0, 1.0)])


def test_metric_euclidean():
    e2 = geo.euclidean_space(2, bounds=[(-5, 5), (-5, 5)])
    met = geo.metric_at(e2, [0.3, -0.7])
    assert np.allclose(met.values, np.eye(2))
    assert met.sqrt_det == pytest.approx(1.0)


def test_metric_sphere_equator_and_density(sphere2):
    met = geo.metric_at(sphere2, [np.pi / 2, 1.0])
    assert np.allclose(met.values, np.eye(2), atol=1e-12)
    met = geo.metric_at(sphere2, [np.pi / 4, 1.0])
    assert met.sqrt_det == pytest.approx(np.sin(np.pi / 4), rel=1e-14)
    assert np.allclose(met.values @ met.inverse, np.eye(2), atol=1e-10)


def test_metric_outside_domain(sphere2):
    with pytest.raises(geo.DomainError):
        geo.metric_at(sphere2, [0.01, 1.0])


def test_metric_not_spd():
    bad = chart("bad", ["x", "y"], [["x", "1"], ["1", "x"]],
                [(0.0, 2.0), (0.0, 2.0)])
    with pytest.raises(geo.NonSPDError):
        geo.metric_at(bad, [0.5, 1.0])


def test_asymmetric_metric_rejected():
    with pytest.raises(geo.GeometryError):
        chart("asym", ["x", "y"], [["1", "x"], ["0", "1"]],
              [(0.1, 1.0), (0.1, 1.0)])


def test_christoffel_flat_zero(rng):
    e3 = geo.euclidean_space(3, bounds=[(-5, 5)] * 3)
    for _ in range(100):
        x = rng.uniform(-4, 4, 3)
        assert np.allclose(geo.christoffel(e3, x).gamma, 0.0)


def test_christoffel_sphere_value(sphere2):
    ch = geo.christoffel(sphere2, [np.pi / 3, 0.2])
    expected = -np.sin(np.pi / 3) * np.cos(np.pi / 3)
    assert ch.gamma[0, 1, 1] == pytest.approx(expected, rel=1e-12)
    assert np.allclose(ch.gamma, np.swapaxes(ch.gamma, 1, 2), atol=1e-14)


def test_christoffel_exponential_line(exp_line):
    ch = geo.christoffel(exp_line, [0.37])
    assert ch.gamma[0, 0, 0] == pytest.approx(1.0, rel=1e-12)


def test_metric_compatibility_via_jets(sphere2, rng):
    # d_k g_ij = Gamma^l_{ki} g_lj + Gamma^l_{kj} g_il
    for _ in range(10):
        x = [rng.uniform(0.3, np.pi - 0.3), rng.uniform(0, 2 * np.pi)]
        met = geo.metric_at(sphere2, x, order=1)
        gamma = geo.christoffel(sphere2, x).gamma
        g = met.values
        for k in range(2):
            dg = np.array([[met.jets[i][j].gradient()[k] for j in range(2)]
                           for i in range(2)])
            recon = np.einsum("li,lj->ij", gamma[:, k, :], g) \
                + np.einsum("lj,il->ij", gamma[:, k, :], g)
            assert np.allclose(dg, recon, atol=1e-8)


def test_riemann_flat_zero(rng):
    e2 = geo.euclidean_space(2, bounds=[(-5, 5)] * 2)
    x = rng.uniform(-4, 4, 2)
    out = geo.riemann(e2, x, [1.0, 0.0], [0.0, 1.0], [1.0, 1.0])
    assert np.allclose(out, 0.0)


def test_riemann_sphere_sectional_curvature(sphere2):
    x = [np.pi / 3, 0.7]
    frame = geo.frame_at(sphere2, x).vectors
    g = geo.metric_at(sphere2, x).values
    r = geo.riemann(sphere2, x, frame[0], frame[1], frame[1])
    assert float(frame[0] @ g @ r) == pytest.approx(1.0, rel=1e-10)


def test_riemann_symmetries_on_sphere(sphere2, rng):
    for _ in range(5):
        x = [rng.uniform(0.3, np.pi - 0.3), rng.uniform(0, 2 * np.pi)]
        g = geo.metric_at(sphere2, x).values
        riem = geo.riemann_tensor(sphere2, x)
        X, Y, Z, W = rng.normal(size=(4, 2))
        rxyz = np.einsum("lkij,i,j,k->l", riem, X, Y, Z)
        ryxz = np.einsum("lkij,i,j,k->l", riem, Y, X, Z)
        assert np.allclose(rxyz, -ryxz, atol=1e-8)
        rxyw = np.einsum("lkij,i,j,k->l", riem, X, Y, W)
        assert float(rxyz @ g @ W + rxyw @ g @ Z) == pytest.approx(0.0, abs=1e-8)
        # first Bianchi identity
        bianchi = (np.einsum("lkij,i,j,k->l", riem, X, Y, Z)
                   + np.einsum("lkij,i,j,k->l", riem, Y, Z, X)
                   + np.einsum("lkij,i,j,k->l", riem, Z, X, Y))
        assert np.allclose(bianchi, 0.0, atol=1e-8)


def test_frame_euclidean_is_coordinate_basis():
    e2 = geo.euclidean_space(2, bounds=[(-5, 5)] * 2)
    assert np.allclose(geo.frame_at(e2, [0.1, 0.2]).vectors, np.eye(2))


def test_frame_sphere_normalization(sphere2):
    frame = geo.frame_at(sphere2, [np.pi / 6, 0.0]).vectors
    assert np.allclose(frame[0], [1.0, 0.0])
    assert np.allclose(frame[1], [0.0, 1.0 / np.sin(np.pi / 6)])


def test_frame_gram_identity(annulus, rng):
    for _ in range(20):
        x = [rng.uniform(0.6, 1.9), rng.uniform(0, 2 * np.pi)]
        frame = geo.frame_at(annulus, x).vectors
        g = geo.metric_at(annulus, x).values
        assert np.allclose(frame @ g @ frame.T, np.eye(2), atol=1e-10)


def test_scalar_field_operators():
    e2 = geo.euclidean_space(2, coord_names=["x1", "x2"],
                             bounds=[(-5, 5)] * 2)
    f = ex.parse("x1", ["x1", "x2"])
    x = [0.4, 1.2]
    assert np.allclose(geo.gradient(e2, f, x), [1.0, 0.0])
    assert np.allclose(geo.hessian(e2, f, x), 0.0)
    assert geo.laplacian(e2, f, x) == pytest.approx(0.0)


@pytest.mark.parametrize("dim", [2, 3])
def test_laplacian_of_squared_norm(dim):
    coords = [f"x{k + 1}" for k in range(dim)]
    e = geo.euclidean_space(dim, coord_names=coords, bounds=[(-5, 5)] * dim)
    f = ex.parse(" + ".join(f"{c}^2" for c in coords), coords)
    x = [0.3] * dim
    assert geo.laplacian(e, f, x) == pytest.approx(2 * dim, rel=1e-12)


def test_scalar_symphonic_identity_at_unit_point():
    e2 = geo.euclidean_space(2, coord_names=["x1", "x2"],
                             bounds=[(-5, 5)] * 2)
    f = ex.parse("pow(x1^2 + x2^2, 1/3)", ["x1", "x2"])
    x = [1.0, 0.0]
    grad = geo.gradient(e2, f, x)
    hess = geo.hessian(e2, f, x)
    lap = geo.laplacian(e2, f, x)
    residual = lap * float(grad @ grad) + 2 * float(grad @ hess @ grad)
    assert abs(residual) <= 1e-10


def test_wrap_and_contains(torus2):
    assert torus2.contains([10.0, -3.0])
    wrapped = torus2.wrap([2 * np.pi + 0.5, -0.5])
    assert wrapped[0] == pytest.approx(0.5)
    assert wrapped[1] == pytest.approx(2 * np.pi - 0.5)


def test_exclusion_ball():
    plane = charts.punctured_plane_chart(radius=3.0, hole=0.2)
    assert not plane.contains([0.05, 0.05])
    assert plane.contains([1.0, 1.0])
    with pytest.raises(geo.DomainError):
        plane.require_inside([0.0, 0.0])


def test_sample_points_deterministic(sphere2):
    a = sphere2.sample_points(10, np.random.default_rng(5))
    b = sphere2.sample_points(10, np.random.default_rng(5))
    assert a == b
    for p in a:
        assert sphere2.contains(p)
