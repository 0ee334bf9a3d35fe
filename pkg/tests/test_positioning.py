import numpy as np
import pytest
from sklearn.base import clone

from acousim.exceptions import DegenerateGeometry, NoPeakFound, ValidationError
from acousim.positioning import (
    METHODS, AnchorSet, Multilaterator, RangeEstimate, TofEstimator, estimate_tof, gauss_newton,
    multilaterate, range_cost, range_residual_rms, squared_range_cost,
)
from acousim.propagation import speed_of_sound
from acousim.signal import CompressedEnvelope

from . import oracles

UNIT = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)


def _ranges(anchors, x):
    return np.linalg.norm(anchors - x, axis=1)


# TOF picking ----------------------------------------------------------------------

def test_tof_single_peak():
    env = np.zeros(5000)
    env[2500] = 1.0
    est = estimate_tof(CompressedEnvelope(env, 250_000.0), sound_speed=343.0, anchor_id="a0")
    assert est.tof_s == pytest.approx(0.01)
    assert est.range_m == pytest.approx(3.43)
    assert est.anchor_id == "a0"


def _two_gaussians(first=0.5, second=1.0):
    n = np.arange(3000)
    return first * np.exp(-0.5 * ((n - 1000) / 20.0) ** 2) + second * np.exp(-0.5 * ((n - 1600) / 20.0) ** 2)


def test_tof_modes_on_multipath_envelope():
    env = _two_gaussians()
    assert estimate_tof(env, "max", sample_rate=1.0).tof_s == 1600
    assert estimate_tof(env, "prominence", 0.3, sample_rate=1.0).tof_s == 1000


def test_tof_prominence_threshold_skips_small_peak():
    env = _two_gaussians(first=0.2)
    assert estimate_tof(env, "prominence", 0.3, sample_rate=1.0).tof_s == 1600


def test_tof_max_mode_is_argmax():
    env = np.random.default_rng(0).random(777)
    assert estimate_tof(env, sample_rate=1.0).tof_s == np.argmax(env)


def test_tof_interpolation_and_offset():
    n = np.arange(200)
    env = np.exp(-0.5 * ((n - 100.3) / 5.0) ** 2)
    assert estimate_tof(env, sample_rate=1.0, interpolate=True).tof_s == pytest.approx(100.3, abs=0.01)
    assert estimate_tof(env, sample_rate=1.0, offset_s=10.0).tof_s == 90.0


def test_tof_default_speed_is_room_temperature():
    est = estimate_tof(np.array([0.0, 1.0, 0.0]), sample_rate=1.0)
    assert est.range_m == pytest.approx(speed_of_sound(20.0))


def test_tof_errors():
    with pytest.raises(NoPeakFound):
        estimate_tof(np.zeros(100), sample_rate=1.0)
    with pytest.raises(ValidationError):
        estimate_tof(np.ones(3))
    with pytest.raises(ValidationError):
        estimate_tof(np.array([]), sample_rate=1.0)
    with pytest.raises(ValidationError):
        estimate_tof(np.ones(3), "median", sample_rate=1.0)


# multilateration --------------------------------------------------------------------

@pytest.mark.parametrize("method", METHODS)
def test_unit_tetrahedron_example(method):
    x = np.array([0.2, 0.3, 0.4])
    est = multilaterate(UNIT, _ranges(UNIT, x), method)
    np.testing.assert_allclose(est.position, x, atol=1e-6)
    assert est.residual_rms < 1e-9
    assert est.method == method


@pytest.mark.parametrize("method", METHODS)
def test_target_at_anchor(method):
    est = multilaterate(UNIT, _ranges(UNIT, UNIT[1]), method)
    np.testing.assert_allclose(est.position, UNIT[1], atol=1e-6)


@pytest.mark.parametrize("method", METHODS)
def test_exact_ranges_random_geometries(method):
    rng = np.random.default_rng(11)
    for _ in range(100):
        a, x = oracles.random_geometry(rng)
        np.testing.assert_allclose(multilaterate(a, _ranges(a, x), method).position, x, atol=1e-6)


@pytest.mark.parametrize("method", METHODS)
def test_translation_equivariance(method):
    rng = np.random.default_rng(5)
    a, x = oracles.random_geometry(rng)
    r = _ranges(a, x) + rng.normal(0, 0.01, 4)
    t = np.array([3.0, -7.0, 1.5])
    p0 = multilaterate(a, r, method).position
    p1 = multilaterate(a + t, r, method).position
    np.testing.assert_allclose(p1, p0 + t, atol=1e-9)


def test_common_bias_residual_scale():
    a = np.array([[0, 0, 0], [4, 0, 0], [0, 4, 0], [0, 0, 4], [4, 4, 4]], dtype=float)
    x = np.array([1.5, 2.0, 1.0])
    est = multilaterate(a, _ranges(a, x) + 0.01, "gauss_newton")
    assert 0 < est.residual_rms < 0.01
    assert np.linalg.norm(est.position - x) < 0.05


def test_gauss_newton_descends_from_centroid():
    rng = np.random.default_rng(8)
    for _ in range(50):
        a, x = oracles.random_geometry(rng)
        r = _ranges(a, x) + rng.normal(0, 0.05, 4)
        sol, _ = gauss_newton(a, r)
        assert range_cost(sol, a, r) <= range_cost(a.mean(axis=0), a, r) + 1e-15


@pytest.mark.parametrize("method", ["gauss_newton", "intersections"])
def test_noisy_range_cost_matches_grid_oracle(method):
    rng = np.random.default_rng(21)
    for _ in range(5):
        a, x = oracles.random_geometry(rng)
        r = _ranges(a, x) + rng.normal(0, 0.01, 4)
        est = multilaterate(a, r, method).position
        ref = oracles.grid_minimizer(oracles.range_cost(a, r), est)
        assert np.linalg.norm(est - ref) < 2e-3


@pytest.mark.parametrize("method", ["bancroft", "beck", "cheung"])
def test_noisy_squared_cost_matches_grid_oracle(method):
    rng = np.random.default_rng(22)
    for _ in range(5):
        a, x = oracles.random_geometry(rng)
        r = _ranges(a, x) + rng.normal(0, 0.01, 4)
        est = multilaterate(a, r, method).position
        ref = oracles.grid_minimizer(oracles.squared_range_cost(a, r), x)
        assert np.linalg.norm(est - ref) < 2e-3


def test_cost_helpers_agree_with_oracles():
    rng = np.random.default_rng(2)
    a, x = oracles.random_geometry(rng)
    r = _ranges(a, x) + 0.1
    g = rng.normal(size=(1, 3))
    assert range_cost(g[0], a, r) == pytest.approx(oracles.range_cost(a, r)(g)[0])
    assert squared_range_cost(g[0], a, r) == pytest.approx(oracles.squared_range_cost(a, r)(g)[0])
    assert range_residual_rms(x, a, r) == pytest.approx(0.1)


@pytest.mark.parametrize("method", ["bancroft", "beck", "cheung", "intersections"])
def test_coplanar_anchors_are_degenerate(method):
    a = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], dtype=float)
    with pytest.raises(DegenerateGeometry):
        multilaterate(a, _ranges(a, [0.3, 0.3, 0.5]), method)


def test_multilaterate_input_validation():
    with pytest.raises(ValidationError):
        multilaterate(UNIT[:3], [1, 1, 1], "beck")
    with pytest.raises(ValidationError):
        multilaterate(UNIT, [1, 1, 1], "beck")
    with pytest.raises(ValidationError):
        multilaterate(UNIT, [1, 1, -1, 1], "beck")
    with pytest.raises(ValidationError):
        multilaterate(UNIT, [1, 1, 1, 1], "trilateration")


def test_multilaterate_accepts_range_estimates_and_anchor_set():
    x = np.array([0.1, 0.2, 0.3])
    anchors = AnchorSet.from_array(UNIT)
    ranges = [RangeEstimate(i, r, r / 343.0, 1.0) for i, r in zip(anchors.ids, _ranges(UNIT, x))]
    np.testing.assert_allclose(multilaterate(anchors, ranges, "cheung").position, x, atol=1e-9)


def test_anchor_set_validation():
    with pytest.raises(ValidationError):
        AnchorSet.from_array(UNIT[:3])
    with pytest.raises(ValidationError):
        AnchorSet(("a",), UNIT)
    with pytest.warns(UserWarning):
        AnchorSet.from_array(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], dtype=float))


# estimators -------------------------------------------------------------------------

def test_multilaterator_predict():
    rng = np.random.default_rng(4)
    X_true = rng.dirichlet(np.ones(4), 6) @ (UNIT * 3)
    R = np.linalg.norm(X_true[:, None, :] - UNIT * 3, axis=2)
    model = Multilaterator(UNIT * 3, "beck").fit(R)
    np.testing.assert_allclose(model.predict(R), X_true, atol=1e-9)
    assert model.converged_.all() and model.residual_rms_.shape == (6,)
    assert model.get_params()["method"] == "beck"
    assert clone(model).method == "beck"


def test_multilaterator_validation():
    with pytest.raises(ValidationError):
        Multilaterator(UNIT, "nope").fit(np.ones((1, 4)))
    with pytest.raises(ValidationError):
        Multilaterator(None).fit(np.ones((1, 4)))
    with pytest.raises(ValidationError):
        Multilaterator(UNIT).fit(np.ones((1, 5)))
    model = Multilaterator(UNIT).fit(np.ones((1, 4)))
    with pytest.raises(ValidationError):
        model.predict(np.ones((1, 3)))


def test_tof_estimator_rows():
    X = np.zeros((2, 100))
    X[0, 10] = X[1, 40] = 1.0
    r = TofEstimator(sample_rate=1000.0, sound_speed=340.0).fit_transform(X)
    np.testing.assert_allclose(r, [3.4, 13.6])
