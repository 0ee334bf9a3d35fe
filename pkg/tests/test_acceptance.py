"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line; the lines are repeated in
the terminal summary. Run on its own with ``pytest tests/test_acceptance.py``.
"""

import contextlib
import hashlib
import logging
import os
import time
from pathlib import Path

import numpy as np
import pytest

from acousim.evaluation import schroeder_rt60
from acousim.pipeline import load_config, run_pipeline
from acousim.pipeline.io import read_csv, read_json
from acousim.positioning import METHODS, estimate_tof, multilaterate
from acousim.propagation import (
    air_absorption_coefficient, air_absorption_factor, enumerate_images_shoebox, reflection_amplitude,
    simulate_room,
)
from acousim.scene import Transducer, shoebox
from acousim.signal import ChirpSpec, add_awgn, envelope, generate_chirp, matched_filter

from . import oracles

SCENARIO = Path(__file__).resolve().parents[1] / "configs" / "techtile.toml"
RESULTS = {}


@contextlib.contextmanager
def criterion(number, title):
    """Record and print the outcome of one criterion."""
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        RESULTS[number] = f"FAIL  criterion {number}: {title}"
        print(RESULTS[number])
        raise
    RESULTS[number] = f"PASS  criterion {number}: {title} ({time.perf_counter() - start:.1f} s)"
    print(RESULTS[number])


@contextlib.contextmanager
def cache_dir(path):
    old = os.environ.get("ACOUSIM_CACHE_DIR")
    os.environ["ACOUSIM_CACHE_DIR"] = str(path)
    try:
        yield
    finally:
        if old is None:
            os.environ.pop("ACOUSIM_CACHE_DIR", None)
        else:
            os.environ["ACOUSIM_CACHE_DIR"] = old


def _digests(root):
    root = Path(root)
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file() and ".cache" not in p.parts and p.name != "last_run.json"
    }


@pytest.fixture(scope="module")
def scenario(tmp_path_factory):
    """The scenario config run once with one worker; reused by several criteria."""
    base = tmp_path_factory.mktemp("scenario")
    cfg = load_config(SCENARIO)
    with cache_dir(base / "cache"):
        start = time.perf_counter()
        report = run_pipeline(cfg, out=base / "w1", workers=1)
        elapsed = time.perf_counter() - start
    return cfg, base / "w1", report, elapsed


# 1 ----------------------------------------------------------------------------------

def test_free_field_ranging():
    with criterion(1, "free-field ranging within 2 samples in >= 95 of 100 runs"):
        fs = 250_000
        room = shoebox((8.0, 6.0, 4.0), 1.0)  # every surface fully absorbing
        src = np.array([2.0, 3.0, 2.0])
        mic = src + np.array([3.0, 0.0, 0.0])
        chirp = generate_chirp(ChirpSpec(45_000.0, 25_000.0, 0.03), fs)
        res = simulate_room(room, [(Transducer("speaker", src), chirp)], [mic], sim_rate=fs, mic_rate=fs,
                            max_order=1, capture_s=0.05)
        (rx,) = res.received.values()
        c = room.sound_speed
        tol = 2 * c / fs
        hits = 0
        for seed in range(100):
            env = envelope(matched_filter(add_awgn(rx, 30.0, seed), chirp), sample_rate=fs)
            hits += abs(estimate_tof(env, sound_speed=c).range_m - 3.0) <= tol
        assert tol == pytest.approx(0.00275, abs=1e-4)
        assert hits >= 95, f"{hits}/100 runs within {tol * 1e3:.2f} mm"


# 2 ----------------------------------------------------------------------------------

def test_shoebox_ism_exactness():
    with criterion(2, "shoebox images match the mirror map, 25 images up to order 2"):
        dims = (5.0, 4.0, 3.0)
        room = shoebox(dims, 0.3)
        src = np.array([1.3, 2.9, 0.7])
        for order in range(4):
            got = np.array(sorted(map(tuple, enumerate_images_shoebox(room, src, order).positions)))
            want = np.array(sorted(map(tuple, oracles.mirror_lattice(dims, src, order).values())))
            assert got.shape == want.shape
            assert np.abs(got - want).max() < 1e-12
        assert len(enumerate_images_shoebox(room, src, 2)) == 25


# 3 ----------------------------------------------------------------------------------

@pytest.mark.slow
def test_rt60_round_trip():
    with criterion(3, "Schroeder RT60 within 20% of the target for 0.3, 0.5 and 1.0 s"):
        measured = {}
        for target in (0.3, 0.5, 1.0):
            room = shoebox((5.0, 4.0, 3.0), rt60_target=target)
            spk = Transducer("speaker", np.array([1.2, 1.1, 1.3]))
            res = simulate_room(room, [(spk, np.array([1.0]))], [np.array([3.6, 2.7, 1.6])], sim_rate=8000,
                                capture_s=1.5 * target, air_absorption=False)
            (rir,) = res.rirs.values()
            measured[target] = schroeder_rt60(rir)
        for target, value in measured.items():
            assert value == pytest.approx(target, rel=0.2), measured


# 4 ----------------------------------------------------------------------------------

def test_multilateration_oracle_equivalence():
    with criterion(4, "five solvers exact on 100 geometries, within 2 mm of grid oracles under noise"):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            a, x = oracles.random_geometry(rng)
            r = np.linalg.norm(a - x, axis=1)
            for method in METHODS:
                assert np.linalg.norm(multilaterate(a, r, method).position - x) < 1e-6, method
        own_cost = {
            "gauss_newton": oracles.range_cost, "intersections": oracles.range_cost,
            "bancroft": oracles.squared_range_cost, "beck": oracles.squared_range_cost,
            "cheung": oracles.squared_range_cost,
        }
        for _ in range(10):
            a, x = oracles.random_geometry(rng)
            r = np.linalg.norm(a - x, axis=1) + rng.normal(0.0, 0.01, len(a))
            for method in METHODS:
                est = multilaterate(a, r, method).position
                ref = oracles.grid_minimizer(own_cost[method](a, r), x)
                assert np.linalg.norm(est - ref) < 2e-3, method


# 5 ----------------------------------------------------------------------------------

@pytest.mark.slow
def test_scenario_replication(scenario):
    with criterion(5, "scenario TOF within 2 samples at >= 90% of links, complete monotone CDFs"):
        cfg, out, report, elapsed = scenario
        assert report.executed == ["physical", "postprocess", "positioning", "evaluation"]
        scene = read_json(out / "physical" / "scene.json")
        anchors = {k: np.array(v) for k, v in scene["anchors"].items()}
        positions = read_csv(out / "physical" / "positions.csv")
        assert sum(row["set"] == "test" for row in positions) == 30
        mics = {str(i): np.array([float(row[k]) for k in "xyz"]) for i, row in enumerate(positions)}
        c, fs = scene["sound_speed"], scene["mic_rate"]
        rows = read_csv(out / "positioning" / "ranges_snr0_run0.csv")
        errors = [abs(float(row["tof_s"]) - np.linalg.norm(mics[row["mic_id"]] - anchors[row["anchor_id"]]) / c) * fs
                  for row in rows]
        share = np.mean(np.asarray(errors) <= 2.0)
        assert len(errors) == 4 * len(mics)
        assert share >= 0.9, f"only {share:.1%} of links within 2 samples"
        spec = read_json(out / "evaluation" / "cdf_snr0.json")
        assert set(spec["series"]) == set(METHODS)
        for series in spec["series"].values():
            xs, ps = np.array(series).T
            assert len(xs) == 30
            assert np.all(np.diff(xs) >= 0) and np.all(np.diff(ps) > 0)
            assert ps[-1] == 1.0 and ps[0] > 0
        assert elapsed < 600


# 6 ----------------------------------------------------------------------------------

def test_noise_calibration():
    with criterion(6, "requested SNR achieved within 0.2 dB on 1e5-sample signals"):
        fs = 250_000
        chirp = generate_chirp(ChirpSpec(45_000.0, 25_000.0, 0.4), fs)[:100_000]
        assert len(chirp) == 100_000
        for snr in (0.0, 10.0, 30.0):
            for seed in range(10):
                measured = oracles.measured_snr_db(chirp, add_awgn(chirp, snr, seed))
                assert measured == pytest.approx(snr, abs=0.2), (snr, seed, measured)


# 7 ----------------------------------------------------------------------------------

@pytest.mark.slow
def test_determinism_across_workers(scenario, tmp_path):
    with criterion(7, "identical output bytes for 1, 4 and 8 workers"):
        cfg, out1, _, _ = scenario
        reference = _digests(out1)
        assert len(reference) > 100
        for workers in (4, 8):
            with cache_dir(tmp_path / f"cache{workers}"):
                report = run_pipeline(cfg, out=tmp_path / f"w{workers}", workers=workers)
            assert report.cached == []
            assert _digests(tmp_path / f"w{workers}") == reference, workers


# 8 ----------------------------------------------------------------------------------

def test_physics_properties():
    with criterion(8, "reflection and air-absorption laws, absorption nondecreasing over 20-50 kHz"):
        assert reflection_amplitude(0.7, 0.0) == 0.7
        assert reflection_amplitude(0.7, 1.0) == 0.0
        assert reflection_amplitude(1.0, 0.43) == pytest.approx(np.sqrt(0.57), abs=1e-15)
        for a, d in [(0.0, 5.0), (0.3, 0.0), (0.12, 7.5), (1.4, 2.0)]:
            assert air_absorption_factor(a, d) == pytest.approx(np.exp(-a * d), rel=1e-15)
        f = np.linspace(20_000.0, 50_000.0, 301)
        alpha = air_absorption_coefficient(f, 20.0, 0.5)
        assert np.all(alpha >= 0)
        assert np.all(np.diff(alpha) >= 0)


# 9 ----------------------------------------------------------------------------------

@pytest.mark.slow
def test_cache_behaviour(scenario, tmp_path, caplog):
    with criterion(9, "changing snr_db re-runs postprocess onward and reuses physical outputs"):
        cfg, out1, _, _ = scenario
        out = tmp_path / "run"
        with cache_dir(tmp_path / "cache"):
            run_pipeline(cfg, out=out)
            before = _digests(out / "physical")
            with caplog.at_level(logging.INFO, logger="acousim.pipeline.stages"):
                report = run_pipeline(cfg.with_overrides(postprocess={"snr_db": 10.0}), out=out)
        assert report.cached == ["physical"]
        assert report.executed == ["postprocess", "positioning", "evaluation"]
        messages = [r.getMessage() for r in caplog.records]
        assert "physical: cache hit" in messages
        assert "postprocess: executing" in messages
        assert _digests(out / "physical") == before
        assert read_json(out / "postprocess" / "manifest.json")["snr_db"] == ["10.0"]


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
