import copy
import json
from pathlib import Path

import numpy as np
import pytest
from scipy.io import wavfile

from acousim.exceptions import (
    MissingFeatures, ParseError, RT60OnNonShoebox, StageFailure, UnknownKey, UpstreamMissing, ValidationError,
)
from acousim.pipeline import STAGES, export_dataset, load_config, parse_config, run_parallel, run_pipeline, task_seed
from acousim.pipeline.cli import main
from acousim.pipeline.io import read_csv, read_wav, write_csv
from acousim.scene import generate_positions, shoebox

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

TINY = {
    "room": {"dimensions": [4.0, 3.0, 2.5], "rt60_target": 0.2},
    "transducers": {"speakers": [{"position": p} for p in (
        [0.2, 0.2, 2.3], [3.8, 0.2, 2.3], [2.0, 2.8, 2.3], [2.0, 1.5, 0.2])]},
    "positions": {"spacing": 1.0, "n_cloud": 10, "test_subset": 4},
    "simulation": {"max_order": 2, "capture_s": 0.04},
    "postprocess": {"snr_db": 30, "envelope_cutoff_hz": 20000, "fixed_length": 50},
}


def tiny(**sections):
    data = copy.deepcopy(TINY)
    for name, values in sections.items():
        data.setdefault(name, {}).update(values)
    return parse_config(data)


def _write_toml(path, text):
    path.write_text(text)
    return path


# configuration -------------------------------------------------------------------------

def test_minimal_config_defaults():
    cfg = load_config(CONFIGS / "shoebox_minimal.toml")
    assert cfg.simulation.mode == "ism"
    assert cfg.simulation.sim_rate == 250_000
    assert cfg.signal.f_start == 45_000.0 and cfg.signal.f_end == 25_000.0
    assert cfg.postprocess.fixed_length == 1000


def test_scenario_config_anchor_positions():
    cfg = load_config(CONFIGS / "techtile.toml")
    positions = [list(s.position) for s in cfg.transducers.speakers]
    assert positions == [[0.5, 0.05, 0.146], [1.015, 3.950, 2.215], [5.183, 0.067, 0.744], [6.901, 3.948, 1.322]]
    assert cfg.postprocess.snr_list == [30.0]
    assert cfg.signal.duration == 0.03


def test_rt60_on_l_room_rejected(tmp_path):
    path = _write_toml(tmp_path / "l.toml", """
[room]
floor_vertices = [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]]
height = 2.5
rt60_target = 0.4

[[transducers.speakers]]
position = [0.5, 0.5, 1.0]
""")
    with pytest.raises(RT60OnNonShoebox):
        load_config(path)


def test_unknown_key_has_path():
    data = copy.deepcopy(TINY)
    data["simulation"]["max_ordr"] = 3
    with pytest.raises(UnknownKey) as err:
        parse_config(data)
    assert "simulation.max_ordr" in str(err.value)


def test_bad_value_has_path():
    data = copy.deepcopy(TINY)
    data["positions"]["spacing"] = -1.0
    with pytest.raises(ValidationError) as err:
        parse_config(data)
    assert "positions.spacing" in str(err.value)


def test_parse_errors(tmp_path):
    with pytest.raises(ParseError):
        load_config(tmp_path / "missing.toml")
    with pytest.raises(ParseError):
        load_config(_write_toml(tmp_path / "bad.toml", "[room\n"))


def test_with_overrides_revalidates():
    cfg = tiny()
    assert cfg.with_overrides(postprocess={"snr_db": 10}).postprocess.snr_list == [10.0]
    with pytest.raises(ValidationError):
        cfg.with_overrides(signal={"f_start": 200_000.0})


# parallel execution ------------------------------------------------------------------------

def _maybe_fail(i):
    if i == 2:
        raise RuntimeError("boom")
    return i * i


@pytest.mark.parametrize("workers", [1, 3])
def test_run_parallel_isolates_failures(workers):
    results, failures = run_parallel(_maybe_fail, [(i, (i,)) for i in range(5)], workers)
    assert results == {0: 0, 1: 1, 3: 9, 4: 16}
    assert list(failures) == [2] and "boom" in failures[2]


def test_run_parallel_rejects_zero_workers():
    with pytest.raises(ValueError):
        run_parallel(_maybe_fail, [], 0)


def test_task_seed_depends_on_ids():
    a = np.random.default_rng(task_seed(1, 0, 3)).random()
    assert a == np.random.default_rng(task_seed(1, 0, 3)).random()
    assert a != np.random.default_rng(task_seed(1, 3, 0)).random()


# dataset export -----------------------------------------------------------------------------

def test_dataset_cardinality(tmp_path):
    room = shoebox((6.0, 5.0, 3.0), "wood")
    ps = generate_positions(room, spacing=1.0, margin=0.5, n_cloud=100, ratios=(0.8, 0.2), seed=0)
    ps = ps.__class__(ps.test_grid[:60], ps.train_cloud, ps.dev_cloud) if len(ps.test_grid) > 60 else ps
    n = len(ps.all_points()[0])
    feats = {i: np.full(4 * 5, float(i)) for i in range(n)}
    paths = export_dataset(ps, feats, tmp_path, range(4), 5)
    sizes = {k: len(read_csv(p)) for k, p in paths.items()}
    assert sizes == {"test": len(ps.test_grid), "train": 80, "dev": 20}
    assert len(ps.test_grid) == 60
    header = (tmp_path / "train.csv").read_text().splitlines()[0].split(",")
    assert len(header) == 4 + 4 * 5 and header[4] == "s0_0" and header[-1] == "s3_4"
    before = {k: p.read_bytes() for k, p in paths.items()}
    export_dataset(ps, feats, tmp_path, range(4), 5)
    assert before == {k: p.read_bytes() for k, p in paths.items()}


def test_dataset_missing_features(tmp_path):
    room = shoebox((3.0, 3.0, 3.0), "wood")
    ps = generate_positions(room, spacing=1.0, margin=0.5, n_cloud=5, seed=0)
    with pytest.raises(MissingFeatures):
        export_dataset(ps, {}, tmp_path, range(4), 5)


def test_write_csv_round_trips_numpy_floats(tmp_path):
    path = tmp_path / "x.csv"
    write_csv(path, ["a", "b"], [[np.float64(0.1), np.float32(0.5)]])
    assert read_csv(path) == [{"a": "0.1", "b": "0.5"}]


# stage orchestration ----------------------------------------------------------------------

@pytest.fixture
def tiny_run(tmp_path):
    cfg = tiny()
    out = tmp_path / "out"
    report = run_pipeline(cfg, out=out)
    return cfg, out, report


def test_run_writes_all_artifacts(tiny_run):
    cfg, out, report = tiny_run
    assert report.executed == list(STAGES)
    for stage in STAGES:
        manifest = json.loads((out / stage / "manifest.json").read_text())
        assert manifest["dependency_hash"] == report.hashes[stage]
    phys = out / "physical"
    assert (phys / "positions.csv").read_text().splitlines()[0] == "x,y,z,set"
    rate, raw = wavfile.read(phys / "rir_s0_m0.wav")
    assert rate == 250_000 and raw.dtype == np.float32
    assert read_wav(phys / "rx_s3_m3.wav")[0].size > 0
    assert json.loads((phys / "s0_m0.json").read_text())
    rng = (out / "positioning" / "ranges_snr0_run0.csv").read_text().splitlines()[0]
    assert rng == "mic_id,anchor_id,tof_s,range_m"
    est = (out / "positioning" / "estimates_snr0_run0.csv").read_text().splitlines()
    assert est[0] == "mic_id,method,x,y,z,residual_rms,converged"
    assert len(est) == 1 + (4 + 10) * 5  # every simulated mic, grid and cloud
    assert {p.name for p in (out / "postprocess").glob("*.csv")} == {"train.csv", "dev.csv", "test.csv"}
    ev = out / "evaluation"
    assert (ev / "room_outline.csv").exists() and (ev / "error_map_snr0.csv").exists()
    spec = json.loads((ev / "cdf_snr0.json").read_text())
    assert set(spec["series"]) == set(cfg.positioning.methods)


def test_identical_rerun_is_cached_and_byte_identical(tiny_run):
    cfg, out, _ = tiny_run
    before = {p: p.read_bytes() for p in out.rglob("*") if p.is_file() and p.name != "last_run.json"}
    report = run_pipeline(cfg, out=out)
    assert report.executed == [] and report.cached == list(STAGES)
    after = {p: p.read_bytes() for p in before}
    assert before == after


MUTATIONS = [
    ("room", {"rt60_target": 0.25}, STAGES),
    ("materials", {"default": "wood"}, None),
    ("environment", {"temperature_c": 25.0}, STAGES),
    ("transducers", {"speakers": [{"position": p} for p in (
        [0.3, 0.2, 2.3], [3.8, 0.2, 2.3], [2.0, 2.8, 2.3], [2.0, 1.5, 0.2])]}, STAGES),
    ("signal", {"duration": 0.02}, STAGES),
    ("positions", {"n_cloud": 12}, STAGES),
    ("simulation", {"max_order": 1}, STAGES),
    ("postprocess", {"snr_db": 20}, STAGES[1:]),
    ("positioning", {"methods": ["beck"]}, STAGES[2:]),
    ("evaluation", {"percentiles": [50]}, STAGES[3:]),
    ("run", {"workers": 2}, ()),
]


@pytest.mark.parametrize("section,change,expected", MUTATIONS, ids=[m[0] for m in MUTATIONS])
def test_cache_reruns_exactly_the_dependent_stages(tiny_run, section, change, expected):
    cfg, out, first = tiny_run
    if section == "materials":
        # materials and an RT60 target are mutually exclusive; swap one for the other
        data = copy.deepcopy(TINY)
        data["room"].pop("rt60_target")
        data["materials"] = change
        new = parse_config(data)
        expected = STAGES
    else:
        new = tiny(**{section: change})
    report = run_pipeline(new, out=out)
    assert report.executed == list(expected)
    changed = [s for s in STAGES if report.hashes[s] != first.hashes[s]]
    assert changed == list(expected)


def test_seed_change_reruns_seeded_stages(tiny_run):
    cfg, out, _ = tiny_run
    report = run_pipeline(cfg.with_overrides(run={"seed": 99}), out=out)
    assert report.executed == list(STAGES)


def test_switching_back_restores_from_store(tiny_run):
    cfg, out, _ = tiny_run
    run_pipeline(tiny(postprocess={"snr_db": 10}), out=out)
    report = run_pipeline(cfg, out=out)
    assert report.executed == [] and report.cached == list(STAGES)


def test_single_stage_needs_upstream(tmp_path):
    with pytest.raises(UpstreamMissing):
        run_pipeline(tiny(), stage="positioning", out=tmp_path / "fresh")


def test_single_stage_after_upstream(tmp_path):
    cfg, out = tiny(), tmp_path / "o"
    assert run_pipeline(cfg, stage="physical", out=out).executed == ["physical"]
    assert run_pipeline(cfg, stage="postprocess", out=out).executed == ["postprocess"]
    assert not (out / "positioning").exists()


def test_tampered_output_invalidates_stage(tiny_run, monkeypatch, tmp_path):
    cfg, out, _ = tiny_run
    monkeypatch.setenv("ACOUSIM_CACHE_DIR", str(tmp_path / "other-cache"))
    (out / "evaluation" / "summary.json").write_text("{}")
    assert run_pipeline(cfg, out=out).executed == ["evaluation"]


def test_stages_communicate_only_through_files(tiny_run, tmp_path):
    cfg, out, _ = tiny_run
    ref = (out / "evaluation" / "summary.json").read_bytes()
    run_pipeline(cfg, stage="evaluation", out=out, force=True)
    assert (out / "evaluation" / "summary.json").read_bytes() == ref


def test_unknown_stage():
    with pytest.raises(ValidationError):
        run_pipeline(tiny(), stage="render")


# command-line interface -------------------------------------------------------------------

def _toml_for_tiny(path):
    return _write_toml(path, """
[room]
dimensions = [4.0, 3.0, 2.5]
rt60_target = 0.2

[[transducers.speakers]]
position = [0.2, 0.2, 2.3]
[[transducers.speakers]]
position = [3.8, 0.2, 2.3]
[[transducers.speakers]]
position = [2.0, 2.8, 2.3]
[[transducers.speakers]]
position = [2.0, 1.5, 0.2]

[positions]
spacing = 1.0
n_cloud = 10
test_subset = 4

[simulation]
max_order = 2
capture_s = 0.04

[postprocess]
snr_db = 30
envelope_cutoff_hz = 20000
fixed_length = 50
""")


def test_cli_validate(tmp_path, capsys):
    assert main(["validate", "--config", str(_toml_for_tiny(tmp_path / "c.toml"))]) == 0
    assert capsys.readouterr().out.startswith("ok:")


def test_cli_validation_exit_code(tmp_path):
    bad = _write_toml(tmp_path / "bad.toml", "[room]\ndimensions = [1, 2, 3]\nbogus = 1\n")
    assert main(["validate", "--config", str(bad)]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == 2
    cfg = _toml_for_tiny(tmp_path / "c.toml")
    assert main(["run", "--config", str(cfg), "--workers", "0"]) == 2


def test_cli_run_and_cache(tmp_path, capsys):
    cfg = _toml_for_tiny(tmp_path / "c.toml")
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    assert "physical: executed" in capsys.readouterr().out
    assert main(["run", "--config", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    assert "evaluation: cached" in capsys.readouterr().out
    assert main(["run", "--config", str(cfg), "--out", str(out), "--seed", "3", "--stage", "evaluation",
                 "--force"]) == 0
    assert capsys.readouterr().out.strip() == "evaluation: executed"


def test_cli_stage_failure_exit_code(tmp_path, capsys):
    cfg = _toml_for_tiny(tmp_path / "c.toml")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--stage", "evaluation"]) == 3
    assert "error" in capsys.readouterr().err


def test_cli_task_failure_exit_code(tmp_path, monkeypatch):
    import acousim.pipeline.stages as stages

    def broken(*args):
        raise RuntimeError("simulated crash")

    monkeypatch.setattr(stages, "_physical_task", broken)
    cfg = _toml_for_tiny(tmp_path / "c.toml")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_stage_failure_lists_tasks():
    err = StageFailure("physical", {(0,): "x"})
    assert err.failures == {(0,): "x"}
