"""The four pipeline stages and the orchestrator that caches them.

Stages talk to each other only through files under ``<out>/<stage>/``:

physical
    ``positions.csv``, ``scene.json``, ``rir_s{i}_m{j}.wav``,
    ``rx_s{i}_m{j}.wav`` and a ``s{i}_m{j}.json`` sidecar per pair.
postprocess
    ``env_snr{k}_run{r}_m{j}.wav`` (one channel per anchor) and the
    ``train.csv`` / ``dev.csv`` / ``test.csv`` feature dataset.
positioning
    ``ranges_snr{k}_run{r}.csv`` and ``estimates_snr{k}_run{r}.csv``.
evaluation
    ``error_map_snr{k}.csv``, ``room_outline.csv``, ``cdf_snr{k}.json`` and
    ``summary.json``.
"""

import logging
import math
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from ..evaluation import cdf_plot_spec, compute_errors, empirical_cdf, export_error_map, mean_euclidean_error
from ..exceptions import StageFailure, UpstreamMissing, ValidationError
from ..positioning import estimate_tof, multilaterate
from ..propagation.simulate import simulate_room
from ..scene.positions import PositionSet, generate_positions
from ..signal.chirp import ChirpSpec, generate_chirp
from ..signal.compression import agc, envelope, fixed_size_downsample, matched_filter
from ..signal.montecarlo import noise_seed
from ..signal.noise import add_awgn, add_interference
from . import cache
from .config import build_mics, build_room, build_speakers, chirp_spec
from .dataset import export_dataset
from .io import read_csv, read_json, read_wav, write_csv, write_json, write_wav
from .parallel import run_parallel, task_seed

log = logging.getLogger(__name__)

MIC_BATCH = 10


def _batches(n, size=MIC_BATCH):
    return [list(range(i, min(i + size, n))) for i in range(0, n, size)]


def _fail(stage, failures):
    if failures:
        raise StageFailure(stage, {k: v.splitlines()[0] for k, v in failures.items()})


def snr_label(snr):
    return "inf" if math.isinf(snr) else repr(float(snr))


# physical --------------------------------------------------------------------

def select_positions(cfg, room):
    p = cfg.positions
    seed = cfg.run.seed if p.seed is None else p.seed
    pos = generate_positions(room, p.spacing, p.n_cloud, p.ratios, p.margin, seed)
    if p.test_subset is not None and p.test_subset < len(pos.test_grid):
        idx = np.unique(np.round(np.linspace(0, len(pos.test_grid) - 1, p.test_subset)).astype(int))
        pos = PositionSet(pos.test_grid[idx], pos.train_cloud, pos.dev_cloud)
    return pos


def _speaker_signals(cfg, speakers):
    rate = cfg.simulation.sim_rate
    chirp = generate_chirp(chirp_spec(cfg), rate)
    out = []
    for i, s in enumerate(speakers):
        if s.emitted_signal == "interferer":
            rng = np.random.default_rng(task_seed(cfg.run.seed, 7, i))
            out.append((s, rng.standard_normal(len(chirp)) * cfg.signal.amplitude / np.sqrt(2.0)))
        else:
            out.append((s, chirp))
    return out


def _physical_task(cfg, mic_indices, positions):
    room = build_room(cfg)
    speakers = _speaker_signals(cfg, build_speakers(cfg, room))
    mics = build_mics(cfg, room, positions)
    mics = [type(m)(m.kind, m.position, m.directivity, m.sample_rate_hz, id=str(j))
            for m, j in zip(mics, mic_indices)]
    sim = cfg.simulation
    ray_seeds = {(si, k): [cfg.run.seed, 11, si, j] for si in range(len(speakers)) for k, j in enumerate(mic_indices)}
    res = simulate_room(room, speakers, mics, sim.sim_rate, sim.mode, sim.max_order, seed=cfg.run.seed,
                        mic_rate=cfg.transducers.microphone.sample_rate_hz, capture_s=sim.capture_s,
                        air_absorption=sim.air_absorption, n_rays=sim.n_rays, experimental=sim.experimental,
                        ray_seeds=ray_seeds)
    return {k: (res.rirs[k].samples.astype(np.float32), res.received[k].astype(np.float32)) for k in res.rirs}


def run_physical(cfg, stage_dir, workers, dep_hash):
    room = build_room(cfg)
    speakers = build_speakers(cfg, room)
    pos = select_positions(cfg, room)
    pos.to_csv(stage_dir / "positions.csv")
    points, _ = pos.all_points()
    mic_rate = cfg.transducers.microphone.sample_rate_hz
    anchors = [i for i, s in enumerate(speakers) if s.emitted_signal != "interferer"]
    write_json({
        "anchors": {str(i): speakers[i].position.tolist() for i in anchors},
        "sound_speed": room.sound_speed,
        "mic_rate": mic_rate,
        "sim_rate": cfg.simulation.sim_rate,
        "floor_vertices": np.asarray(room.floor_vertices).tolist(),
        "height": room.height,
        "n_mics": len(points),
    }, stage_dir / "scene.json")

    tasks = [(tuple(b), (cfg, b, points[b])) for b in _batches(len(points))]
    results, failures = run_parallel(_physical_task, tasks, workers)
    _fail("physical", failures)
    for _, out in sorted(results.items()):
        for (sid, mid), (rir, rx) in sorted(out.items(), key=lambda kv: (int(kv[0][0]), int(kv[0][1]))):
            stem = f"s{sid}_m{mid}"
            write_wav(stage_dir / f"rir_{stem}.wav", rir, cfg.simulation.sim_rate)
            write_wav(stage_dir / f"rx_{stem}.wav", rx, mic_rate)
            write_json({
                "speaker": int(sid), "mic": int(mid),
                "speaker_position": speakers[int(sid)].position.tolist(),
                "mic_position": points[int(mid)].tolist(),
                "sim_rate": cfg.simulation.sim_rate, "mic_rate": mic_rate,
                "config_hash": dep_hash,
            }, stage_dir / f"{stem}.json")


# postprocess -----------------------------------------------------------------

def _interferer(cfg, rate, length):
    it = cfg.postprocess.interferer
    sig = generate_chirp(ChirpSpec(it.f_start, it.f_end, it.duration), rate)
    out = np.zeros(length)
    start = int(round(it.delay_s * rate))
    seg = sig[: max(0, length - start)]
    out[start : start + len(seg)] = seg
    return out


def _postprocess_task(cfg, phys_dir, snr_index, snr, run, mic_indices, anchors, rate):
    pp = cfg.postprocess
    template = generate_chirp(chirp_spec(cfg), rate)
    envs, feats = {}, {}
    for j in mic_indices:
        chans, fvec = [], []
        for a_pos, a in enumerate(anchors):
            rx, _ = read_wav(Path(phys_dir) / f"rx_s{a}_m{j}.wav")
            if pp.sir_db is not None:
                rx = add_interference(rx, _interferer(cfg, rate, len(rx)), pp.sir_db)
            seed = noise_seed(cfg.run.seed, snr_index, run, j * len(anchors) + a_pos)
            noisy = add_awgn(rx, snr, np.random.default_rng(seed))
            if pp.agc:
                noisy = agc(noisy)
            env = envelope(matched_filter(noisy, template, pp.one_bit), pp.envelope_cutoff_hz, rate)
            chans.append(env.samples)
            fvec.append(fixed_size_downsample(env, pp.fixed_length).samples)
        envs[j] = np.column_stack(chans).astype(np.float32)
        feats[j] = np.concatenate(fvec)
    return envs, feats


def run_postprocess(cfg, stage_dir, workers, phys_dir):
    scene = read_json(phys_dir / "scene.json")
    anchors = sorted(int(a) for a in scene["anchors"])
    rate = scene["mic_rate"]
    n = scene["n_mics"]
    pp = cfg.postprocess
    tasks = []
    for k, snr in enumerate(pp.snr_list):
        for run in range(pp.monte_carlo_runs):
            for b in _batches(n):
                tasks.append(((k, run, b[0]), (cfg, str(phys_dir), k, snr, run, b, anchors, rate)))
    results, failures = run_parallel(_postprocess_task, tasks, workers)
    _fail("postprocess", failures)
    first = {}
    for (k, run, _), (envs, feats) in sorted(results.items()):
        for j, env in envs.items():
            write_wav(stage_dir / f"env_snr{k}_run{run}_m{j}.wav", env, rate)
        if (k, run) == (0, 0):
            first.update(feats)
    pos = PositionSet.from_csv(phys_dir / "positions.csv")
    export_dataset(pos, first, stage_dir, anchors, pp.fixed_length)
    return {"snr_db": [snr_label(s) for s in pp.snr_list], "runs": pp.monte_carlo_runs,
            "anchors": anchors, "fixed_length": pp.fixed_length}


# positioning ------------------------------------------------------------------

def _positioning_task(cfg, pp_dir, k, run, mic_indices, anchor_ids, anchor_pos, rate, c):
    pc = cfg.positioning
    ranges, estimates = [], []
    for j in mic_indices:
        env, _ = read_wav(Path(pp_dir) / f"env_snr{k}_run{run}_m{j}.wav")
        env = env.reshape(len(env), -1)
        rs = []
        for col, a in enumerate(anchor_ids):
            r = estimate_tof(np.maximum(env[:, col], 0.0), pc.tof_mode, pc.min_prominence, rate, c,
                             anchor_id=a, interpolate=pc.interpolate)
            rs.append(r)
            ranges.append((j, a, r.tof_s, r.range_m))
        for method in pc.methods:
            est = multilaterate(anchor_pos, rs, method)
            x, y, z = (float(v) for v in est.position)
            estimates.append((j, method, x, y, z, est.residual_rms, str(est.converged).lower()))
    return ranges, estimates


def run_positioning(cfg, stage_dir, workers, phys_dir, pp_dir):
    scene = read_json(phys_dir / "scene.json")
    meta = cache.read_manifest(pp_dir)
    ids = [str(a) for a in meta["anchors"]]
    anchor_pos = np.array([scene["anchors"][a] for a in ids])
    tasks = []
    for k in range(len(meta["snr_db"])):
        for run in range(meta["runs"]):
            for b in _batches(scene["n_mics"]):
                tasks.append(((k, run, b[0]), (cfg, str(pp_dir), k, run, b, ids, anchor_pos,
                                               scene["mic_rate"], scene["sound_speed"])))
    results, failures = run_parallel(_positioning_task, tasks, workers)
    _fail("positioning", failures)
    for k in range(len(meta["snr_db"])):
        for run in range(meta["runs"]):
            keys = sorted(t for t in results if t[:2] == (k, run))
            write_csv(stage_dir / f"ranges_snr{k}_run{run}.csv", ["mic_id", "anchor_id", "tof_s", "range_m"],
                      [row for t in keys for row in results[t][0]])
            write_csv(stage_dir / f"estimates_snr{k}_run{run}.csv",
                      ["mic_id", "method", "x", "y", "z", "residual_rms", "converged"],
                      [row for t in keys for row in results[t][1]])
    return {"snr_db": meta["snr_db"], "runs": meta["runs"], "methods": list(cfg.positioning.methods)}


# evaluation -------------------------------------------------------------------

def run_evaluation(cfg, stage_dir, phys_dir, pos_dir):
    scene = read_json(phys_dir / "scene.json")
    meta = cache.read_manifest(pos_dir)
    rows = read_csv(phys_dir / "positions.csv")
    truth = {i: (float(r["x"]), float(r["y"]), float(r["z"])) for i, r in enumerate(rows)}
    sets = {i: r["set"] for i, r in enumerate(rows)}
    if any(s == "test" for s in sets.values()):
        truth = {i: p for i, p in truth.items() if sets[i] == "test"}
    room = SimpleNamespace(floor_vertices=np.array(scene["floor_vertices"]), height=scene["height"])
    summary = {}
    for k, label in enumerate(meta["snr_db"]):
        per_method = {m: [] for m in meta["methods"]}
        for run in range(meta["runs"]):
            est = {}
            for r in read_csv(pos_dir / f"estimates_snr{k}_run{run}.csv"):
                est.setdefault(r["method"], {})[int(r["mic_id"])] = (float(r["x"]), float(r["y"]), float(r["z"]))
            for m in per_method:
                per_method[m].append(compute_errors(truth, est.get(m, {}), m))
        records, cdfs, stats = [], {}, {}
        for m, runs in per_method.items():
            errs = np.array([[rec.euclidean_error_m for rec in recs] for recs in runs]).T
            med = mean_euclidean_error(errs)
            for rec, e in zip(runs[0], med):
                records.append(SimpleNamespace(true_position=rec.true_position, euclidean_error_m=float(e), method=m))
            cdf = empirical_cdf(med)
            cdfs[m] = cdf
            stats[m] = {"n": int(len(med)), "mean": float(np.mean(med)),
                        **{f"p{q:g}": float(cdf.percentile(q)) for q in cfg.evaluation.percentiles}}
        if cfg.evaluation.error_map:
            export_error_map(records, room, stage_dir, prefix=f"error_map_snr{k}")
        write_json({**cdf_plot_spec(cdfs), "snr_db": label}, stage_dir / f"cdf_snr{k}.json")
        summary[label] = stats
    write_json(summary, stage_dir / "summary.json")
    return {"snr_db": meta["snr_db"]}


# orchestration ------------------------------------------------------------------

@dataclass
class RunReport:
    executed: list = field(default_factory=list)
    cached: list = field(default_factory=list)
    hashes: dict = field(default_factory=dict)


def _execute(stage, cfg, out, workers, dep_hash):
    stage_dir = out / stage
    if stage_dir.exists():
        shutil.rmtree(stage_dir)
    stage_dir.mkdir(parents=True)
    if stage == "physical":
        extra = run_physical(cfg, stage_dir, workers, dep_hash)
    elif stage == "postprocess":
        extra = run_postprocess(cfg, stage_dir, workers, out / "physical")
    elif stage == "positioning":
        extra = run_positioning(cfg, stage_dir, workers, out / "physical", out / "postprocess")
    else:
        extra = run_evaluation(cfg, stage_dir, out / "physical", out / "positioning")
    cache.write_manifest(stage_dir, stage, dep_hash, extra)


def run_pipeline(cfg, stage="all", out=None, workers=None, force=False):
    """Run ``stage`` (or all four) with caching; returns a :class:`RunReport`.

    A stage is executed only when no output matching its dependency hash
    exists in ``<out>/<stage>`` or in the cache store, or when ``force`` is
    set. A single named stage requires its upstream outputs to be current.
    """
    out = Path(out if out is not None else cfg.run.out)
    workers = cfg.run.workers if workers is None else workers
    if stage != "all" and stage not in cache.STAGES:
        raise ValidationError(f"unknown stage {stage!r}", "stage")
    wanted = cache.STAGES if stage == "all" else (stage,)
    root = cache.cache_root(out)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport()
    upstream = None
    for name in cache.STAGES:
        dep = cache.dependency_hash(cfg, name, upstream)
        stage_dir = out / name
        report.hashes[name] = dep
        if name in wanted:
            if not force and cache.is_valid(stage_dir, dep):
                log.info("%s: cache hit", name)
                report.cached.append(name)
            elif not force and cache.restore(stage_dir, name, dep, root):
                log.info("%s: restored from cache", name)
                report.cached.append(name)
            else:
                log.info("%s: executing", name)
                _execute(name, cfg, out, workers, dep)
                cache.store(stage_dir, name, dep, root)
                report.executed.append(name)
        elif cache.STAGES.index(name) < cache.STAGES.index(wanted[0]):
            if not cache.is_valid(stage_dir, dep, verify=False) and not cache.restore(stage_dir, name, dep, root):
                raise UpstreamMissing(f"stage {name!r} has no outputs for this configuration; run it first")
        else:
            break
        upstream = cache.manifest_hash(stage_dir)
    write_json({"executed": report.executed, "cached": report.cached, "hashes": report.hashes},
               out / "last_run.json")
    return report
