"""Content-addressed stage cache.

A stage's dependency hash covers the config sections it reads and the
manifest hash of the stage before it. Its outputs live in ``<out>/<stage>/``
next to a ``manifest.json`` recording that hash and a digest per file. A
finished stage is also copied into the store (``$ACOUSIM_CACHE_DIR`` or
``<out>/.cache``) under ``<stage>/<hash>/`` so that switching back to an
earlier configuration restores outputs instead of recomputing them.
"""

import os
import shutil
from pathlib import Path

from .io import read_json, sha256_file, sha256_json, write_json

STAGES = ("physical", "postprocess", "positioning", "evaluation")

# config sections each stage reads directly
STAGE_SECTIONS = {
    "physical": ("room", "materials", "environment", "transducers", "signal", "positions", "simulation"),
    "postprocess": ("signal", "postprocess"),
    "positioning": ("positioning",),
    "evaluation": ("evaluation",),
}
SEEDED = {"physical", "postprocess"}
CACHE_FORMAT = 1


def cache_root(out_dir):
    env = os.environ.get("ACOUSIM_CACHE_DIR")
    return Path(env) if env else Path(out_dir) / ".cache"


def dependency_hash(cfg, stage, upstream_hash=None):
    payload = {
        "format": CACHE_FORMAT,
        "stage": stage,
        "sections": {name: cfg.section(name) for name in STAGE_SECTIONS[stage]},
        "upstream": upstream_hash,
    }
    if stage in SEEDED:
        payload["seed"] = cfg.run.seed
    return sha256_json(payload)


def manifest_hash(stage_dir):
    return sha256_file(Path(stage_dir) / "manifest.json")


def write_manifest(stage_dir, stage, dep_hash, extra=None):
    stage_dir = Path(stage_dir)
    files = {
        p.name: sha256_file(p)
        for p in sorted(stage_dir.iterdir())
        if p.is_file() and p.name != "manifest.json"
    }
    manifest = {"stage": stage, "dependency_hash": dep_hash, "files": files}
    if extra:
        manifest.update(extra)
    write_json(manifest, stage_dir / "manifest.json")
    return manifest


def read_manifest(stage_dir):
    path = Path(stage_dir) / "manifest.json"
    return read_json(path) if path.exists() else None


def is_valid(stage_dir, dep_hash, verify=True):
    """Outputs exist, match ``dep_hash`` and (optionally) their recorded digests."""
    m = read_manifest(stage_dir)
    if m is None or m.get("dependency_hash") != dep_hash:
        return False
    if verify:
        for name, digest in m["files"].items():
            p = Path(stage_dir) / name
            if not p.exists() or sha256_file(p) != digest:
                return False
    return True


def store(stage_dir, stage, dep_hash, root):
    dst = Path(root) / stage / dep_hash
    if dst.exists():
        return dst
    tmp = dst.with_name(dst.name + ".tmp")
    if tmp.exists():
        shutil.rmtree(tmp)
    shutil.copytree(stage_dir, tmp)
    tmp.rename(dst)
    return dst


def restore(stage_dir, stage, dep_hash, root):
    """Copy cached outputs back into ``stage_dir``; False if absent or corrupt."""
    src = Path(root) / stage / dep_hash
    if not is_valid(src, dep_hash):
        return False
    stage_dir = Path(stage_dir)
    if stage_dir.exists():
        shutil.rmtree(stage_dir)
    shutil.copytree(src, stage_dir)
    return True
