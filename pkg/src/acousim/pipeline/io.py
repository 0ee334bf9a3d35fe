"""Deterministic artifact I/O: float32 WAV, CSV, JSON and SHA-256 digests."""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np
from scipy.io import wavfile


def sha256_file(path, chunk=1 << 20):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        while True:
            block = fh.read(chunk)
            if not block:
                break
            h.update(block)
    return h.hexdigest()


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def sha256_json(obj):
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def write_json(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_wav(path, samples, rate):
    """Float32 WAV; 2-D input is written as (frames, channels)."""
    x = np.asarray(samples, dtype=np.float32)
    wavfile.write(str(path), int(round(rate)), x)


def read_wav(path):
    rate, x = wavfile.read(str(path))
    return np.asarray(x, dtype=float), rate


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
