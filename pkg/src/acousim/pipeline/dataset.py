"""Train/dev/test feature export for learning-based positioning."""

from pathlib import Path

import numpy as np

from ..exceptions import MissingFeatures
from .io import write_csv

SPLITS = ("train", "dev", "test")


def export_dataset(positions, features, out_dir, anchors, fixed_length):
    """Write ``train.csv``, ``dev.csv`` and ``test.csv``.

    ``features`` maps the global mic index (test grid first, then train and
    dev clouds, as in :meth:`PositionSet.all_points`) to a vector of
    ``len(anchors) * fixed_length`` values. Each row holds the mic index, the
    position label and the flattened features, anchor by anchor.
    """
    points, labels = positions.all_points()
    width = len(anchors) * fixed_length
    missing = [i for i in range(len(points)) if i not in features]
    if missing:
        raise MissingFeatures(f"no features for position(s) {missing[:5]}")
    header = ["mic_id", "x", "y", "z"] + [f"s{a}_{k}" for a in anchors for k in range(fixed_length)]
    out = Path(out_dir)
    paths = {}
    for split in SPLITS:
        rows = []
        for i in np.flatnonzero(labels == split):
            f = np.asarray(features[i], dtype=float)
            if f.size != width:
                raise MissingFeatures(f"position {i} has {f.size} features, expected {width}")
            rows.append([int(i), *(float(v) for v in points[i]), *(float(np.float32(v)) for v in f)])
        paths[split] = out / f"{split}.csv"
        write_csv(paths[split], header, rows)
    return paths
