"""Microphone position sets: a regular test grid and random train/dev clouds."""

from dataclasses import dataclass

import numpy as np

from ..exceptions import EmptyGrid, SamplingExhausted, ValidationError


@dataclass(frozen=True, eq=False)
class PositionSet:
    test_grid: np.ndarray
    train_cloud: np.ndarray
    dev_cloud: np.ndarray

    @property
    def ratios(self):
        n = np.array([len(self.train_cloud), len(self.dev_cloud), len(self.test_grid)], float)
        return tuple(n / n.sum())

    def all_points(self):
        """Stacked points and a matching array of set labels."""
        pts = np.vstack([self.test_grid, self.train_cloud, self.dev_cloud])
        labels = np.array(
            ["test"] * len(self.test_grid) + ["train"] * len(self.train_cloud) + ["dev"] * len(self.dev_cloud)
        )
        return pts, labels

    def to_csv(self, path):
        pts, labels = self.all_points()
        with open(path, "w", newline="") as fh:
            fh.write("x,y,z,set\n")
            for p, s in zip(pts, labels):
                fh.write(f"{float(p[0])!r},{float(p[1])!r},{float(p[2])!r},{s}\n")

    @classmethod
    def from_csv(cls, path):
        data = np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="utf-8")
        data = np.atleast_1d(data)
        pts = np.column_stack([data["x"], data["y"], data["z"]]).astype(float)
        sets = data["set"]
        return cls(pts[sets == "test"], pts[sets == "train"], pts[sets == "dev"])


def generate_test_grid(room, spacing, margin=0.5):
    """Regular lattice with pitch ``spacing`` centred in the room's bounding box.

    Points closer than ``margin`` to any surface are dropped. Output order is
    lexicographic in (x, y, z) lattice index, so it does not depend on how the
    floor polygon's vertices are listed.
    """
    if not (spacing > 0):
        raise ValidationError("spacing must be positive", "positions.spacing")
    if margin < 0:
        raise ValidationError("margin must be non-negative", "positions.margin")
    lo, hi = room.bbox
    axes = []
    for a in range(3):
        usable = (hi[a] - lo[a]) - 2.0 * margin
        if usable < 0:
            raise EmptyGrid(f"margin {margin} leaves no room along axis {a}")
        n = int(np.floor(usable / spacing + 1e-9)) + 1
        center = 0.5 * (lo[a] + hi[a])
        axes.append(center + (np.arange(n) - (n - 1) / 2.0) * spacing)
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
    pts = pts[room.contains(pts, margin)]
    if len(pts) == 0:
        raise EmptyGrid("no lattice point survives the margin")
    return pts


def generate_train_dev_cloud(
    room, n_total, ratios=(0.8, 0.2), margin=0.5, seed=0, grid=None, spacing=None, max_batches=1000
):
    """Uniform random train/dev points inside the shrunk room.

    Points within ``spacing / 4`` of a ``grid`` node are redrawn so the cloud
    falls in between the test lattice. Returns ``(train, dev)``.
    """
    r = np.asarray(ratios, dtype=float)
    if r.shape != (2,) or np.any(r < 0) or r.sum() <= 0:
        raise ValidationError("ratios must be two non-negative fractions", "positions.ratios")
    if n_total < 0:
        raise ValidationError("n_total must be non-negative", "positions.n_cloud")
    rng = np.random.default_rng(seed)
    lo, hi = room.bbox
    min_dist = None
    if grid is not None and len(grid) and spacing:
        min_dist = spacing / 4.0
        grid = np.asarray(grid, float)
    accepted = []
    count = 0
    batch = max(64, 2 * n_total)
    for _ in range(max_batches):
        if count >= n_total:
            break
        cand = rng.uniform(lo, hi, size=(batch, 3))
        cand = cand[room.contains(cand, margin)]
        if min_dist is not None and len(cand):
            d = np.min(np.linalg.norm(cand[:, None, :] - grid[None, :, :], axis=2), axis=1)
            cand = cand[d >= min_dist]
        accepted.append(cand)
        count += len(cand)
    if count < n_total:
        raise SamplingExhausted(f"only {count} of {n_total} cloud points found")
    pts = np.vstack(accepted)[:n_total] if accepted else np.empty((0, 3))
    n_train = int(round(n_total * r[0] / r.sum()))
    return pts[:n_train], pts[n_train:]


def generate_positions(room, spacing, n_cloud=0, ratios=(0.8, 0.2), margin=0.5, seed=0):
    grid = generate_test_grid(room, spacing, margin)
    train, dev = generate_train_dev_cloud(room, n_cloud, ratios, margin, seed, grid, spacing)
    return PositionSet(grid, train, dev)
