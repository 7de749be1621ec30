"""Pure numpy versions of the compiled kernels."""
import numpy as np


def read_norm_batch(X, V, r):
    """sup-norm plus weighted l1 norm of V x, for every row x of X."""
    X = np.asarray(X, dtype=float)
    return np.abs(X).max(axis=1, initial=0.0) + np.abs(X @ np.asarray(V).T) @ np.asarray(r)


def covering_radius(mesh, dirs):
    """Largest l1 distance from a mesh point to its nearest direction."""
    mesh = np.asarray(mesh, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    worst = 0.0
    for chunk in np.array_split(mesh, max(1, len(mesh) // 256)):
        d = np.abs(chunk[:, None, :] - dirs[None, :, :]).sum(axis=2)
        worst = max(worst, float(d.min(axis=1).max(initial=0.0)))
    return worst


def l1_distances(dirs, center):
    return np.abs(np.asarray(dirs, dtype=float) - np.asarray(center, dtype=float)).sum(axis=1)
