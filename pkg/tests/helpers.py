"""Shared oracles and random inputs for the test suite."""
import numpy as np

from aggspec.geometry import AggregateGeometry


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def random_geometry(rng, n, min_distance=0.7):
    while True:
        pos = rng.uniform(-2, 2, size=(n, 3))
        d = np.linalg.norm(pos[:, None] - pos[None], axis=-1) + np.eye(n) * 10
        if d.min() > min_distance:
            break
    dip = rng.normal(size=(n, 3))
    dip /= np.linalg.norm(dip, axis=1)[:, None]
    return AggregateGeometry(pos, dip, "chain")


def charpoly_roots(m):
    """Eigenvalues via Faddeev-LeVerrier coefficients and polynomial roots."""
    n = m.shape[0]
    coeffs = [1.0]
    mk = np.zeros_like(m)
    eye = np.eye(n)
    for k in range(1, n + 1):
        mk = m @ mk + coeffs[-1] * eye
        coeffs.append(-np.trace(m @ mk) / k)
    return np.sort(np.roots(coeffs).real)
