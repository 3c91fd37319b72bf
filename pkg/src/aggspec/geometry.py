"""Aggregate geometries: straight and bent chains, rings and ellipses.

Lengths are in units of the undistorted nearest-neighbour spacing and every
transition dipole is a unit vector; the dipole magnitude is carried globally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import brentq
from scipy.special import ellipe, ellipeinc

from .errors import (
    InvalidAngleError,
    InvalidDipoleError,
    InvalidFlatteningError,
    InvalidGeometryError,
)

KINDS = ("chain", "bent_chain", "ring", "ellipse")
CYCLIC_KINDS = ("ring", "ellipse")

_Z = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class MonomerSite:
    position: np.ndarray
    dipole: np.ndarray


@dataclass(frozen=True, eq=False)
class AggregateGeometry:
    """Ordered monomer positions and unit transition dipoles.

    Arrays are stored read-only; ``params`` records how the geometry was
    built so that the undistorted reference geometry can be reconstructed.
    """

    positions: np.ndarray
    dipoles: np.ndarray
    kind: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        dip = np.array(self.dipoles, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or dip.shape != pos.shape:
            raise InvalidGeometryError("positions and dipoles must both have shape (N, 3)")
        if pos.shape[0] < 2:
            raise InvalidGeometryError(f"an aggregate needs N >= 2 sites, got {pos.shape[0]}")
        if self.kind not in KINDS:
            raise InvalidGeometryError(f"unknown geometry kind {self.kind!r}")
        norms = np.linalg.norm(dip, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise InvalidDipoleError("site dipoles must be unit vectors")
        pos.setflags(write=False)
        dip.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "dipoles", dip)
        object.__setattr__(self, "params", dict(self.params))

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def cyclic(self) -> bool:
        return self.kind in CYCLIC_KINDS

    @property
    def sites(self) -> tuple[MonomerSite, ...]:
        return tuple(MonomerSite(p, d) for p, d in zip(self.positions, self.dipoles))

    def undistorted(self) -> "AggregateGeometry":
        """Geometry with the bend removed (Φ=0) or the ellipse restored to a ring (f=0)."""
        p = self.params
        if self.kind == "bent_chain" and p["angle_deg"] != 0.0:
            return build_bent_chain(p["n"], p["vertex"], 0.0, p["dipole"], frame=p["frame"])
        if self.kind == "ellipse" and p["flattening"] != 0.0:
            return build_ring(p["n"], p["tangent_angle_deg"], p["polar_angle_deg"])
        return self

    def transformed(self, rotation, translation=(0.0, 0.0, 0.0)) -> "AggregateGeometry":
        """Apply a rigid motion ``x -> R x + t`` to positions and dipoles."""
        rot = np.asarray(rotation, dtype=float)
        pos = self.positions @ rot.T + np.asarray(translation, dtype=float)
        dip = self.dipoles @ rot.T
        dip /= np.linalg.norm(dip, axis=1)[:, None]
        return AggregateGeometry(pos, dip, self.kind, self.params)

    def min_distance(self) -> float:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        dist[np.diag_indices(self.n)] = np.inf
        return float(dist.min())


def _unit(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=float).reshape(3)
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm == 0.0:
        raise InvalidDipoleError(f"dipole direction must be a non-zero 3-vector, got {vec!r}")
    return v / norm


def _rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def build_chain(n: int, dipole_dir=(0.0, 0.0, 1.0)) -> AggregateGeometry:
    """Straight chain along x with sites at ``(n-1, 0, 0)`` and identical dipoles."""
    if n < 2:
        raise InvalidGeometryError(f"chain needs N >= 2, got {n}")
    mu = _unit(dipole_dir)
    pos = np.zeros((n, 3))
    pos[:, 0] = np.arange(n)
    return AggregateGeometry(
        pos, np.tile(mu, (n, 1)), "chain", {"n": n, "dipole": tuple(mu.tolist())}
    )


def build_bent_chain(
    n: int,
    vertex: int,
    angle_deg: float,
    dipole_dir=(0.0, 0.0, 1.0),
    frame: str = "global",
) -> AggregateGeometry:
    """V-shaped chain in the (x, y) plane bent by ``angle_deg`` at site ``vertex``.

    Sites ``1..vertex`` lie on the x axis; sites ``vertex..n`` follow a second
    ray rotated by Φ about z through the vertex site. Φ = 0 is the straight
    chain. With ``frame="global"`` every site gets the same dipole; with
    ``frame="local"`` the dipole is given in the frame of the first segment and
    co-rotates with the second segment (the vertex site takes the bisector,
    i.e. a rotation by Φ/2).
    """
    if n < 3:
        raise InvalidGeometryError(f"bent chain needs N >= 3, got {n}")
    if not 2 <= vertex <= n - 1:
        raise InvalidGeometryError(f"vertex must lie in [2, N-1] = [2, {n - 1}], got {vertex}")
    if not 0.0 <= angle_deg < 180.0:
        raise InvalidAngleError(f"bend angle must satisfy 0 <= Φ < 180°, got {angle_deg}")
    if frame not in ("global", "local"):
        raise InvalidGeometryError(f"dipole frame must be 'global' or 'local', got {frame!r}")
    mu = _unit(dipole_dir)
    phi = np.radians(angle_deg)
    direction = np.array([np.cos(phi), np.sin(phi), 0.0])

    idx = np.arange(1, n + 1)
    pos = np.zeros((n, 3))
    pos[:vertex, 0] = idx[:vertex] - 1
    corner = pos[vertex - 1].copy()
    pos[vertex:] = corner + (idx[vertex:] - vertex)[:, None] * direction

    dip = np.tile(mu, (n, 1))
    if frame == "local" and angle_deg != 0.0:
        dip[vertex:] = _rot_z(phi) @ mu
        dip[vertex - 1] = _rot_z(phi / 2) @ mu
    dip /= np.linalg.norm(dip, axis=1)[:, None]
    params = {
        "n": n,
        "vertex": vertex,
        "angle_deg": float(angle_deg),
        "dipole": tuple(mu.tolist()),
        "frame": frame,
    }
    return AggregateGeometry(pos, dip, "bent_chain", params)


def _ring_dipoles(tangent, normal, tangent_angle_deg, polar_angle_deg):
    phi = np.radians(tangent_angle_deg)
    theta = np.radians(polar_angle_deg)
    in_plane = np.cos(phi) * tangent + np.sin(phi) * normal
    dip = np.sin(theta) * in_plane + np.cos(theta) * _Z
    return dip / np.linalg.norm(dip, axis=1)[:, None]


def ring_radius(n: int) -> float:
    """Radius for which consecutive sites of an N-ring are a unit chord apart."""
    return 1.0 / (2.0 * np.sin(np.pi / n))


def build_ring(n: int, tangent_angle_deg: float = 0.0, polar_angle_deg: float = 90.0) -> AggregateGeometry:
    """Ring of N sites in the (x, y) plane with unit nearest-neighbour chord.

    The in-plane part of each dipole makes angle φ with the local tangent
    (φ = 0 tangential, φ = 90 radial); θ is the polar angle from the ring
    normal, so θ = 90 keeps the dipoles in the plane.
    """
    if n < 3:
        raise InvalidGeometryError(f"ring needs N >= 3, got {n}")
    radius = ring_radius(n)
    alpha = 2.0 * np.pi * np.arange(n) / n
    radial = np.column_stack([np.cos(alpha), np.sin(alpha), np.zeros(n)])
    tangent = np.column_stack([-np.sin(alpha), np.cos(alpha), np.zeros(n)])
    dip = _ring_dipoles(tangent, radial, tangent_angle_deg, polar_angle_deg)
    params = {
        "n": n,
        "tangent_angle_deg": float(tangent_angle_deg),
        "polar_angle_deg": float(polar_angle_deg),
        "radius": radius,
    }
    return AggregateGeometry(radius * radial, dip, "ring", params)


def ellipse_arc_length(a: float, b: float, t) -> np.ndarray:
    """Arc length from ``(a, 0)`` to the point at parameter t on ``(a cos t, b sin t)``."""
    m = 1.0 - (b / a) ** 2
    return a * (ellipe(m) - ellipeinc(np.pi / 2 - np.asarray(t, dtype=float), m))


def ellipse_semi_axes(n: int, flattening: float, convention: str = "perimeter") -> tuple[float, float]:
    """Semi-axes (a, b) with b/a = 1 - f.

    ``perimeter`` keeps the circumference of the f = 0 ring; ``major_axis``
    keeps a equal to the ring radius so the circumference shrinks on flattening.
    """
    radius = ring_radius(n)
    ratio = 1.0 - flattening
    if convention == "perimeter":
        a = 2.0 * np.pi * radius / (4.0 * ellipe(1.0 - ratio**2))
    elif convention == "major_axis":
        a = radius
    else:
        raise InvalidGeometryError(f"unknown ellipse convention {convention!r}")
    return float(a), float(a * ratio)


def build_ellipse(
    n: int,
    flattening: float,
    tangent_angle_deg: float = 0.0,
    polar_angle_deg: float = 90.0,
    convention: str = "perimeter",
) -> AggregateGeometry:
    """Ellipse of N sites spaced at equal arc length, major axis along x.

    Site 1 sits at ``(a, 0, 0)``. Dipole angles follow :func:`build_ring`, with
    the tangent and outward normal of the ellipse in place of the circle's.
    """
    if n < 3:
        raise InvalidGeometryError(f"ellipse needs N >= 3, got {n}")
    if not 0.0 <= flattening < 1.0:
        raise InvalidFlatteningError(f"flattening must satisfy 0 <= f < 1, got {flattening}")
    a, b = ellipse_semi_axes(n, flattening, convention)
    perimeter = float(ellipse_arc_length(a, b, 2.0 * np.pi))
    step = perimeter / n
    t = np.zeros(n)
    for k in range(1, n):
        target = k * step
        t[k] = brentq(
            lambda x: ellipse_arc_length(a, b, x) - target,
            0.0,
            2.0 * np.pi,
            xtol=1e-15,
            rtol=4 * np.finfo(float).eps,
        )
    ct, st = np.cos(t), np.sin(t)
    pos = np.column_stack([a * ct, b * st, np.zeros(n)])
    tangent = np.column_stack([-a * st, b * ct, np.zeros(n)])
    tangent /= np.linalg.norm(tangent, axis=1)[:, None]
    normal = np.column_stack([b * ct, a * st, np.zeros(n)])
    normal /= np.linalg.norm(normal, axis=1)[:, None]
    dip = _ring_dipoles(tangent, normal, tangent_angle_deg, polar_angle_deg)
    params = {
        "n": n,
        "flattening": float(flattening),
        "tangent_angle_deg": float(tangent_angle_deg),
        "polar_angle_deg": float(polar_angle_deg),
        "convention": convention,
        "semi_axes": (a, b),
        "arc_parameters": tuple(t.tolist()),
    }
    return AggregateGeometry(pos, dip, "ellipse", params)


def format_geometry_table(geom: AggregateGeometry) -> str:
    """Site table ``n x y z mx my mz`` with a comment header naming kind and params."""
    lines = [f"# kind: {geom.kind}"]
    for key in sorted(geom.params):
        if key == "arc_parameters":
            continue
        lines.append(f"# {key}: {geom.params[key]}")
    lines.append("# n\tx\ty\tz\tmx\tmy\tmz")
    for i, (p, d) in enumerate(zip(geom.positions, geom.dipoles), start=1):
        cols = "\t".join(f"{v:.10e}" for v in (*p, *d))
        lines.append(f"{i}\t{cols}")
    return "\n".join(lines) + "\n"
