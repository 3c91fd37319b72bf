"""Dipole-dipole couplings, exciton states and their optical properties."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidDipoleError,
    SingularGeometryError,
    SolverError,
    UnsupportedParityError,
    ZeroReferenceCouplingError,
)
from .geometry import AggregateGeometry

ENERGY_UNITS = ("dipole", "reference")


@dataclass(frozen=True)
class Polarization:
    """Light polarization: a fixed unit vector or the isotropic average over x, y, z."""

    kind: str = "isotropic"
    vector: tuple[float, float, float] | None = None

    def __post_init__(self):
        if self.kind == "isotropic":
            object.__setattr__(self, "vector", None)
        elif self.kind == "fixed":
            v = np.asarray(self.vector, dtype=float).reshape(3)
            norm = np.linalg.norm(v)
            if norm == 0.0 or not np.isfinite(norm):
                raise InvalidDipoleError("polarization vector must be non-zero")
            object.__setattr__(self, "vector", tuple((v / norm).tolist()))
        else:
            raise ValueError(f"unknown polarization kind {self.kind!r}")

    @classmethod
    def fixed(cls, vector) -> "Polarization":
        return cls("fixed", tuple(np.asarray(vector, dtype=float).tolist()))

    @classmethod
    def isotropic(cls) -> "Polarization":
        return cls("isotropic")

    @classmethod
    def parse(cls, text: str) -> "Polarization":
        text = text.strip()
        if text.lower() == "isotropic":
            return cls.isotropic()
        return cls.fixed([float(x) for x in text.replace(",", " ").split()])

    def weights(self, vectors) -> np.ndarray:
        """|e·v|² for each row of ``vectors`` (averaged over axes when isotropic)."""
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        if self.kind == "fixed":
            return (v @ np.asarray(self.vector)) ** 2
        return np.sum(v**2, axis=1) / 3.0

    def __str__(self):
        if self.kind == "isotropic":
            return "isotropic"
        return " ".join(f"{x:g}" for x in self.vector)


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Symmetric dipole-dipole coupling matrix in units of μ²/a³.

    ``reference_coupling`` is V₁₂ of the undistorted geometry with the same
    dipoles; ``energy_unit`` is the (positive) coupling that maps to 1 on the
    dimensionless stick-energy axis.
    """

    values: np.ndarray
    dipoles: np.ndarray
    reference_coupling: float
    energy_unit: float = 1.0
    nearest_neighbour_only: bool = False

    @property
    def n(self) -> int:
        return self.values.shape[0]


def pair_coupling(r1, mu1, r2, mu2) -> float:
    """Point-dipole coupling between two unit dipoles."""
    x = np.asarray(r2, dtype=float) - np.asarray(r1, dtype=float)
    dist = np.linalg.norm(x)
    if dist <= 1e-9:
        raise SingularGeometryError("coincident monomer positions")
    xh = x / dist
    return float((np.dot(mu1, mu2) - 3.0 * np.dot(mu1, xh) * np.dot(mu2, xh)) / dist**3)


def _neighbour_mask(n: int, cyclic: bool) -> np.ndarray:
    idx = np.arange(n)
    sep = np.abs(idx[:, None] - idx[None, :])
    mask = sep == 1
    if cyclic and n > 2:
        mask |= sep == n - 1
    return mask


def coupling_matrix(
    geom: AggregateGeometry,
    nearest_neighbour_only: bool = False,
    energy_unit: str = "dipole",
) -> CouplingMatrix:
    """All-pairs dipole-dipole coupling matrix of ``geom``.

    ``energy_unit="dipole"`` measures stick energies in μ²/a³, which equals the
    nearest-neighbour coupling of the straight chain with dipoles normal to the
    chain axis. ``energy_unit="reference"`` uses ``|reference_coupling|``.
    The nearest-neighbour-only mode exists for comparison with closed forms.
    """
    if energy_unit not in ENERGY_UNITS:
        raise ValueError(f"energy_unit must be one of {ENERGY_UNITS}, got {energy_unit!r}")
    pos, mu = geom.positions, geom.dipoles
    x = pos[None, :, :] - pos[:, None, :]
    dist = np.linalg.norm(x, axis=-1)
    off = ~np.eye(geom.n, dtype=bool)
    if np.any(dist[off] <= 1e-9):
        raise SingularGeometryError("coincident monomer positions")
    dist[~off] = 1.0
    xh = x / dist[..., None]
    dots = mu @ mu.T
    proj = np.einsum("mj,nmj->nm", mu, xh)  # mu_m . xh_nm
    proj_n = np.einsum("nj,nmj->nm", mu, xh)  # mu_n . xh_nm
    values = (dots - 3.0 * proj_n * proj) / dist**3
    values[~off] = 0.0
    if nearest_neighbour_only:
        values = np.where(_neighbour_mask(geom.n, geom.cyclic), values, 0.0)
    values = 0.5 * (values + values.T)

    ref = geom.undistorted()
    v_ref = pair_coupling(ref.positions[0], ref.dipoles[0], ref.positions[1], ref.dipoles[1])
    if energy_unit == "reference":
        if abs(v_ref) < 1e-12:
            raise ZeroReferenceCouplingError(
                "reference nearest-neighbour coupling vanishes; use energy_unit='dipole'"
            )
        unit = abs(v_ref)
    else:
        unit = 1.0
    values.setflags(write=False)
    return CouplingMatrix(values, geom.dipoles, v_ref, unit, nearest_neighbour_only)


@dataclass(frozen=True, eq=False)
class ExcitonBasis:
    """Eigen-decomposition of a coupling matrix.

    ``eigenvalues`` are the C_k in μ²/a³ (ascending); ``energies`` divides them
    by the energy unit. Column k of ``eigenvectors`` holds a_{nk}.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    collective_dipoles: np.ndarray
    participation_ratios: np.ndarray
    energy_unit: float = 1.0

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def energies(self) -> np.ndarray:
        return self.eigenvalues / self.energy_unit

    def with_eigenvalues(self, eigenvalues) -> "ExcitonBasis":
        """Copy with replaced C_k (used to switch the coupling off while keeping μ_k)."""
        return ExcitonBasis(
            np.asarray(eigenvalues, dtype=float),
            self.eigenvectors,
            self.collective_dipoles,
            self.participation_ratios,
            self.energy_unit,
        )


def participation_ratio(vectors) -> np.ndarray:
    """PR_k = 1 / Σ_n a_{nk}⁴ for each column of ``vectors``."""
    a = np.asarray(vectors, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    return 1.0 / np.sum(a**4, axis=0)


def diagonalize(coupling: CouplingMatrix) -> ExcitonBasis:
    """Full symmetric eigen-decomposition with a deterministic sign convention.

    Each eigenvector is flipped so that its largest-magnitude component (the
    first one, among near-ties) is positive. Within a degenerate cluster the basis is whatever the solver
    returns.
    """
    try:
        evals, evecs = np.linalg.eigh(coupling.values)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigen-solver failed: {exc}") from exc
    mag = np.abs(evecs)
    lead = np.argmax(mag >= mag.max(axis=0) - 1e-10, axis=0)  # first of near-tied maxima
    signs = np.sign(evecs[lead, np.arange(evecs.shape[1])])
    signs[signs == 0] = 1.0
    evecs = evecs * signs
    mu_k = evecs.T @ coupling.dipoles
    for arr in (evals, evecs, mu_k):
        arr.setflags(write=False)
    return ExcitonBasis(evals, evecs, mu_k, participation_ratio(evecs), coupling.energy_unit)


def exciton_couplings(coupling: CouplingMatrix, basis: ExcitonBasis) -> np.ndarray:
    """C_k = Σ_nm V_nm a_nk a_mk evaluated directly from the eigenvectors."""
    a = basis.eigenvectors
    return np.einsum("nk,nm,mk->k", a, coupling.values, a)


def ring_eigenvalues_analytic(first_row, n: int | None = None) -> np.ndarray:
    """Eigenvalues of a symmetric circulant coupling matrix, j = 0 … N-1.

    ``first_row[m]`` is the coupling between site 1 and site 1+m, so
    E_j = 2 Σ_{m=1}^{N/2-1} cos(2πjm/N) V_{1,1+m} + (-1)^j V_{1,1+N/2}.
    """
    row = np.asarray(first_row, dtype=float)
    if n is None:
        n = row.shape[0]
    if row.shape[0] != n:
        raise ValueError(f"first row has {row.shape[0]} entries but N = {n}")
    if n % 2:
        raise UnsupportedParityError(f"closed-form ring eigenvalues need even N, got {n}")
    half = n // 2
    j = np.arange(n)
    m = np.arange(1, half)
    k = 2.0 * np.pi * j / n
    energies = 2.0 * np.cos(np.outer(k, m)) @ row[1:half]
    return energies + (-1.0) ** j * row[half]


def degenerate_clusters(eigenvalues, rel_tol: float = 1e-9) -> list[np.ndarray]:
    """Group ascending eigenvalues into clusters closer than ``rel_tol`` × max|C|."""
    ev = np.asarray(eigenvalues, dtype=float)
    scale = max(float(np.max(np.abs(ev))), 1e-300) if ev.size else 1.0
    clusters, current = [], [0]
    for i in range(1, ev.size):
        if ev[i] - ev[i - 1] < rel_tol * scale:
            current.append(i)
        else:
            clusters.append(np.array(current))
            current = [i]
    if ev.size:
        clusters.append(np.array(current))
    return clusters


@dataclass(frozen=True, eq=False)
class OscillatorStrengths:
    """Per-state strengths |e·μ_k|² plus their degenerate-cluster sums.

    ``per_state`` and ``cluster`` are normalized to unit total unless every
    state is dark, in which case ``zero_strength`` is set and both are zeros.
    ``cluster[k]`` is the summed strength of the cluster containing k.
    """

    raw: np.ndarray
    per_state: np.ndarray
    cluster: np.ndarray
    clusters: list
    total: float
    zero_strength: bool


def oscillator_strengths(basis: ExcitonBasis, pol: Polarization, rel_tol: float = 1e-9) -> OscillatorStrengths:
    raw = pol.weights(basis.collective_dipoles)
    total = float(raw.sum())
    ref = float(pol.weights(np.eye(3)).max()) * basis.n
    zero = total <= 1e-14 * max(ref, 1.0)
    per_state = np.zeros_like(raw) if zero else raw / total
    clusters = degenerate_clusters(basis.eigenvalues, rel_tol)
    cluster = np.empty_like(per_state)
    for idx in clusters:
        cluster[idx] = per_state[idx].sum()
    return OscillatorStrengths(raw, per_state, cluster, clusters, total, bool(zero))


def format_stick_table(basis: ExcitonBasis, strengths: OscillatorStrengths, pol: Polarization) -> str:
    lines = [
        f"# polarization: {pol}",
        f"# energy unit (mu^2/a^3): {basis.energy_unit:.10e}",
        "# strengths normalized to unit sum" if not strengths.zero_strength
        else "# all states dark for this polarization; strengths are zero",
        "# k\tC_k_over_absV\tstrength\tcluster_strength\tPR",
    ]
    for k in range(basis.n):
        lines.append(
            f"{k + 1}\t{basis.energies[k]:.10e}\t{strengths.per_state[k]:.10e}\t"
            f"{strengths.cluster[k]:.10e}\t{basis.participation_ratios[k]:.10e}"
        )
    return "\n".join(lines) + "\n"


def format_wavefunction_table(basis: ExcitonBasis) -> str:
    """One row per state (ascending energy): k, energy, a_1k … a_Nk, a_1k² … a_Nk²."""
    n = basis.n
    head = ["k", "energy"] + [f"a_{i}" for i in range(1, n + 1)] + [f"a2_{i}" for i in range(1, n + 1)]
    lines = ["# exciton wavefunctions, states in ascending energy", "# " + "\t".join(head)]
    a = basis.eigenvectors
    for k in range(n):
        cols = [f"{basis.energies[k]:.10e}"]
        cols += [f"{v:.10e}" for v in a[:, k]]
        cols += [f"{v:.10e}" for v in a[:, k] ** 2]
        lines.append(f"{k + 1}\t" + "\t".join(cols))
    return "\n".join(lines) + "\n"
