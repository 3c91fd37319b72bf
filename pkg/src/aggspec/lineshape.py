"""Monomer Green functions ⟨g(E)⟩ on uniform energy grids (energies in cm⁻¹).

The absorption profile is ``-Im g``; spectral weights are reported as
``(1/π) ∫ -Im g dE`` so that a properly normalized Green function has weight 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline
from scipy.signal import fftconvolve

from .errors import (
    GridError,
    GridTooNarrowError,
    InvalidBroadeningError,
    LineshapeTableError,
    SupportBoundaryError,
)

HERGLOTZ_TOL = 0.05
NORMALIZATION_TOL = 0.01
BOUNDARY_FRACTION = 1e-3


@dataclass(frozen=True)
class EnergyGrid:
    e_min: float
    e_max: float
    n_points: int = 8192

    def __post_init__(self):
        if not self.e_min < self.e_max:
            raise GridError(f"grid needs e_min < e_max, got {self.e_min} >= {self.e_max}")
        if self.n_points < 64:
            raise GridError(f"grid needs at least 64 points, got {self.n_points}")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.e_min, self.e_max, self.n_points)

    @property
    def spacing(self) -> float:
        return (self.e_max - self.e_min) / (self.n_points - 1)


@dataclass(frozen=True)
class LineshapeModel:
    """Franck-Condon progression of broadened peaks at e00 + m·vib_spacing.

    Defaults approximate a pinacyanol-like monomer band spanning roughly
    17000-20000 cm⁻¹; they are not fitted to any measured spectrum.
    """

    e00: float = 17500.0
    vib_spacing: float = 1200.0
    huang_rhys: float = 0.9
    n_peaks: int = 4
    width: float = 350.0
    broadening: str = "lorentzian"

    def __post_init__(self):
        if self.e00 <= 0 or self.vib_spacing <= 0 or self.width <= 0:
            raise InvalidBroadeningError("e00, vib_spacing and width must be positive")
        if self.huang_rhys < 0:
            raise InvalidBroadeningError("Huang-Rhys factor must be non-negative")
        if self.n_peaks < 1:
            raise InvalidBroadeningError("need at least one peak")
        if self.broadening not in ("lorentzian", "gaussian"):
            raise InvalidBroadeningError(f"unknown broadening {self.broadening!r}")

    def weights(self) -> np.ndarray:
        m = np.arange(self.n_peaks)
        w = np.array([self.huang_rhys**k / math.factorial(k) for k in m]) * np.exp(-self.huang_rhys)
        return w / w.sum()

    def peak_energies(self) -> np.ndarray:
        return self.e00 + self.vib_spacing * np.arange(self.n_peaks)

    def required_span(self) -> tuple[float, float]:
        return (
            self.e00 - 10.0 * self.width,
            self.e00 + self.n_peaks * self.vib_spacing + 10.0 * self.width,
        )


@dataclass(frozen=True)
class LorentzianSum:
    """Closed-form Green function Σ_m w_m / (E - c_m + i γ_m)."""

    centers: tuple
    weights: tuple
    widths: tuple

    def __call__(self, energies) -> np.ndarray:
        e = np.asarray(energies, dtype=float)[..., None]
        c, w, g = (np.asarray(x, dtype=float) for x in (self.centers, self.weights, self.widths))
        return np.sum(w / (e - c + 1j * g), axis=-1)

    def weight_between(self, lo: float, hi: float) -> float:
        c, w, g = (np.asarray(x, dtype=float) for x in (self.centers, self.weights, self.widths))
        return float(np.sum(w * (np.arctan((hi - c) / g) - np.arctan((lo - c) / g))) / np.pi)


def tail_corrected_integral(energies, absorption, center: float) -> float:
    """Trapezoid integral plus the 1/E² tails continued beyond both ends."""
    e = np.asarray(energies, dtype=float)
    a = np.asarray(absorption, dtype=float)
    body = float(trapezoid(a, e))
    left = a[0] * abs(e[0] - center) if e[0] < center else 0.0
    right = a[-1] * abs(e[-1] - center) if e[-1] > center else 0.0
    return body + left + right


@dataclass(frozen=True, eq=False)
class MonomerGreen:
    """Complex ⟨g(E)⟩ sampled on ``grid``.

    ``exact`` is an optional closed form used for off-grid evaluation; without
    it, off-grid values come from a cubic spline of the samples.
    """

    grid: EnergyGrid
    values: np.ndarray
    exact: LorentzianSum | None = None
    _spline: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.grid.n_points,):
            raise GridError("Green-function samples must match the grid")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def energies(self) -> np.ndarray:
        return self.grid.values

    @property
    def absorption(self) -> np.ndarray:
        return -self.values.imag

    def centroid(self) -> float:
        if self.exact is not None:
            return float(np.dot(self.exact.centers, self.exact.weights) / np.sum(self.exact.weights))
        e, a = self.energies, self.absorption
        return float(trapezoid(a * e, e) / trapezoid(a, e))

    def weight(self) -> float:
        """Spectral weight (1/π)∫ -Im g dE, including the tails beyond the grid."""
        if self.exact is not None:
            return float(np.sum(self.exact.weights))
        return tail_corrected_integral(self.energies, self.absorption, self.centroid()) / np.pi

    def grid_weight(self) -> float:
        """Spectral weight contained inside the grid only."""
        if self.exact is not None:
            return self.exact.weight_between(self.grid.e_min, self.grid.e_max)
        return float(trapezoid(self.absorption, self.energies)) / np.pi

    def tail_deviation(self) -> tuple[float, float]:
        """|(E - ē) g(E) - 1| at both grid ends, ē the spectral centroid."""
        center = self.centroid()
        e, g = self.energies, self.values
        return (
            float(abs((e[0] - center) * g[0] - 1.0)),
            float(abs((e[-1] - center) * g[-1] - 1.0)),
        )

    def check(self) -> None:
        """Raise if positivity, normalization or the asymptotic tails fail."""
        a = self.absorption
        if np.min(a) < -1e-12 * max(np.max(np.abs(a)), 1.0):
            raise GridError("spectral positivity violated: -Im g < 0 somewhere")
        w = self.grid_weight()
        tails = self.tail_deviation()
        if max(tails) >= HERGLOTZ_TOL:
            raise GridTooNarrowError(
                f"grid [{self.grid.e_min:g}, {self.grid.e_max:g}] does not reach the asymptotic "
                f"1/E regime (|E g - 1| = {tails[0]:.3g}, {tails[1]:.3g} at the ends)"
            )
        if abs(self.weight() - 1.0) >= NORMALIZATION_TOL:
            raise GridError(f"spectral weight {self.weight():.4f} is not 1 within 1%")
        if self.exact is None and abs(w - 1.0) >= 0.5:
            raise GridTooNarrowError(f"grid holds only {w:.3f} of the spectral weight")

    def evaluate(self, energies) -> np.ndarray:
        e = np.asarray(energies, dtype=float)
        if self.exact is not None:
            return self.exact(e)
        lo, hi = self.grid.e_min, self.grid.e_max
        if np.any((e < lo) | (e > hi)):
            raise GridTooNarrowError("requested energies lie outside the Green-function grid")
        if self._spline is None:
            x = self.energies
            object.__setattr__(
                self, "_spline", (CubicSpline(x, self.values.real), CubicSpline(x, self.values.imag))
            )
        re, im = self._spline
        return re(e) + 1j * np.minimum(im(e), 0.0)


def _pv_kernel(n: int) -> np.ndarray:
    """Principal-value weights ∫ hat(x) / (m - x) dx for m = -(n-1) … n-1."""
    m = np.arange(-(n - 1), n, dtype=float)

    def xlogx(x):
        ax = np.abs(x)
        out = np.zeros_like(x)
        nz = ax > 0
        out[nz] = x[nz] * np.log(ax[nz])
        return out

    return xlogx(m + 1) - 2.0 * xlogx(m) + xlogx(m - 1)


def kramers_kronig(absorption, energies) -> np.ndarray:
    """Real part of g from the absorption profile ``-Im g`` on a uniform grid.

    Re g(E) = (1/π) P∫ (-Im g(E')) / (E - E') dE', with the profile taken as
    piecewise linear so that each sample's principal-value integral is exact.
    Residual 1/E² tails at the grid ends are continued analytically over a
    padding of twice the grid length on each side.
    """
    rho = np.asarray(absorption, dtype=float)
    e = np.asarray(energies, dtype=float)
    n = rho.size
    if e.shape != rho.shape or n < 3:
        raise GridError("absorption and energies must be matching 1-D arrays")
    h = (e[-1] - e[0]) / (n - 1)
    if np.max(np.abs(np.diff(e) - h)) > 1e-9 * max(abs(h), 1.0) * n:
        raise GridError("Kramers-Kronig transform needs a uniform grid")
    if np.any(rho < -1e-12 * max(rho.max(), 1.0)):
        raise GridError("absorption must be non-negative")
    peak = rho.max()
    if peak <= 0:
        return np.zeros(n)
    if rho[0] > BOUNDARY_FRACTION * peak or rho[-1] > BOUNDARY_FRACTION * peak:
        raise SupportBoundaryError("absorption does not decay inside the grid; widen the grid")

    center = float(trapezoid(rho * e, e) / trapezoid(rho, e))
    pad = 2 * n
    left_e = e[0] - h * np.arange(pad, 0, -1)
    right_e = e[-1] + h * np.arange(1, pad + 1)
    left = rho[0] * ((e[0] - center) / (left_e - center)) ** 2
    right = rho[-1] * ((e[-1] - center) / (right_e - center)) ** 2
    full = np.concatenate([left, rho, right])
    m = full.size
    conv = fftconvolve(full, _pv_kernel(m), mode="full")
    # output index i (in the padded frame) pairs with kernel offset i - j
    re_full = conv[m - 1 : 2 * m - 1] / np.pi
    return re_full[pad : pad + n]


def electronic_green(epsilon: float, delta: float, grid: EnergyGrid, check: bool = True) -> MonomerGreen:
    """One-level Green function 1 / (E - ε + iδ)."""
    if not delta > 0:
        raise InvalidBroadeningError(f"broadening δ must be positive, got {delta}")
    exact = LorentzianSum((float(epsilon),), (1.0,), (float(delta),))
    g = MonomerGreen(grid, exact(grid.values), exact)
    if check:
        g.check()
    return g


def vibronic_green(model: LineshapeModel, grid: EnergyGrid, check: bool = True) -> MonomerGreen:
    """Broadened Franck-Condon progression.

    Lorentzian peaks are summed in closed form. Gaussian peaks (``width`` is the
    half width at half maximum) give the absorption directly, normalized to
    weight π, and the real part comes from :func:`kramers_kronig`.
    """
    lo, hi = model.required_span()
    if grid.e_min > lo or grid.e_max < hi:
        raise GridTooNarrowError(
            f"grid [{grid.e_min:g}, {grid.e_max:g}] must cover at least [{lo:g}, {hi:g}]"
        )
    weights = model.weights()
    centers = model.peak_energies()
    e = grid.values
    if model.broadening == "lorentzian":
        exact = LorentzianSum(
            tuple(centers.tolist()), tuple(weights.tolist()), (model.width,) * model.n_peaks
        )
        g = MonomerGreen(grid, exact(e), exact)
    else:
        sigma = model.width / math.sqrt(2.0 * math.log(2.0))
        profile = np.exp(-0.5 * ((e[:, None] - centers) / sigma) ** 2) / (sigma * math.sqrt(2 * np.pi))
        absorption = np.pi * profile @ weights
        g = MonomerGreen(grid, kramers_kronig(absorption, e) - 1j * absorption)
    if check:
        g.check()
    return g


def resample_absorption(table, grid: EnergyGrid) -> np.ndarray:
    """Validate a (energy, absorption) table and linearly interpolate it onto the grid."""
    tab = np.asarray(table, dtype=float)
    if tab.ndim != 2 or tab.shape[1] != 2 or tab.shape[0] < 2:
        raise LineshapeTableError("lineshape table needs two columns and at least two rows")
    energy, absorption = tab[:, 0], tab[:, 1]
    if np.any(np.diff(energy) <= 0):
        raise LineshapeTableError("table energies must be strictly increasing")
    if np.any(absorption < 0):
        raise LineshapeTableError("table absorption values must be non-negative")
    if not np.any(absorption > 0):
        raise LineshapeTableError("table absorption is identically zero")
    return np.interp(grid.values, energy, absorption, left=0.0, right=0.0)


def load_tabulated_lineshape(table, grid: EnergyGrid, check: bool = True) -> MonomerGreen:
    """Green function from a measured absorption profile.

    The profile is resampled onto ``grid``, scaled to unit spectral weight and
    completed with its Kramers-Kronig real part.
    """
    absorption = resample_absorption(table, grid)
    e = grid.values
    total = tail_corrected_integral(e, absorption, float(trapezoid(absorption * e, e) / trapezoid(absorption, e)))
    if total <= 0:
        raise LineshapeTableError("table has no absorption inside the grid")
    absorption = absorption * (np.pi / total)
    g = MonomerGreen(grid, kramers_kronig(absorption, e) - 1j * absorption)
    if check:
        g.check()
    return g


def read_lineshape_table(path) -> np.ndarray:
    """Read two-column ``energy_cm1, absorption`` text; ``#`` starts a comment."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").replace(";", " ").split()
        if len(parts) != 2:
            raise LineshapeTableError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise LineshapeTableError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise LineshapeTableError(f"{path}: no data rows")
    return np.array(rows)
