"""Periodic grids, Fourier-coefficient potentials and periodic wavefields.

Everything here is an immutable value. Potentials are stored as Fourier
coefficients ``V_n`` of ``V(x) = sum_n V_n exp(2 pi i n x / a)``; fields as
mode amplitudes ``psi_n`` of

    psi(x) = exp(2 pi i p x / a) * sum_n psi_n exp(2 pi i n x / L)

with period ``L`` and a rational Bloch tilt ``p`` measured against the
lattice period ``a``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .errors import GridMismatch, IncommensurateGrid, TruncationInadequate, UnderResolved

TWO_PI = 2.0 * np.pi

#: relative size of the edge coefficient tolerated by quadrature constructors
DECAY_TOL = 1e-12
ROUNDOFF_FLOOR = 1e-15


def _frozen(arr, dtype=complex) -> np.ndarray:
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Grid:
    """Uniform samples ``x_j = j L / points`` on ``[0, L)``."""

    length: float
    points: int = 512

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"grid length must be positive, got {self.length}")
        p = self.points
        if p < 64 or p & (p - 1):
            raise ValueError(f"points must be a power of two >= 64, got {p}")

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.points) * (self.length / self.points)

    @property
    def spacing(self) -> float:
        return self.length / self.points

    @property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return TWO_PI * np.fft.fftfreq(self.points, d=self.spacing)


class Family(str, enum.Enum):
    EXP = "EXP"
    ONE_SS = "ONE_SS"
    TWO_SS = "TWO_SS"
    MATHIEU = "MATHIEU"
    CUSTOM = "CUSTOM"


@dataclass(frozen=True, eq=False)
class ComplexPotential:
    """Period-``a`` potential held as coefficients ``V_n``, ``|n| <= n_max``.

    ``coeffs[n + n_max]`` is ``V_n``.
    """

    period: float
    coeffs: np.ndarray
    form_tag: Family = Family.CUSTOM
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError(f"lattice period must be positive, got {self.period}")
        c = np.asarray(self.coeffs)
        if c.ndim != 1 or len(c) % 2 != 1:
            raise ValueError("coeffs must be a 1-D array of odd length 2*n_max+1")
        object.__setattr__(self, "coeffs", _frozen(c))
        object.__setattr__(self, "params", dict(self.params))

    @property
    def n_max(self) -> int:
        return (len(self.coeffs) - 1) // 2

    @property
    def harmonics(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    @property
    def support(self) -> int:
        """Largest ``|n|`` with a non-zero coefficient (0 for the free particle)."""
        nz = np.nonzero(self.coeffs)[0]
        if len(nz) == 0:
            return 0
        return int(np.max(np.abs(self.harmonics[nz])))

    @property
    def k0(self) -> float:
        """Half the reciprocal lattice vector, ``pi / a``."""
        return np.pi / self.period

    def coeff(self, n: int) -> complex:
        if abs(n) > self.n_max:
            return 0j
        return complex(self.coeffs[n + self.n_max])

    def as_dict(self) -> dict[int, complex]:
        return {int(n): complex(c) for n, c in zip(self.harmonics, self.coeffs) if c != 0}

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        phase = np.exp(1j * TWO_PI * np.multiply.outer(x, self.harmonics) / self.period)
        return phase @ self.coeffs

    def real_part(self) -> "ComplexPotential":
        """The Hermitian potential ``Re V(x)``."""
        c = 0.5 * (self.coeffs + np.conj(self.coeffs[::-1]))
        return ComplexPotential(self.period, c, Family.CUSTOM, {})

    def scaled(self, factor: float) -> "ComplexPotential":
        return ComplexPotential(self.period, factor * self.coeffs, self.form_tag, self.params)

    def is_one_sided(self, tol: float = 0.0) -> bool:
        """True when ``V_n = 0`` for every ``n <= 0`` (up to ``tol * max|V_n|``)."""
        scale = np.max(np.abs(self.coeffs), initial=0.0)
        return bool(np.all(np.abs(self.coeffs[: self.n_max + 1]) <= tol * scale))


# -- closed forms -----------------------------------------------------------

def one_singularity_profile(x, a: float, rho: float):
    """``(2 pi/a)^2 / (1 + cos(2 pi x/a + 2 i rho))``; accepts complex ``x``."""
    return (TWO_PI / a) ** 2 / (1.0 + np.cos(TWO_PI * np.asarray(x) / a + 2j * rho))


def two_singularity_profile(x, a: float, rho: float):
    """Two-singularity crystal (cascade of two Darboux steps)."""
    x = np.asarray(x)
    first = (2 * TWO_PI / a) ** 2 / (1.0 - np.cos(2 * TWO_PI * x / a + 4j * rho))
    return first + 2.0 * one_singularity_profile(x, a, rho)


def from_coefficients(coeffs: Mapping[int, complex], a: float,
                      form_tag: Family = Family.CUSTOM, params=None) -> ComplexPotential:
    """Build a potential from an explicit ``{n: V_n}`` map."""
    n_max = max((abs(int(n)) for n in coeffs), default=0)
    c = np.zeros(2 * n_max + 1, dtype=complex)
    for n, v in coeffs.items():
        c[int(n) + n_max] = v
    return ComplexPotential(a, c, form_tag, params or {})


def from_function(func: Callable, a: float, n_max: int = 48,
                  form_tag: Family = Family.CUSTOM, params=None,
                  quadrature_points: int | None = None, floor: float = 0.0) -> ComplexPotential:
    """Extract ``V_n`` by trapezoidal quadrature of a periodic closed form.

    The rule is spectrally accurate for analytic periodic integrands; the
    result is rejected when ``|V_{+-n_max}|`` exceeds ``DECAY_TOL * max|V_n|``.
    Coefficients below the absolute ``floor`` (cancellation noise of the
    caller) are dropped before the decay check.
    """
    if quadrature_points is None:
        quadrature_points = max(1024, 1 << int(np.ceil(np.log2(8 * (2 * n_max + 1)))))
    x = np.arange(quadrature_points) * (a / quadrature_points)
    samples = np.asarray(func(x), dtype=complex)
    if not np.all(np.isfinite(samples)):
        raise TruncationInadequate("closed form is singular on the real axis")
    spec = np.fft.fft(samples) / quadrature_points
    n = np.arange(-n_max, n_max + 1)
    c = spec[n % quadrature_points]
    c[np.abs(c) <= floor] = 0.0
    scale = np.max(np.abs(c))
    edge = max(abs(c[0]), abs(c[-1]))
    if scale > 0 and edge > DECAY_TOL * scale:
        raise TruncationInadequate(
            f"|V_n| at n_max={n_max} is {edge / scale:.2e} of the peak; increase n_max")
    # round-off floor of the FFT; keeps one-sided spectra exactly one-sided
    c[np.abs(c) < ROUNDOFF_FLOOR * scale] = 0.0
    return ComplexPotential(a, c, form_tag, params or {})


def free_space(a: float = TWO_PI) -> ComplexPotential:
    return ComplexPotential(a, np.zeros(1, dtype=complex), Family.CUSTOM, {})


def exp_potential(v0: complex = 1.0, a: float = TWO_PI) -> ComplexPotential:
    """``V0 exp(2 pi i x / a)``: gapless, singular at every ``E_n``."""
    return from_coefficients({1: v0}, a, Family.EXP, {"V0": v0})


def mathieu(v0: float = 1.0, a: float = TWO_PI) -> ComplexPotential:
    """Hermitian ``V0 sin(2 pi x / a)``."""
    return from_coefficients({1: v0 / 2j, -1: -v0 / 2j}, a, Family.MATHIEU, {"V0": v0})


def one_singularity(a: float = TWO_PI, rho: float = 1.0, n_max: int = 48) -> ComplexPotential:
    if rho == 0:
        raise ValueError("rho must be non-zero; the closed form diverges at rho = 0")
    return from_function(lambda x: one_singularity_profile(x, a, rho), a, n_max,
                         Family.ONE_SS, {"rho": rho})


def two_singularity(a: float = TWO_PI, rho: float = 1.0, n_max: int = 48) -> ComplexPotential:
    if rho == 0:
        raise ValueError("rho must be non-zero; the closed form diverges at rho = 0")
    return from_function(lambda x: two_singularity_profile(x, a, rho), a, n_max,
                         Family.TWO_SS, {"rho": rho})


def make_potential(family: str, a: float = TWO_PI, rho: float | None = None,
                   v0: float | None = None, n_max: int = 48) -> ComplexPotential:
    """Dispatch by family name, as used by scenario files."""
    fam = Family(family)
    if fam is Family.ONE_SS:
        return one_singularity(a, rho, n_max)
    if fam is Family.TWO_SS:
        return two_singularity(a, rho, n_max)
    if fam is Family.EXP:
        return exp_potential(v0, a)
    if fam is Family.MATHIEU:
        return mathieu(v0, a)
    if v0 not in (None, 0):
        raise ValueError("CUSTOM family from a scenario only supports the free particle")
    return free_space(a)


def check_pt_symmetry(pot: ComplexPotential, tol: float = 1e-10) -> bool:
    """PT symmetry about ``x = 0``: ``V(-x) = V*(x)`` iff every ``V_n`` is real."""
    scale = np.max(np.abs(pot.coeffs), initial=0.0)
    return bool(np.max(np.abs(pot.coeffs.imag), initial=0.0) <= tol * scale)


# -- fields -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Wavefield:
    """Mode amplitudes ``psi_n`` for ``n = n_min, ..., n_min + len - 1``."""

    period: float
    amplitudes: np.ndarray
    n_min: int = 0
    tilt: Fraction = Fraction(0)
    lattice_period: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", _frozen(self.amplitudes))
        object.__setattr__(self, "tilt", Fraction(self.tilt))
        if self.lattice_period is None:
            object.__setattr__(self, "lattice_period", float(self.period))

    @classmethod
    def from_modes(cls, modes: Mapping[int, complex], period: float, tilt=0,
                   lattice_period: float | None = None) -> "Wavefield":
        if not modes:
            return cls(period, np.zeros(1), 0, tilt, lattice_period)
        lo, hi = min(modes), max(modes)
        amp = np.zeros(hi - lo + 1, dtype=complex)
        for n, v in modes.items():
            amp[n - lo] = v
        return cls(period, amp, lo, tilt, lattice_period)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_min + len(self.amplitudes))

    @property
    def wavenumbers(self) -> np.ndarray:
        return TWO_PI * self.indices / self.period + TWO_PI * float(self.tilt) / self.lattice_period

    @property
    def power(self) -> float:
        """Mean-square power ``(1/L) int |psi|^2 dx = sum |psi_n|^2``."""
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    @property
    def max_index(self) -> int:
        nz = np.nonzero(self.amplitudes)[0]
        if len(nz) == 0:
            return 0
        return int(np.max(np.abs(self.indices[nz])))

    def mode(self, n: int) -> complex:
        i = n - self.n_min
        if 0 <= i < len(self.amplitudes):
            return complex(self.amplitudes[i])
        return 0j

    def as_dict(self) -> dict[int, complex]:
        return {int(n): complex(v) for n, v in zip(self.indices, self.amplitudes) if v != 0}

    def replace(self, amplitudes, n_min: int | None = None) -> "Wavefield":
        return Wavefield(self.period, amplitudes, self.n_min if n_min is None else n_min,
                         self.tilt, self.lattice_period)

    def trimmed(self, rel_tol: float = 1e-15) -> "Wavefield":
        """Drop amplitudes below ``rel_tol * max|psi_n|`` and shrink the support."""
        mag = np.abs(self.amplitudes)
        keep = np.nonzero(mag > rel_tol * mag.max())[0] if mag.max() > 0 else np.array([0])
        lo, hi = keep[0], keep[-1]
        amp = np.where(mag[lo:hi + 1] > rel_tol * mag.max(), self.amplitudes[lo:hi + 1], 0)
        return self.replace(amp, self.n_min + int(lo))

    def normalized(self) -> "Wavefield":
        p = self.power
        if p == 0:
            raise ValueError("cannot normalize a zero field")
        return self.replace(self.amplitudes / np.sqrt(p))

    def translated(self, dx: float) -> "Wavefield":
        """Coefficients of ``psi(x + dx)`` in the same basis."""
        return self.replace(self.amplitudes * np.exp(1j * self.wavenumbers * dx))

    def window(self, n_lo: int, n_hi: int) -> np.ndarray:
        """Amplitudes for ``n_lo <= n <= n_hi``, zero-padded."""
        out = np.zeros(n_hi - n_lo + 1, dtype=complex)
        lo = max(n_lo, self.n_min)
        hi = min(n_hi, self.n_min + len(self.amplitudes) - 1)
        if lo <= hi:
            out[lo - n_lo:hi - n_lo + 1] = self.amplitudes[lo - self.n_min:hi - self.n_min + 1]
        return out

    def distance2(self, other: "Wavefield") -> float:
        """``(1/L) int |self - other|^2 dx`` over the union of the supports."""
        if self.tilt != other.tilt or not np.isclose(self.period, other.period, rtol=1e-12):
            raise GridMismatch("fields live in different bases")
        lo = min(self.n_min, other.n_min)
        hi = max(self.n_min + len(self.amplitudes), other.n_min + len(other.amplitudes)) - 1
        return float(np.sum(np.abs(self.window(lo, hi) - other.window(lo, hi)) ** 2))


def _carrier(grid: Grid, tilt: Fraction, lattice_period: float) -> np.ndarray:
    if tilt == 0:
        return np.ones(grid.points, dtype=complex)
    return np.exp(1j * TWO_PI * float(tilt) * grid.x / lattice_period)


def to_samples(field: Wavefield, grid: Grid) -> np.ndarray:
    """Evaluate a field on ``grid`` (the grid must span one field period)."""
    if not np.isclose(grid.length, field.period, rtol=1e-12):
        raise GridMismatch(f"grid length {grid.length} != field period {field.period}")
    if field.max_index >= grid.points // 2:
        raise UnderResolved(
            f"mode {field.max_index} needs more than {grid.points} points")
    buf = np.zeros(grid.points, dtype=complex)
    nz = np.nonzero(field.amplitudes)[0]
    buf[field.indices[nz] % grid.points] = field.amplitudes[nz]
    return np.fft.ifft(buf) * grid.points * _carrier(grid, field.tilt, field.lattice_period)


def to_modes(samples, grid: Grid, tilt=0, lattice_period: float | None = None) -> Wavefield:
    """Inverse of :func:`to_samples`; modes cover ``-points/2 <= n < points/2``."""
    tilt = Fraction(tilt)
    a = grid.length if lattice_period is None else lattice_period
    samples = np.asarray(samples, dtype=complex) / _carrier(grid, tilt, a)
    spec = np.fft.fftshift(np.fft.fft(samples) / grid.points)
    return Wavefield(grid.length, spec, -grid.points // 2, tilt, a)


def potential_samples(pot: ComplexPotential, grid: Grid) -> np.ndarray:
    """``V(x_j)``; the grid length must hold a whole number of lattice periods."""
    ratio = grid.length / pot.period
    if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio) or round(ratio) < 1:
        raise IncommensurateGrid(f"L/a = {ratio} is not an integer")
    return pot(grid.x)


def spectral_derivative(samples, length: float, order: int = 1) -> np.ndarray:
    """Fourier derivative of periodic samples on ``[0, length)``."""
    samples = np.asarray(samples, dtype=complex)
    n = len(samples)
    k = TWO_PI * np.fft.fftfreq(n, d=length / n)
    if order % 2 == 1 and n % 2 == 0:
        k[n // 2] = 0.0
    return np.fft.ifft((1j * k) ** order * np.fft.fft(samples))


def mean_square(samples) -> float:
    """Rectangle-rule ``(1/L) int |f|^2 dx``; exact for band-limited periodic ``f``."""
    return float(np.mean(np.abs(np.asarray(samples)) ** 2))
