"""Darboux (SUSY) synthesis of gapless crystals and Jordan chains.

A seed ``phi`` with ``H_in phi = E phi`` factorizes ``H_in = B A + E`` with
``A = -d/dx + W``, ``B = d/dx + W`` and ``W = phi'/phi``. The partner
``H_out = A B + E`` has potential ``-V_in + 2 E + 2 W^2`` and shares the
spectrum of ``H_in`` except at the seed energy, which becomes a spectral
singularity for the complex seeds used here.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
import scipy.linalg as sla

from . import grid as g
from .bands import bloch_matrix, kernel_dimension
from .errors import GridMismatch, NotDefective, SeedNotSolution, SeedVanishes
from .grid import TWO_PI, ComplexPotential, Family, Grid, Wavefield

SEED_RESIDUAL_TOL = 1e-8
VANISH_TOL = 1e-6


@dataclass(frozen=True)
class SeedSolution:
    """Closed-form solution of ``H phi = energy * phi``, periodic with ``period``."""

    func: Callable[[np.ndarray], np.ndarray]
    energy: float
    period: float
    label: str = "custom"

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))


def plane_wave_seed(k: float, period: float | None = None) -> SeedSolution:
    return SeedSolution(lambda x: np.exp(1j * k * x), k * k,
                        TWO_PI / abs(k) if period is None else period, "plane-wave")


def cosine_seed(a: float, rho: float) -> SeedSolution:
    """``cos(k0 x + i rho)`` with ``k0 = pi/a``: first-step seed at ``E1 = k0^2``."""
    k0 = np.pi / a
    return SeedSolution(lambda x: np.cos(k0 * x + 1j * rho), k0 * k0, 2 * a, "phi1")


def second_seed(a: float, rho: float) -> SeedSolution:
    """Image of ``cos(3 k0 x + 3 i rho)`` under the first intertwiner, at ``E3 = 9 k0^2``."""
    k0 = np.pi / a

    def phi2(x):
        t = k0 * x + 1j * rho
        return 3 * k0 * np.sin(3 * t) - k0 * np.tan(t) * np.cos(3 * t)

    return SeedSolution(phi2, 9 * k0 * k0, 2 * a, "phi2")


def first_superpotential(x, a: float, rho: float):
    """``W1 = -k0 tan(k0 x + i rho)``."""
    k0 = np.pi / a
    return -k0 * np.tan(k0 * np.asarray(x) + 1j * rho)


def second_superpotential(x, a: float, rho: float):
    """``W2 = k0 (3 cos^2 t - 2) / (sin t cos t)``, ``t = k0 x + i rho``."""
    k0 = np.pi / a
    t = k0 * np.asarray(x) + 1j * rho
    return k0 * (3 * np.cos(t) ** 2 - 2) / (np.sin(t) * np.cos(t))


@dataclass(frozen=True, eq=False)
class SusyStep:
    seed: SeedSolution
    grid: Grid                      # one lattice period
    superpotential: np.ndarray      # W on grid.x
    superpotential_series: ComplexPotential
    input_potential: ComplexPotential
    output_potential: ComplexPotential
    output_samples: np.ndarray      # -V_in + 2E + 2W^2 on grid.x
    seed_residual: float

    @property
    def seed_energy(self) -> float:
        return self.seed.energy


def _samples_to_series(samples, a: float, n_max: int, reference: float = 0.0) -> ComplexPotential:
    p = len(samples)
    return g.from_function(lambda x: samples, a, n_max, Family.CUSTOM, quadrature_points=p,
                           floor=1e-14 * reference)


def darboux_partner(v_in: ComplexPotential, seed: SeedSolution, points: int = 512,
                    n_max: int = 48) -> SusyStep:
    """One SUSY step ``V_out = -V_in + 2 E + 2 W^2`` with ``W = phi'/phi``.

    ``seed.period`` must be a whole multiple of the lattice period. Derivatives
    of the seed are spectral, on a grid spanning one seed period.
    """
    a = v_in.period
    reps = seed.period / a
    if abs(reps - round(reps)) > 1e-9:
        raise GridMismatch(f"seed period {seed.period} is not a multiple of a={a}")
    reps = int(round(reps))
    long_grid = Grid(seed.period, points * reps)
    phi = np.asarray(seed(long_grid.x), dtype=complex)
    if not np.all(np.isfinite(phi)):
        raise SeedVanishes("seed is singular on the real axis")
    mag = np.abs(phi)
    if mag.min() < VANISH_TOL * mag.max():
        raise SeedVanishes(f"min|phi|/max|phi| = {mag.min() / mag.max():.2e}")
    d1 = g.spectral_derivative(phi, seed.period, 1)
    d2 = g.spectral_derivative(phi, seed.period, 2)
    v_long = g.potential_samples(v_in, long_grid)
    res = -d2 + v_long * phi - seed.energy * phi
    residual = float(np.max(np.abs(res)) / (np.max(mag) * max(1.0, abs(seed.energy))))
    if residual > SEED_RESIDUAL_TOL:
        raise SeedNotSolution(f"seed residual {residual:.2e}")

    cell = Grid(a, points)
    w = (d1 / phi)[:points]
    v_out = -v_long[:points] + 2 * seed.energy + 2 * w * w
    # V_out is a difference of O(E + |W|^2) terms; cancellation noise sits at that scale
    ref = max(abs(seed.energy), float(np.max(np.abs(w)) ** 2), float(np.max(np.abs(v_long))))
    out = _samples_to_series(v_out, a, n_max, ref)
    w_series = _samples_to_series(w, a, n_max, float(np.max(np.abs(w))))
    return SusyStep(seed, cell, w, w_series, v_in, out, v_out, residual)


def _grid_for(field: Wavefield, minimum: int = 512) -> Grid:
    pts = minimum
    while field.max_index >= pts // 4:
        pts *= 2
    return Grid(field.period, pts)


def apply_hamiltonian(field: Wavefield, pot: ComplexPotential, points: int = 512) -> np.ndarray:
    """Samples of ``(-d^2/dx^2 + V) psi`` on a grid over one field period."""
    grid = _grid_for(field, points)
    kin = field.replace(field.amplitudes * field.wavenumbers ** 2)
    return g.to_samples(kin, grid) + g.potential_samples(pot, grid) * g.to_samples(field, grid)


def eigen_residual(field: Wavefield, pot: ComplexPotential, energy: float,
                   points: int = 512) -> float:
    """RMS of ``(H - E) psi`` relative to the RMS of ``psi``."""
    grid = _grid_for(field, points)
    r = apply_hamiltonian(field, pot, points) - energy * g.to_samples(field, grid)
    return float(np.sqrt(g.mean_square(r) / field.power))


def susy_map_state(psi: Wavefield, w: ComplexPotential, points: int = 512) -> Wavefield:
    """``xi = -psi' + W psi``: maps eigenstates of ``H_in`` to those of ``H_out``.

    ``w`` is the superpotential as a lattice-periodic series
    (``SusyStep.superpotential_series``).
    """
    ratio = psi.period / w.period
    if abs(ratio - round(ratio)) > 1e-9 or not np.isclose(psi.lattice_period, w.period):
        raise GridMismatch("field period must be a whole number of lattice periods")
    grid = _grid_for(psi, points)
    dpsi = psi.replace(1j * psi.wavenumbers * psi.amplitudes)
    xi = -g.to_samples(dpsi, grid) + g.potential_samples(w, grid) * g.to_samples(psi, grid)
    return g.to_modes(xi, grid, psi.tilt, psi.lattice_period).trimmed()


def cascade(a: float = TWO_PI, rho: float = 1.0, points: int = 512,
            n_max: int = 48) -> tuple[SusyStep, SusyStep]:
    """Free particle -> one singularity (seed phi1) -> two singularities (seed phi2)."""
    if rho == 0:
        raise SeedVanishes("rho = 0 makes the seeds vanish on the real axis")
    first = darboux_partner(g.free_space(a), cosine_seed(a, rho), points, n_max)
    second = darboux_partner(first.output_potential, second_seed(a, rho), points, n_max)
    return first, second


def synthesize_two_singularities(a: float = TWO_PI, rho: float = 1.0, points: int = 512,
                                 n_max: int = 48) -> ComplexPotential:
    """Gapless crystal with singularities at ``E1`` and ``E3`` only."""
    out = cascade(a, rho, points, n_max)[1].output_potential
    return ComplexPotential(out.period, out.coeffs, Family.TWO_SS, {"rho": rho})


# -- Jordan chains -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JordanChain:
    energy: float
    q: float
    u: Wavefield
    v: Wavefield
    residuals: tuple[float, float]

    @property
    def norm_u(self) -> float:
        return float(np.sqrt(self.u.power))


def _block_field(vec, a: float, q: float, n_trunc: int) -> Wavefield:
    tilt = Fraction(q * a / TWO_PI).limit_denominator(10 ** 6)
    return Wavefield(a, vec, -n_trunc, tilt, a)


def jordan_chain(pot: ComplexPotential, energy: float, q: float,
                 n_trunc: int | None = None) -> JordanChain:
    """Eigenvector ``u`` and associated vector ``v`` at a defective degeneracy.

    Gauge: ``||u|| = 1`` with its largest mode real and positive, and
    ``<u, v> = 0`` (minimum-norm solution of ``(H - E) v = u``).
    """
    block = bloch_matrix(pot, q, n_trunc)
    A = block.matrix - energy * np.eye(len(block.matrix))
    dim, _ = kernel_dimension(A)
    if dim != 1:
        kind = "diabolic" if dim == 2 else ("not an eigenvalue" if dim == 0 else f"kernel {dim}")
        raise NotDefective(f"E={energy} at q={q}: {kind}")
    U, s, Vh = sla.svd(A)
    u = Vh[-1].conj()
    k = np.argmax(np.abs(u))
    u = u * (abs(u[k]) / u[k]) / np.linalg.norm(u)
    v = Vh[:-1].conj().T @ ((U[:, :-1].conj().T @ u) / s[:-1])
    v = v - np.vdot(u, v) * u
    r_u = float(np.linalg.norm(A @ u))
    r_v = float(np.linalg.norm(A @ v - u))
    a = pot.period
    return JordanChain(energy, q, _block_field(u, a, q, block.n_trunc),
                       _block_field(v, a, q, block.n_trunc), (r_u, r_v))
