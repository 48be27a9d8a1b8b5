"""Commensurate periodic wavefields under ``i psi_z = -psi_xx + V(x) psi``.

A field of period ``L = N a`` only couples modes ``n`` that agree modulo
``N``. Each residue class ``n0`` is an independent Bloch block with wave
number ``q = 2 pi (n0/N + p)/a`` and is evolved with the dense matrix
exponential of its truncated Bloch Hamiltonian, which is exact in ``z`` and
remains valid when the block is defective.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from . import grid as g
from .bands import _threads, bloch_matrix
from .errors import (BlockMismatch, NormNotConserved, NotSecular, ScenarioInvalid,
                     StepNotConverged, TiltConditionsViolated, TruncationTooSmall,
                     WidthTooLarge)
from .grid import TWO_PI, ComplexPotential, Grid, Wavefield
from .io import write_csv

REVIVAL_TOL = 1e-6
NON_REVIVAL_TOL = 1e-2
SAMPLES_PER_PERIOD = 512
SIGNIFICANT = 1e-15  # relative amplitude below which a mode is ignored for support


# -- commensurability --------------------------------------------------------

def residues(N: int) -> range:
    """The ``N`` consecutive residues ``n0``, centred on zero."""
    if N % 2:
        return range(-(N - 1) // 2, (N - 1) // 2 + 1)
    return range(-N // 2, N // 2)


def tilt_conditions(N: int, p) -> tuple[bool, str]:
    """Hypotheses that make a tilted commensurate input self-image."""
    p = Fraction(p)
    if p == 0:
        return True, "untilted"
    inv = 1 / p
    if inv.denominator != 1:
        return False, f"1/p = {inv} is not an integer"
    if math.gcd(abs(inv.numerator), N) != 1:
        return False, f"1/p = {inv} shares a factor with N = {N}"
    if (2 * N * p).denominator == 1:
        return False, f"2Np = {2 * N * p} is an integer"
    return True, "tilt conditions hold"


def predict_revival(N: int, M: int = 1, a: float = TWO_PI, p=0) -> float:
    """Talbot distance ``N^2 a^2 / (2 pi)``, divided by ``p^2`` for a tilted input."""
    if N < 1 or M < 1 or math.gcd(N, M) != 1:
        raise ScenarioInvalid(f"N={N}, M={M} must be coprime positive integers")
    p = Fraction(p)
    ok, why = tilt_conditions(N, p)
    if not ok:
        raise TiltConditionsViolated(why)
    z_t = N * N * a * a / TWO_PI
    return z_t if p == 0 else z_t / float(p * p)


def trace_samples(z_t: float, periods: float = 2, per_period: int = SAMPLES_PER_PERIOD) -> np.ndarray:
    """``0, dz, 2 dz, ...`` up to ``periods * z_t`` with ``dz = z_t / per_period``."""
    count = int(round(periods * per_period))
    return z_t * np.arange(count + 1) / per_period


# -- profiles ----------------------------------------------------------------

def gaussian_train(N: int, M: int, a: float = TWO_PI, w: float | None = None,
                   tilt=0, tail: float = 1e-18) -> Wavefield:
    """Unit-power periodization of ``exp(-x^2/w^2)`` with period ``(N/M) a``.

    Built directly in mode space: harmonic ``l`` of the short period has
    weight ``(w sqrt(pi)/P) exp(-(pi w l / P)^2)`` and sits at mode ``M l`` of
    the ``L = N a`` basis.
    """
    period = N / M * a
    if w is None:
        w = period / 10
    if not 0 < w < period / 2:
        raise WidthTooLarge(f"w={w} must lie in (0, {period / 2})")
    l_max = int(np.ceil(np.sqrt(-np.log(tail)) * period / (np.pi * w)))
    ls = np.arange(-l_max, l_max + 1)
    weights = (w * np.sqrt(np.pi) / period) * np.exp(-(np.pi * w * ls / period) ** 2)
    amp = np.zeros(2 * M * l_max + 1, dtype=complex)
    amp[M * ls + M * l_max] = weights
    return Wavefield(N * a, amp, -M * l_max, Fraction(tilt), a).normalized()


@dataclass(frozen=True)
class Profile:
    """Initial-field recipe: ``GAUSSIAN_TRAIN`` (width relative to its period),
    ``JORDAN_V`` (associated vector at singular level ``level``) or ``CUSTOM``."""

    kind: str = "GAUSSIAN_TRAIN"
    width_over_period: float = 0.1
    level: int = 1
    field: Wavefield | None = None


@dataclass(frozen=True, eq=False)
class Scenario:
    potential: ComplexPotential
    N: int
    M: int = 1
    tilt: Fraction = Fraction(0)
    profile: Profile = field(default_factory=Profile)
    z_samples: Sequence[float] = ()
    n_trunc: int | None = None

    def __post_init__(self):
        if self.N < 1 or self.M < 1 or math.gcd(self.N, self.M) != 1:
            raise ScenarioInvalid(f"N={self.N}, M={self.M} must be coprime positive integers")
        object.__setattr__(self, "tilt", Fraction(self.tilt))
        if self.tilt != 0 and self.profile.kind != "JORDAN_V":
            ok, why = tilt_conditions(self.N, self.tilt)
            if not ok:
                raise TiltConditionsViolated(why)
        object.__setattr__(self, "z_samples", np.asarray(self.z_samples, dtype=float))

    @property
    def a(self) -> float:
        return self.potential.period

    @property
    def input_period(self) -> float:
        return self.N / self.M * self.a

    @property
    def revival_distance(self) -> float:
        return predict_revival(self.N, self.M, self.a, self.tilt)

    def initial_field(self) -> Wavefield:
        kind = self.profile.kind
        if kind == "GAUSSIAN_TRAIN":
            return gaussian_train(self.N, self.M, self.a,
                                  self.profile.width_over_period * self.input_period, self.tilt)
        if kind == "JORDAN_V":
            from .bands import singularity_location
            from .susy import jordan_chain
            n = self.profile.level
            chain = jordan_chain(self.potential, (n * np.pi / self.a) ** 2,
                                 singularity_location(n, self.a), self.n_trunc)
            return chain.v
        if kind == "CUSTOM" and self.profile.field is not None:
            return self.profile.field
        raise ScenarioInvalid(f"unknown or incomplete profile {kind!r}")


# -- exact block propagator ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class PropagationTrace:
    z: np.ndarray
    delta: np.ndarray
    delta_half: np.ndarray
    norm: np.ndarray
    period: float
    lattice_period: float
    tilt: Fraction
    n_min: int
    fields: np.ndarray | None = None   # (len(z), modes)
    initial: Wavefield | None = None

    def snapshot(self, i: int) -> Wavefield:
        if self.fields is None:
            raise ValueError("trace was computed without field snapshots")
        return Wavefield(self.period, self.fields[i], self.n_min, self.tilt, self.lattice_period)

    def at(self, z: float) -> int:
        """Index of the sample closest to ``z``."""
        return int(np.argmin(np.abs(self.z - z)))

    def is_conservative(self, tol: float = 1e-6) -> bool:
        return bool(np.max(np.abs(self.norm - self.norm[0])) <= tol * self.norm[0])


def _block_layout(N: int, n0: int, q: float, a: float):
    """Reduce ``q`` into the zone; returns ``(q_red, s)`` with mode ``n = n0 + N (j - s)``."""
    s = math.floor(q * a / TWO_PI + 0.5)
    return q - TWO_PI * s / a, s


def _significant(field: Wavefield) -> np.ndarray:
    amp = np.abs(field.amplitudes)
    return field.indices[amp > SIGNIFICANT * amp.max()] if amp.max() > 0 else field.indices[:0]


def default_block_truncation(pot: ComplexPotential, field: Wavefield, N: int) -> int:
    sig = _significant(field)
    span = int(np.max(np.abs(sig))) // N + 2 if len(sig) else 0
    return max(2 * pot.n_max, span + 24)


def _evolve_block(H: np.ndarray, f0: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``expm(-i H z_k) f0`` for increasing ``z_k``, chaining step propagators."""
    out = np.empty((len(z), len(f0)), dtype=complex)
    cache: dict[float, np.ndarray] = {}
    cur, zc = f0, 0.0
    for k, zk in enumerate(z):
        dz = float(zk - zc)
        if dz != 0.0:
            U = cache.get(dz)
            if U is None:
                U = cache[dz] = sla.expm(-1j * H * dz)
            cur = U @ cur
        out[k] = cur
        zc = zk
    return out


def evolve(field: Wavefield, pot: ComplexPotential, z_samples, N: int | None = None,
           shift: float | None = None, n_trunc: int | None = None,
           keep_fields: bool = True, threads: int | None = None) -> PropagationTrace:
    """Propagate ``field`` (period ``N a``) and record the deviation functionals.

    ``shift`` is the translation used for the half-period functional, normally
    half the input period. Distances may come in any order.
    """
    a = pot.period
    if N is None:
        N = int(round(field.period / a))
    if not np.isclose(field.period, N * a, rtol=1e-12) or not np.isclose(field.lattice_period, a):
        raise BlockMismatch(f"field period {field.period} is not N*a = {N * a}")
    z = np.asarray(z_samples, dtype=float)
    if np.any(z < 0):
        raise ValueError("z samples must be non-negative")
    order = np.argsort(z, kind="stable")
    if shift is None:
        shift = field.period / 2
    if n_trunc is None:
        n_trunc = default_block_truncation(pot, field, N)
    p = field.tilt

    sig = _significant(field)
    blocks = []
    covered = 0
    for n0 in residues(N):
        q = TWO_PI * (n0 / N + float(p)) / a
        q_red, s = _block_layout(N, n0, q, a)
        j = np.arange(-n_trunc, n_trunc + 1)
        n = n0 + N * (j - s)
        in_class = sig[(sig - n0) % N == 0]
        if len(in_class) and (in_class.min() < n.min() or in_class.max() > n.max()):
            raise TruncationTooSmall(f"initial modes of residue {n0} exceed n_trunc={n_trunc}")
        covered += len(in_class)
        blocks.append((q_red, n))
    if covered != len(sig):
        raise BlockMismatch("residue blocks do not partition the initial modes")

    k_of = lambda n: TWO_PI * n / field.period + TWO_PI * float(p) / a  # noqa: E731

    def run(block):
        q_red, n = block
        H = bloch_matrix(pot, q_red, n_trunc).matrix
        f0 = np.array([field.mode(int(m)) for m in n])
        traj = np.empty((len(z), len(f0)), dtype=complex)
        traj[order] = _evolve_block(H, f0, z[order])
        shifted = f0 * np.exp(1j * k_of(n) * shift)
        return (n, traj if keep_fields else None,
                np.sum(np.abs(traj - f0) ** 2, axis=1),
                np.sum(np.abs(traj - shifted) ** 2, axis=1),
                np.sum(np.abs(traj) ** 2, axis=1))

    workers = threads or _threads()
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(run, blocks))
    else:
        results = [run(b) for b in blocks]

    delta = sum(r[2] for r in results)
    delta_half = sum(r[3] for r in results)
    norm = sum(r[4] for r in results)
    n_lo = int(min(r[0].min() for r in results))
    n_hi = int(max(r[0].max() for r in results))
    fields = None
    if keep_fields:
        fields = np.zeros((len(z), n_hi - n_lo + 1), dtype=complex)
        for n, traj, *_ in results:
            fields[:, n - n_lo] = traj
    return PropagationTrace(z, delta, delta_half, norm, field.period, a, p, n_lo,
                            fields, field)


def propagate(scenario: Scenario, keep_fields: bool = True) -> PropagationTrace:
    field0 = scenario.initial_field()
    N = int(round(field0.period / scenario.a))
    return evolve(field0, scenario.potential, scenario.z_samples, N,
                  shift=scenario.input_period / 2, n_trunc=scenario.n_trunc,
                  keep_fields=keep_fields)


def deviation_at(scenario: Scenario, z: Sequence[float]) -> np.ndarray:
    """``Delta`` at a few distances, each reached with a single exponential."""
    field0 = scenario.initial_field()
    out = []
    for zk in z:
        tr = evolve(field0, scenario.potential, [zk], None, scenario.input_period / 2,
                    scenario.n_trunc, keep_fields=False)
        out.append(tr.delta[0])
    return np.array(out)


# -- independent split-step integrator ------------------------------------------

_YOSHIDA = (1 / (2 - 2 ** (1 / 3)), 1 - 2 / (2 - 2 ** (1 / 3)), 1 / (2 - 2 ** (1 / 3)))


def _split_step(psi0: np.ndarray, v: np.ndarray, k: np.ndarray, z: float, steps: int,
                order: int) -> np.ndarray:
    h = z / steps
    weights = (1.0,) if order == 2 else _YOSHIDA
    stages = [(np.exp(-0.5j * v * w * h), np.exp(-1j * k * k * w * h)) for w in weights]
    psi = psi0
    for _ in range(steps):
        for half_v, kin in stages:
            psi = half_v * np.fft.ifft(kin * np.fft.fft(half_v * psi))
    return psi


def split_step_oracle(field: Wavefield, pot: ComplexPotential, z: float, dz: float = 0.005,
                      order: int = 4, points: int = 512, tol: float = 1e-8) -> Wavefield:
    """Symmetric operator splitting in sample space, checked by step halving.

    Kinetic factors are exact in mode space and the complex potential acts as
    pointwise phase and gain. ``order=4`` composes three Strang steps (triple
    jump). Raises StepNotConverged if halving ``dz`` moves the RMS field by more
    than ``tol``.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    while field.max_index >= points // 4:
        points *= 2
    grid = Grid(field.period, points)
    if z == 0:
        return g.to_modes(g.to_samples(field, grid), grid, field.tilt, field.lattice_period)
    psi0 = g.to_samples(field, grid)
    v = g.potential_samples(pot, grid)
    k = grid.wavenumbers + TWO_PI * float(field.tilt) / field.lattice_period
    # the carrier exp(i kappa x) is factored out: evolve the periodic envelope
    env0 = psi0 * np.exp(-1j * TWO_PI * float(field.tilt) * grid.x / field.lattice_period)
    steps = max(1, int(np.ceil(z / dz)))
    coarse = _split_step(env0, v, k, z, steps, order)
    fine = _split_step(env0, v, k, z, 2 * steps, order)
    change = np.sqrt(g.mean_square(fine - coarse))
    if change > tol:
        raise StepNotConverged(f"halving dz changed the field by {change:.2e} (> {tol:.0e})")
    spec = np.fft.fftshift(np.fft.fft(fine) / points)
    return Wavefield(field.period, spec, -points // 2, field.tilt, field.lattice_period)


def field_distance(a: Wavefield, b: Wavefield) -> float:
    """RMS distance ``sqrt((1/L) int |a - b|^2 dx)``."""
    return float(np.sqrt(a.distance2(b)))


# -- secular growth and recurrence -----------------------------------------------

@dataclass(frozen=True)
class SecularFit:
    slope: float
    law_error: float
    z: np.ndarray
    norms: np.ndarray


def secular_growth_fit(pot: ComplexPotential, chain, z_max: float = 200.0, samples: int = 10,
                       law_tol: float = 1e-6, slope_rtol: float = 0.01) -> SecularFit:
    """Propagate the associated vector ``v`` and compare with ``e^{-iEz}(v - i z u)``."""
    z = np.linspace(z_max / samples, z_max, samples)
    n_trunc = (len(chain.v.amplitudes) - 1) // 2
    tr = evolve(chain.v, pot, z, 1, n_trunc=n_trunc)
    u = chain.u.window(tr.n_min, tr.n_min + tr.fields.shape[1] - 1)
    v = chain.v.window(tr.n_min, tr.n_min + tr.fields.shape[1] - 1)
    expected = np.exp(-1j * chain.energy * z)[:, None] * (v[None, :] - 1j * z[:, None] * u[None, :])
    err = float(np.max(np.sqrt(np.sum(np.abs(tr.fields - expected) ** 2, axis=1))))
    norms = np.sqrt(tr.norm)
    upper = z >= z_max / 2
    slope = float(np.polyfit(z[upper], norms[upper], 1)[0])
    if err > law_tol:
        raise NotSecular(f"field departs from the linear-growth law by {err:.2e}")
    if abs(slope - chain.norm_u) > slope_rtol * chain.norm_u:
        raise NotSecular(f"norm slope {slope:.6f} differs from ||u|| = {chain.norm_u:.6f}")
    return SecularFit(slope, err, z, norms)


def secular_growth_test(pot: ComplexPotential, chain, z_max: float = 200.0) -> float:
    """Fitted growth rate of ``||psi(z)||`` for the input ``psi(0) = v``."""
    return secular_growth_fit(pot, chain, z_max).slope


def departure_index(delta: np.ndarray, z: np.ndarray, epsilon: float) -> int | None:
    """First sample with ``z > 0`` at which ``Delta >= epsilon``."""
    idx = np.nonzero((z > 0) & (delta >= epsilon))[0]
    return int(idx[0]) if len(idx) else None


def recurrence_search(trace: PropagationTrace, epsilon: float) -> float | None:
    """Smallest sampled ``z0`` at which the field has come back within ``epsilon``.

    Only samples after the field has first left the ``epsilon`` neighbourhood
    count as a return; ``Delta`` is trivially small just after ``z = 0``.
    """
    if not trace.is_conservative(1e-6):
        raise NormNotConserved("recurrence search needs a norm-conserving (Hermitian) trace")
    z, d = trace.z, trace.delta
    start = departure_index(d, z, epsilon)
    if start is None:
        later = np.nonzero(z > 0)[0]
        return float(z[later[0]]) if len(later) else None
    back = np.nonzero(d[start:] < epsilon)[0]
    return float(z[start + back[0]]) if len(back) else None


def min_after_departure(trace: PropagationTrace, threshold: float = NON_REVIVAL_TOL,
                        z_max: float | None = None) -> float:
    """Smallest ``Delta`` once the field has left the ``threshold`` band."""
    z, d = trace.z, trace.delta
    start = departure_index(d, z, threshold)
    if start is None:
        return 0.0
    sel = slice(start, None) if z_max is None else slice(start, int(np.searchsorted(z, z_max, "right")))
    return float(np.min(d[sel]))


# -- output ----------------------------------------------------------------------

def write_trace_csv(trace: PropagationTrace, path):
    rows = zip(trace.z, trace.delta, trace.delta_half, trace.norm)
    return write_csv(path, ["z", "delta", "delta_half", "norm"], rows)


def snapshot_grid(trace: PropagationTrace, points: int = 512) -> Grid:
    while True:
        try:
            for i in (0, len(trace.z) - 1):
                _trimmed(trace.snapshot(i), points)
            return Grid(trace.period, points)
        except g.UnderResolved:
            points *= 2


def _trimmed(field: Wavefield, points: int) -> Wavefield:
    amp = np.where(np.abs(field.amplitudes) > SIGNIFICANT * np.abs(field.amplitudes).max(),
                   field.amplitudes, 0)
    f = field.replace(amp)
    if f.max_index >= points // 2:
        raise g.UnderResolved(f"snapshot needs more than {points} points")
    return f


def write_snapshots_csv(trace: PropagationTrace, path, every: int = 64, points: int = 512):
    grid = snapshot_grid(trace, points)
    x = grid.x

    def rows():
        for i in range(0, len(trace.z), every):
            psi = g.to_samples(_trimmed(trace.snapshot(i), grid.points), grid)
            for xj, pj in zip(x, psi):
                yield trace.z[i], xj, pj.real, pj.imag

    return write_csv(path, ["z", "x", "re_psi", "im_psi"], rows())
