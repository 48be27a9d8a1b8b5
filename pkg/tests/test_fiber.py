import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pttalbot import fiber as f
from pttalbot import grid as g
from pttalbot.errors import BandwidthExceeded

C = 299_792_458.0


def test_total_dispersion_value():
    d = f.total_dispersion(1560e-9, 50e-6, 100.0)
    assert d == pytest.approx(1560e-9 ** 2 * 50e-6 * 100 / (4 * np.pi * C), rel=1e-15)
    assert d == pytest.approx(3.2299e-24, rel=1e-4)
    assert f.total_dispersion(1560e-9, 50e-6, 0.0) == 0.0


def test_unit_conversion_matches_si():
    eng = f.FiberParams.from_engineering(1560.0, 50.0)
    si = f.FiberParams(wavelength=1560e-9, dispersion=50e-12 / (1e-9 * 1e3))
    assert abs(eng.total_dispersion - si.total_dispersion) <= 1e-12 * si.total_dispersion


def test_reference_budget():
    d = f.design(f.FiberParams())
    assert d.z_T == pytest.approx(18 * np.pi)
    assert abs(d.n_T - 4.9e4) < 0.02 * 4.9e4
    assert d.depth_scale == pytest.approx(1.1476e-3, rel=1e-3)
    assert d.pulse_spacing == pytest.approx(0.5e-9)
    assert d.capacity_ok and d.max_pulses > 100


def test_six_ghz_value_and_annotation():
    d = f.design(f.FiberParams(modulation_frequency=6e9, N=1, M=1))
    assert d.n_T == pytest.approx(1368.8, rel=1e-3)
    notes = {a.quantity: a for a in f.annotate(d)}
    assert notes["n_T(6 GHz, N=1)"].status == "DISCREPANCY"


def test_reference_check_statuses():
    notes = {a.quantity: a.status for a in f.reference_check()}
    assert notes["n_T(3 GHz, N=3)"] == "AGREE"
    assert notes["T_p(3 GHz, N/M=3/2)"] == "DISCREPANCY"
    assert notes["n_T(6 GHz, N=1)"] == "DISCREPANCY"
    assert notes["depth_scale(3 GHz)"] == "ORDER_OF_MAGNITUDE"


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(1, 7), st.floats(1e9, 2e10), st.floats(1e9, 2e10))
def test_scaling_law(n1, n2, nu1, nu2):
    r1 = f.design(f.FiberParams(modulation_frequency=nu1, N=n1, M=1)).n_T
    r2 = f.design(f.FiberParams(modulation_frequency=nu2, N=n2, M=1)).n_T
    assert r1 / r2 == pytest.approx((n1 / n2) ** 2 * (nu2 / nu1) ** 2, rel=1e-12)


def test_round_trip_inverse():
    p = f.FiberParams()
    n_t, _ = f.roundtrips_for_revival(10.0, p)
    assert f.revival_for_roundtrips(n_t, p) == pytest.approx(10.0, rel=1e-14)


@pytest.mark.parametrize("field", ["loop_length", "wavelength", "dispersion", "modulation_frequency"])
def test_non_positive_rejected(field):
    with pytest.raises(ValueError):
        f.FiberParams(**{field: 0.0})


def test_capacity_violation():
    d = f.design(f.FiberParams(pulse_count=5000))
    assert not d.capacity_ok


def test_drive_round_trip():
    p = f.FiberParams(gain=0.01, loss=0.004)
    pot = g.one_singularity()
    pm, am = f.drive_coefficients(pot, p)
    back = f.normalized_potential(p, pm, am)
    for n in range(-3, 10):
        assert abs(back.coeff(n) - pot.coeff(n)) < 1e-12 * abs(pot.coeffs).max() + 1e-18


def test_drives_are_real_profiles():
    pm, am = f.drive_coefficients(g.two_singularity(), f.FiberParams())
    for drive in (pm, am):
        for n, v in drive.items():
            assert abs(drive.get(-n, 0) - np.conj(v)) < 1e-20


def test_quadrature_drives_make_exp():
    # PM = A cos x, AM = A sin x gives V proportional to exp(i x)
    p = f.FiberParams()
    amp = 1e-3
    pm = {1: amp / 2, -1: amp / 2}
    am = {1: amp / 2j, -1: -amp / 2j}
    pot = f.normalized_potential(p, pm, am)
    assert pot.coeff(-1) == 0
    assert pot.coeff(1) == pytest.approx(amp / p.potential_unit)


def test_bandwidth_exceeded():
    p = f.FiberParams(bandwidth=5e9)          # only the first harmonic at 3 GHz
    with pytest.raises(BandwidthExceeded):
        f.drive_coefficients(g.one_singularity(), p)
    f.drive_coefficients(g.exp_potential(1.0), p)


def test_report_contents():
    r = f.design_report(f.FiberParams(), g.one_singularity(), check=True)
    for key in ("inputs", "total_dispersion_s2", "n_T", "pulse_spacing_s", "capacity", "drives"):
        assert key in r
    assert r["drives"]["PM_peak_to_peak"] > 0
    assert any(a["status"] == "DISCREPANCY" for a in r["reference_check"])
