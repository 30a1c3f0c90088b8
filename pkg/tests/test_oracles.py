"""Dual-backend 1D solvers and separated labeled spectra."""

import numpy as np
import pytest

from few2d import (
    AccuracyNotReached,
    BoundViolation,
    CagedOscillator,
    Custom2D,
    HydrogenPair,
    NotSeparable,
    PW,
    RadialProblem,
    Rational,
    ThreeBodyTTW,
    TTW,
    angular_pt_levels,
    radial_spectrum,
    separated_spectrum,
)


# --- radial problems ---------------------------------------------------

def test_halfline_oscillator_odd_tower():
    # -u'' + r^2 u with Dirichlet at 0: the odd harmonic levels 4n + 3,
    # certified here by the two independent backends agreeing
    p = RadialProblem(kind="oscillator", coupling=1.0)
    fd = radial_spectrum(p, 4)
    shoot = radial_spectrum(p, 4, method="shooting")
    assert np.max(np.abs(fd - shoot) / np.abs(fd)) < 1e-8
    assert np.allclose(fd, [3.0, 7.0, 11.0, 15.0], rtol=1e-8)


def test_halfline_coulomb_tower():
    p = RadialProblem(kind="coulomb", coupling=1.0)
    fd = radial_spectrum(p, 3)
    shoot = radial_spectrum(p, 3, method="shooting")
    assert np.max(np.abs(fd - shoot) / np.abs(fd)) < 1e-8
    assert np.allclose(fd, [-0.25, -1.0 / 16.0, -1.0 / 36.0], rtol=1e-7)


def test_coulomb_with_centrifugal_c2_shifts_tower():
    # c = 2 is the d=3, L=1 sector: the n=1 level drops out
    p = RadialProblem(kind="coulomb", coupling=1.0, c=2.0)
    fd = radial_spectrum(p, 2)
    shoot = radial_spectrum(p, 2, method="shooting")
    assert np.max(np.abs(fd - shoot) / np.abs(fd)) < 1e-8
    assert np.allclose(fd, [-1.0 / 16.0, -1.0 / 36.0], rtol=1e-7)


def test_radial_rejects_bad_inputs():
    with pytest.raises(BoundViolation):
        RadialProblem(kind="oscillator", c=-0.2500001)
    RadialProblem(kind="oscillator", c=-0.25)  # borderline Friedrichs case is fine
    with pytest.raises(ValueError):
        RadialProblem(kind="maser")
    with pytest.raises(ValueError):
        radial_spectrum(RadialProblem(kind="free"), 2)  # needs explicit cutoff


def test_accuracy_not_reached_reports_estimate():
    # an absurd target cannot be certified; the error carries the estimate
    p = RadialProblem(kind="oscillator", coupling=1.0, target=1e-15)
    with pytest.raises(AccuracyNotReached) as err:
        radial_spectrum(p, 3)
    assert err.value.achieved > err.value.target


# --- angular problems --------------------------------------------------

def test_angular_free_box_values():
    lam = angular_pt_levels(Rational(1, 1), 0.0, 0.0, 3)
    assert np.allclose(lam, [4.0, 16.0, 36.0], rtol=1e-9)
    lam_k = angular_pt_levels(Rational(3, 2), 0.0, 0.0, 3)
    k2 = 1.5**2
    assert np.allclose(lam_k, [4.0 * k2, 16.0 * k2, 36.0 * k2], rtol=1e-9)


def test_angular_dual_solver_agreement():
    fd = angular_pt_levels(Rational(3, 1), 1.0, 2.0, 3)
    shoot = angular_pt_levels(Rational(3, 1), 1.0, 2.0, 3, method="shooting")
    assert np.max(np.abs(fd - shoot) / fd) < 1e-8


def test_angular_conventions_differ_by_k_squared_weighting():
    plain = angular_pt_levels(Rational(2, 1), 0.5, 0.5, 2, convention="plain")
    weighted = angular_pt_levels(Rational(2, 1), 0.125, 0.125, 2, convention="k2")
    assert np.allclose(plain, weighted, rtol=1e-10)


def test_angular_bound_violation():
    with pytest.raises(BoundViolation):
        angular_pt_levels(Rational(1, 1), -0.3, 0.0, 2)


# --- separated spectra --------------------------------------------------

def test_hydrogen_pair_levels_are_sums():
    spectrum = separated_spectrum(HydrogenPair(), 2, 2)
    energies = spectrum.energies()
    assert energies[0] == pytest.approx(-0.5, rel=1e-8)
    p = RadialProblem(kind="coulomb", coupling=1.0)
    e = radial_spectrum(p, 3)
    expected = sorted(e[i] + e[j] for i in range(3) for j in range(3))
    assert np.allclose(energies, expected, rtol=1e-9)
    assert len(set(spectrum.labels())) == len(spectrum.labels())


def test_caged_oscillator_sum_tower():
    spectrum = separated_spectrum(CagedOscillator(), 4, 4)
    assert np.allclose(spectrum.energies()[:6], [6.0, 10.0, 10.0, 14.0, 14.0, 14.0],
                       rtol=1e-8)
    # ground label (0, 0)
    assert spectrum.levels[0][1] == (0, 0)


def test_ttw_k1_matches_caged_multiset():
    ttw = separated_spectrum(TTW(omega=1.0, k=Rational(1, 1)), 6, 6)
    caged = separated_spectrum(CagedOscillator(), 6, 6)
    n = 10
    assert np.allclose(ttw.energies()[:n], caged.energies()[:n], rtol=1e-8)


def test_caged_levels_affine_in_quantum_numbers():
    spectrum = separated_spectrum(CagedOscillator(a=4.0, b=1.0, omega=1.0,
                                                  A=0.3, B=0.1), 6, 6)
    rows = spectrum.rows()[:20]
    design = np.array([[1.0, nx, ny] for nx, ny, _ in rows])
    target = np.array([e for _, _, e in rows])
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = np.abs(design @ coef - target).max()
    assert resid < 1e-8


def test_threebody_ttw_uses_weighted_convention():
    spec = ThreeBodyTTW(omega=1.0, k=Rational(3, 1), alpha=0.2, beta=0.1)
    spectrum = separated_spectrum(spec, 2, 2)
    lam = angular_pt_levels(Rational(3, 1), 0.2, 0.1, 3, convention="k2")
    p = RadialProblem(kind="oscillator", coupling=1.0, c=lam[0] - 0.25)
    ground = radial_spectrum(p, 1)[0]
    assert spectrum.energies()[0] == pytest.approx(ground, rel=1e-9)


def test_pw_spectrum_dual_checked():
    spec = PW(a=1.0, k=Rational(2, 1), mu=0.5, nu=0.5)
    fd = separated_spectrum(spec, 1, 1)
    shoot = separated_spectrum(spec, 1, 1, method="shooting")
    assert np.max(np.abs(fd.energies() - shoot.energies()) / np.abs(fd.energies())) < 1e-7


def test_not_separable():
    with pytest.raises(NotSeparable):
        separated_spectrum(Custom2D(func=lambda x, y: x * y, name="xy"), 2, 2)


def test_golden_spectrum_file(request):
    # frozen oracle output under version control; regeneration must agree
    # to the certified accuracy
    golden = request.path.parent / "golden" / "ttw_k2_oracle.csv"
    rows = [line.split(",") for line in golden.read_text().splitlines()[1:]]
    expected = {(int(r[0]), int(r[1])): float(r[2]) for r in rows}
    spectrum = separated_spectrum(TTW(omega=1.0, k=Rational(2, 1),
                                      alpha=0.1875, beta=0.1875), 6, 4)
    assert len(spectrum.levels) == len(expected)
    for energy, label in spectrum.levels:
        assert energy == pytest.approx(expected[label], rel=1e-8)
