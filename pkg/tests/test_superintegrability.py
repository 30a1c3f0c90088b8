"""Integral order, potential identities, degeneracy scans."""

import math

import numpy as np
import pytest

from few2d import (
    Bridge,
    Calogero,
    NotRational,
    Rational,
    TTW,
    Wolfes,
    degeneracy_scan,
    fit_caged_image_of_ttw,
    identity_check,
    integral_order,
    labeled_collisions,
    ordered_line_to_jacobi_polar_bridge,
    polar_to_cartesian_bridge,
    separated_spectrum,
    wolfes_to_ttw,
)


# --- integral order -----------------------------------------------------

@pytest.mark.parametrize("m,n,expected", [(1, 1, 2), (3, 1, 6), (3, 2, 8)])
def test_integral_order_reference_values(m, n, expected):
    assert integral_order(Rational(m, n)) == expected


def test_integral_order_random_reduced_fractions():
    rng = np.random.default_rng(77)
    count = 0
    while count < 50:
        m = int(rng.integers(1, 40))
        n = int(rng.integers(1, 40))
        if math.gcd(m, n) != 1:
            continue
        count += 1
        assert integral_order(Rational(m, n)) == 2 * (m + n - 1)


def test_integral_order_representation_invariance():
    assert integral_order(Rational(6, 4)) == integral_order(Rational(3, 2))
    assert integral_order(Rational(10, 2)) == integral_order(Rational(5, 1))


def test_integral_order_rejects_irrational():
    with pytest.raises(NotRational):
        integral_order(math.sqrt(2.0))


# --- identity checks ----------------------------------------------------

def test_wolfes_vs_ttw3_image():
    image = wolfes_to_ttw(1.0, 1.0, 2.0)
    res = identity_check(Wolfes(omega=1.0, A=1.0, B=2.0), image.as_spec(),
                         ordered_line_to_jacobi_polar_bridge(), samples=1000,
                         tol=1e-12)
    assert res.passed
    assert res.samples == 1000


def test_calogero_is_wolfes_b0_identity_bridge():
    bridge = ordered_line_to_jacobi_polar_bridge()
    same_chart = Bridge(sample_box=bridge.sample_box, to_a=bridge.to_a,
                        to_b=bridge.to_a, admissible=bridge.admissible)
    res = identity_check(Wolfes(omega=1.2, A=0.7, B=0.0), Calogero(omega=1.2, A=0.7),
                         same_chart, samples=300, tol=0.0)
    assert res.max_rel_deviation == 0.0


def test_ttw_k1_caged_dictionary():
    ttw = TTW(omega=1.0, k=Rational(1, 1), alpha=0.3, beta=0.7)
    caged = fit_caged_image_of_ttw(ttw)
    assert caged.A == pytest.approx(0.3, rel=1e-12)
    assert caged.B == pytest.approx(0.7, rel=1e-12)
    res = identity_check(ttw, caged, polar_to_cartesian_bridge(), samples=1000,
                         tol=1e-12)
    assert res.passed


def test_identity_check_is_symmetric_under_swap():
    image = wolfes_to_ttw(1.0, 0.5, 1.0)
    bridge = ordered_line_to_jacobi_polar_bridge()
    fwd = identity_check(Wolfes(omega=1.0, A=0.5, B=1.0), image.as_spec(), bridge,
                         samples=400, tol=1e-12)
    swapped = Bridge(sample_box=bridge.sample_box, to_a=bridge.to_b,
                     to_b=bridge.to_a, admissible=bridge.admissible)
    rev = identity_check(image.as_spec(), Wolfes(omega=1.0, A=0.5, B=1.0), swapped,
                         samples=400, tol=1e-12)
    # same symmetric deviation measure, same samples: equal up to roundoff
    assert rev.max_rel_deviation == pytest.approx(fwd.max_rel_deviation, rel=1e-9)


# --- degeneracy scans -----------------------------------------------------

def test_scan_rational_k_multiplicities_match_label_collisions():
    template = TTW(omega=1.0, k=Rational(1, 1), alpha=3.0 / 16.0, beta=3.0 / 16.0)
    entries = degeneracy_scan(template, [Rational(2, 1)], levels_per_k=20,
                              n_r_max=12, j_max=8)
    entry = entries[0]
    assert entry.integral_order == 4
    collisions = labeled_collisions(entry.spectrum, 20)
    assert entry.report.multiplicities() == [mult for _, mult, _ in collisions]
    # for k = m/n the level E(n_r, j) collides exactly with equal n*n_r + m*j
    classes = {}
    for _, _, labels in collisions:
        for n_r, j in labels:
            classes.setdefault(n_r + 2 * j, 0)
            classes[n_r + 2 * j] += 1
    for _, mult, labels in collisions:
        key = labels[0][0] + 2 * labels[0][1]
        assert all(n_r + 2 * j == key for n_r, j in labels)
        assert mult == classes[key]


def test_scan_irrational_k_has_no_accidental_degeneracy():
    template = TTW(omega=1.0, k=Rational(1, 1), alpha=3.0 / 16.0, beta=3.0 / 16.0)
    entries = degeneracy_scan(template, [math.sqrt(2.0)], levels_per_k=20,
                              n_r_max=12, j_max=8)
    entry = entries[0]
    assert entry.integral_order is None
    assert max(entry.report.multiplicities()) == 1


def test_scan_k1_annotated_with_order_two():
    template = TTW(omega=1.0, k=Rational(1, 1), alpha=0.1, beta=0.1)
    entries = degeneracy_scan(template, [Rational(1, 1)], levels_per_k=12,
                              n_r_max=8, j_max=8)
    assert entries[0].integral_order == 2


def test_multiplicities_stable_across_tolerance_decade():
    # decade stability needs oracle levels a good margin tighter than the
    # smallest clustering tolerance
    spectrum = separated_spectrum(TTW(omega=1.0, k=Rational(2, 1),
                                      alpha=3.0 / 16.0, beta=3.0 / 16.0), 8, 4,
                                  target=3e-10)
    from few2d import detect_degeneracies

    levels = spectrum.energies()[:20]
    mults = {tol: detect_degeneracies(levels, tol_rel=tol).multiplicities()
             for tol in (1e-9, 1e-8, 1e-7)}
    assert mults[1e-9] == mults[1e-8] == mults[1e-7]
