import warnings

import numpy as np
import pytest

from nvlockin.odmr import (
    OdmrModel,
    contrast_enhancement,
    dip_depth,
    dr_spectrum,
    linewidth_for_enhancement,
    minimum_enhancement,
    spectrum,
)
from oracles import dip_ref


def model(scheme="single", linewidth=1.0e6, contrast=0.01, omega0=2.87e9):
    return OdmrModel(
        omega0=omega0, linewidth=linewidth, contrast=contrast, hf=2.16e6, scheme=scheme
    )


def test_single_tone_center_value():
    m = model()
    # independent arithmetic: C * (1 + 2/(1 + 4*(hf/lw)^2)) at the comb center
    a = 1.0 / (1.0 + 4.0 * 2.16**2)
    expected_dip = 0.01 * (1.0 + 2.0 * a)
    got = float(spectrum(m, m.omega0))
    assert got == pytest.approx(1.0 - expected_dip, rel=1e-14)
    assert 1.0 - got == pytest.approx(0.011017169826674222, rel=1e-14)


def test_spectrum_matches_comb_reference():
    for scheme in ("single", "triple"):
        m = model(scheme=scheme, linewidth=1.7e6, contrast=0.033)
        omega = m.omega0 + np.linspace(-8.0e6, 8.0e6, 101)
        ref = 1.0 - dip_ref(omega - m.omega0, 1.7e6, 0.033, scheme=scheme)
        np.testing.assert_allclose(spectrum(m, omega), ref, rtol=1e-13)


def test_single_tone_far_detuned_limit():
    m = model()
    for sign in (-1.0, 1.0):
        assert float(spectrum(m, m.omega0 + sign * 1.0e12)) == pytest.approx(1.0, abs=1e-10)


def test_triple_tone_narrow_limit():
    m = model(scheme="triple", linewidth=1.0)
    assert dip_depth(m) == pytest.approx(3.0 * m.contrast, rel=1e-9)


def test_spectrum_symmetry_and_minimum():
    m = model(scheme="triple")
    x = np.linspace(0.0, 6.0e6, 301)
    up = np.asarray(spectrum(m, m.omega0 + x))
    down = np.asarray(spectrum(m, m.omega0 - x))
    np.testing.assert_allclose(up, down, rtol=0, atol=1e-12)
    omega = m.omega0 + np.linspace(-6.0e6, 6.0e6, 601)
    s = np.asarray(spectrum(m, omega))
    assert np.all(s <= 1.0)
    assert abs(omega[np.argmin(s)] - m.omega0) < 2.1e4  # one grid step


def test_dip_depth_ratio_equals_enhancement():
    for lw in (5.0e5, 1.0e6, 3.0e6):
        single = dip_depth(model(scheme="single", linewidth=lw))
        triple = dip_depth(model(scheme="triple", linewidth=lw))
        assert triple / single == pytest.approx(contrast_enhancement(lw), rel=1e-12)
        assert triple < 3.0 * single + 1e-15


def test_enhancement_value_at_1mhz():
    # term-by-term Lorentzian sum, written out independently
    r = 2.16
    a = 1.0 / (1.0 + 4.0 * r * r)
    b = 1.0 / (1.0 + 16.0 * r * r)
    expected = (3.0 + 4.0 * a + 2.0 * b) / (1.0 + 2.0 * a)
    got = contrast_enhancement(1.0e6)
    assert got == pytest.approx(expected, rel=1e-14)
    assert got == pytest.approx(2.931670925697226, rel=1e-13)
    assert got == pytest.approx(2.93, abs=5e-3)


def test_enhancement_narrow_limit():
    assert contrast_enhancement(1.0e2) == pytest.approx(3.0, abs=1e-6)


def test_enhancement_decreasing_up_to_minimum():
    # decreasing in linewidth/hf on the narrow side of the global minimum
    w_min, _ = minimum_enhancement()
    grid = np.linspace(0.05 * 2.16e6, w_min, 200)
    vals = np.array([contrast_enhancement(w) for w in grid])
    assert np.all(np.diff(vals) < 0.0)


def test_minimum_enhancement_frozen_and_global():
    w_min, r_min = minimum_enhancement()
    assert w_min == pytest.approx(4642142.05484287, rel=1e-9)
    assert r_min == pytest.approx(2.6989191684434135, rel=1e-12)
    for w in np.logspace(3, 9, 61):
        assert contrast_enhancement(w) >= r_min - 1e-12


def test_linewidth_for_enhancement_both_branches():
    broad = linewidth_for_enhancement(2.8, branch="broad")
    narrow = linewidth_for_enhancement(2.8, branch="narrow")
    assert broad == pytest.approx(10057991.498069927, rel=1e-9)
    assert narrow == pytest.approx(2142523.5178995896, rel=1e-9)
    assert narrow < minimum_enhancement()[0] < broad
    assert contrast_enhancement(broad) == pytest.approx(2.8, abs=1e-6)
    assert contrast_enhancement(narrow) == pytest.approx(2.8, abs=1e-6)


def test_linewidth_for_enhancement_unattainable():
    with pytest.raises(ValueError):
        linewidth_for_enhancement(2.4)
    with pytest.raises(ValueError):
        linewidth_for_enhancement(3.0)


def test_dr_spectrum_coincident_doubles_depth():
    m1 = model(scheme="triple")
    m2 = model(scheme="triple")
    depth_dr = 1.0 - float(dr_spectrum(m1, m2, m1.omega0))
    assert depth_dr == pytest.approx(2.0 * dip_depth(m1), rel=1e-12)


def test_dr_spectrum_far_separated_reduces_to_single():
    # 300 MHz apart the second comb's tail is ~4e-7 of contrast at the first
    m1 = model(scheme="triple", omega0=2.87e9 - 1.5e8)
    m2 = model(scheme="triple", omega0=2.87e9 + 1.5e8)
    omega = m1.omega0 + np.linspace(-3.0e6, 3.0e6, 41)
    np.testing.assert_allclose(
        dr_spectrum(m1, m2, omega), spectrum(m1, omega), rtol=0, atol=1e-6
    )


def test_dr_depth_exceeds_sr_depth(pair):
    m1 = model(scheme="triple", omega0=pair.f1)
    m2 = model(scheme="triple", omega0=pair.f2)
    dr_center = 1.0 - float(dr_spectrum(m1, m2, pair.f1))
    sr_center = 1.0 - float(spectrum(m1, pair.f1))
    assert dr_center > sr_center


def test_dr_spectrum_overlap_warning(pair):
    m1 = model(scheme="triple", omega0=pair.f1, linewidth=3.0e6)
    m2 = model(scheme="triple", omega0=pair.f1 + 2.0e6, linewidth=3.0e6)
    with pytest.warns(UserWarning):
        dr_spectrum(m1, m2, np.array([pair.f1]))
    far = model(scheme="triple", omega0=pair.f2, linewidth=3.0e6)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dr_spectrum(m1, far, np.array([pair.f1]))


def test_model_validation():
    with pytest.raises(ValueError):
        model(linewidth=0.0)
    with pytest.raises(ValueError):
        model(contrast=1.0)
    with pytest.raises(ValueError):
        model(contrast=0.0)
