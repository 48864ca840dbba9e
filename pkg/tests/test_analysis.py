import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polaritonix.analysis import (
    Peak,
    PolaritonModel,
    absorption_fwhm,
    dominant_peaks,
    equal_linewidth_detuning,
    extract_features,
    find_peaks,
    fwhm,
    intensity_ratio,
    rabi_splitting,
)
from polaritonix.errors import (
    AmbiguousSplittingError,
    NoPeaksError,
    NoSplittingError,
    NotBracketedError,
    OverlappingPeaksError,
)
from polaritonix.pe import ThermalEnv, VibrationalMode
from polaritonix.response import CavityParams, MoleculeParams, absorption_mixture, resonance_peaks

ENV = ThermalEnv(1.0)


def lorentz(x0, width):
    return lambda x: 1.0 / ((np.asarray(x) - x0) ** 2 + width ** 2)


def two_lorentz(x):
    x = np.asarray(x)
    return 1.0 / ((x + 2) ** 2 + 0.25) + 0.5 / ((x - 3) ** 2 + 0.25)


def symmetric_system():
    cav = CavityParams(0.0, 1.0, 5.0)
    mol = MoleculeParams(0.0, 0.5, (VibrationalMode(1.0, 0.0, 2.0),))
    return cav, mol


# ------------------------------------------------------------ generic tools


def test_find_peaks_refines_positions():
    peaks = find_peaks(two_lorentz, (-10, 10), n_scan=201)
    # each tail drags the other maximum slightly; locate the true maxima densely
    for peak, guess in zip(peaks, (-2.0, 3.0)):
        x = np.linspace(guess - 0.01, guess + 0.01, 200_001)
        assert peak.position == pytest.approx(x[np.argmax(two_lorentz(x))], abs=2e-7)
    assert peaks[0].height > peaks[1].height


def test_find_peaks_rejects_monotone_function():
    with pytest.raises(NoPeaksError):
        find_peaks(lambda x: np.asarray(x), (0, 1))


def test_dominance_threshold():
    peaks = [Peak(0.0, 1.0), Peak(1.0, 0.06), Peak(2.0, 0.04)]
    assert dominant_peaks(peaks) == peaks[:2]


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(0.05, 2))
def test_fwhm_of_lorentzian(x0, width):
    f = lorentz(x0, width)
    assert fwhm(f, x0, f(x0), (x0 - 50 * width, x0 + 50 * width)) == pytest.approx(2 * width, rel=1e-6)


def test_fwhm_detects_neighbour():
    f = lambda x: 1.0 / ((np.asarray(x) + 1) ** 2 + 0.5) + 1.0 / ((np.asarray(x) - 1) ** 2 + 0.5)  # noqa: E731
    with pytest.raises(OverlappingPeaksError):
        fwhm(f, -1.0, float(f(-1.0)), (-10, 10), step=0.01)


def test_fwhm_outside_bracket():
    f = lorentz(0.0, 1.0)
    with pytest.raises(OverlappingPeaksError):
        fwhm(f, 0.0, 1.0, (-0.5, 0.5))


def test_absorption_fwhm_of_bare_molecule():
    a = absorption_mixture(MoleculeParams(0.0, 0.7), ENV)
    assert absorption_fwhm(a) == pytest.approx(0.7, rel=1e-6)


# ------------------------------------------------------------ polaritons


def test_symmetric_pair_matches_resonance_formula():
    cav, mol = symmetric_system()
    lower, upper = PolaritonModel(cav, mol, ENV).polariton_pair(0.0)
    expected = resonance_peaks(0.0, cav.g_N, cav.kappa_c, 0.5)
    assert upper.position == pytest.approx(expected[0], abs=1e-6)
    assert lower.position == pytest.approx(expected[1], abs=1e-6)


def test_features_of_symmetric_system():
    cav, mol = symmetric_system()
    f = extract_features(cav, mol, ENV, (-4, 4))
    assert f.delta_R == pytest.approx(0.0, abs=1e-3)
    assert f.intensity_ratio == pytest.approx(1.0, abs=1e-6)
    assert f.linewidth_plus == pytest.approx(f.linewidth_minus, rel=1e-6)
    assert f.delta_Gamma == pytest.approx(0.0, abs=1e-3)
    assert f.rabi_splitting == pytest.approx(f.omega_plus - f.omega_minus, rel=1e-9)


def test_rabi_splitting_is_minimum_over_detuning():
    cav, mol = symmetric_system()
    model = PolaritonModel(cav, mol, ENV)
    r, delta = rabi_splitting(cav, mol, ENV, (-4, 4), model)
    for d in (-2.0, -0.5, 0.7, 3.0):
        assert model.splitting(d) >= r - 1e-9


def test_too_many_peaks_is_ambiguous():
    cav = CavityParams(0.0, 0.2, 1.0)
    mol = MoleculeParams(0.0, 0.05, (VibrationalMode(1.0, 1.0, 50.0),))
    with pytest.raises(AmbiguousSplittingError) as info:
        PolaritonModel(cav, mol, ThermalEnv(0.2)).polariton_pair(0.0)
    assert info.value.n_peaks > 2


def test_weak_coupling_has_no_splitting():
    cav = CavityParams(0.0, 2.0, 0.2)
    mol = MoleculeParams(0.0, 1.0)
    with pytest.raises(NoSplittingError):
        rabi_splitting(cav, mol, ENV, (-0.5, 0.5))


def test_linewidth_difference_without_crossing():
    cav, mol = symmetric_system()
    with pytest.raises(NotBracketedError):
        equal_linewidth_detuning(cav, mol, ENV, (0.5, 3.0))


def test_intensity_ratio_of_detuned_symmetric_system():
    cav, mol = symmetric_system()
    # with the cavity above the exciton the upper branch is the more photonic one
    assert intensity_ratio(cav, mol, ENV, 2.0) > 1.1
    assert intensity_ratio(cav, mol, ENV, -2.0) < 1 / 1.1
    assert intensity_ratio(cav, mol, ENV, 0.0) == pytest.approx(1.0, abs=1e-9)


def test_vibrations_shift_the_splitting_detuning():
    cav = CavityParams(0.0, 2.0, 7.0)
    mol = MoleculeParams(0.0, 0.01, (VibrationalMode(1.0, 1.0, 0.9),))
    r, delta = rabi_splitting(cav, mol, ENV, (-2, 2))
    assert abs(delta) > 0.1
    assert r > 0
