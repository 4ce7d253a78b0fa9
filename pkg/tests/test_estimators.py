"""Peak finding, damped least-squares fits, and figure-of-merit chains."""

import numpy as np
import pytest

from magcav.core import DEFAULT_GYRO, DomainError
from magcav.estimators import (
    FitReport,
    UnidentifiableModelError,
    cooperativity,
    coupling_from_filling,
    coupling_per_spin,
    coupling_ratio,
    extract_ridge,
    find_peaks,
    fit_lorentzian,
    fit_three_mode,
    fit_two_mode,
    photon_number,
    predict_optimized,
    spin_count,
    susceptibility,
)
from magcav.modes import rwa_three_mode, rwa_two_mode
from magcav.presets import bright_crossing_model, dark_doublet_model
from magcav.spectra import PortCouplings, density_map, lorentzian, s21

PORTS = PortCouplings()


# ---------------------------------------------------------------------------
# peaks


def test_find_peaks_single_lorentzian():
    f0, w = 20.9e9, 27e6
    f = np.linspace(f0 - 5 * w, f0 + 5 * w, 271)  # ~10 samples per FWHM
    y = lorentzian(f, 1.0, f0, w)
    peaks = find_peaks(f, y, 0.1)
    assert len(peaks) == 1
    grid = f[1] - f[0]
    assert peaks[0][0] == pytest.approx(f0, abs=grid / 10)
    assert peaks[0][1] == pytest.approx(1.0, rel=1e-3)


def test_find_peaks_synthetic_doublet():
    model = bright_crossing_model()
    B_cross = 20.9e9 / DEFAULT_GYRO
    f = np.linspace(18.9e9, 22.9e9, 6000)
    y = np.abs(s21(f, model, PORTS, B=B_cross))
    peaks = find_peaks(f, y, 0.3 * y.max())
    assert len(peaks) == 2
    split = peaks[1][0] - peaks[0][0]
    assert split == pytest.approx(2.05e9, rel=1e-2)


def test_find_peaks_flat_and_monotone():
    f = np.linspace(0.0, 1.0, 64)
    assert find_peaks(f, np.zeros(64), 0.0) == []
    assert find_peaks(f, f.copy(), 0.0) == []


def test_find_peaks_prominence_filter():
    f = np.linspace(0.0, 10.0, 1001)
    y = lorentzian(f, 1.0, 3.0, 0.5) + lorentzian(f, 0.05, 7.0, 0.5)
    assert len(find_peaks(f, y, 0.2)) == 1
    assert len(find_peaks(f, y, 0.01)) == 2


def test_find_peaks_validation():
    with pytest.raises(DomainError):
        find_peaks([0.0, 1.0], [0.0, 1.0], 0.0)
    with pytest.raises(DomainError):
        find_peaks([0.0, 2.0, 1.0], [0.0, 1.0, 0.0], 0.0)


# ---------------------------------------------------------------------------
# Lorentzian fit


def test_fit_lorentzian_exact_roundtrip():
    f = np.linspace(20.8e9, 21.0e9, 401)
    y = lorentzian(f, 1.0, 20.9e9, 27e6, 0.0)
    rep = fit_lorentzian(f, y)
    assert rep.converged
    assert rep["amplitude"] == pytest.approx(1.0, rel=1e-6)
    assert rep["f0"] == pytest.approx(20.9e9, rel=1e-6)
    assert rep["fwhm"] == pytest.approx(27e6, rel=1e-6)
    assert rep["baseline"] == pytest.approx(0.0, abs=1e-6)
    assert rep.residual_rms < 1e-8


def test_fit_lorentzian_noisy_monte_carlo():
    f = np.linspace(20.8e9, 21.0e9, 401)
    clean = lorentzian(f, 1.0, 20.9e9, 27e6, 0.0)
    rng = np.random.Generator(np.random.Philox(17))
    for _ in range(100):
        rep = fit_lorentzian(f, clean + rng.normal(0.0, 1e-3, f.shape))
        assert rep.converged
        assert rep["fwhm"] == pytest.approx(27e6, rel=2e-2)
        assert rep.stderr("fwhm") > 0.0


def test_fit_lorentzian_flat_trace():
    f = np.linspace(0.0, 1.0, 11)
    rep = fit_lorentzian(f, np.zeros(11))
    assert not rep.converged
    assert "flat-trace" in rep.flags
    assert rep["amplitude"] == 0.0


def test_fit_lorentzian_explicit_initial():
    f = np.linspace(20.8e9, 21.0e9, 401)
    y = lorentzian(f, 0.7, 20.88e9, 40e6, 0.1)
    rep = fit_lorentzian(f, y, initial=(0.8, 20.885e9, 30e6, 0.05))
    assert rep.converged
    assert rep["f0"] == pytest.approx(20.88e9, rel=1e-6)
    assert rep["fwhm"] == pytest.approx(40e6, rel=1e-6)


def test_fit_lorentzian_validation():
    with pytest.raises(DomainError):
        fit_lorentzian([1.0, 2.0, 3.0], [0.0, 1.0, 0.0])


# ---------------------------------------------------------------------------
# crossing fits


def synthetic_two_mode_ridge(g_over_pi, fc=20.9e9, gyro=DEFAULT_GYRO, n=50):
    B = np.linspace(0.60, 0.89, n)
    Bs, fs = [], []
    for b in B:
        eig = rwa_two_mode(fc, gyro * b, g_over_pi)
        Bs += [b, b]
        fs += list(eig.frequencies)
    return np.array(Bs), np.array(fs)


def test_fit_two_mode_exact_roundtrip():
    B, f = synthetic_two_mode_ridge(2.05e9)
    rep = fit_two_mode(B, f)
    assert rep.converged
    assert rep["g_over_pi"] == pytest.approx(2.05e9, rel=1e-3)
    assert rep["f_c"] == pytest.approx(20.9e9, rel=1e-6)
    assert rep["gyro"] == pytest.approx(DEFAULT_GYRO, rel=1e-6)
    assert rep["offset"] == pytest.approx(0.0, abs=1e3)


def test_fit_two_mode_null_coupling():
    B, f = synthetic_two_mode_ridge(0.0)
    rep = fit_two_mode(B, f)
    assert rep["g_over_pi"] < 1e-3 * rep["f_c"]


def test_fit_two_mode_jittered():
    B, f = synthetic_two_mode_ridge(2.05e9)
    rng = np.random.Generator(np.random.Philox(23))
    f_j = f * (1.0 + 0.01 * rng.standard_normal(f.shape))
    rep = fit_two_mode(B, f_j)
    assert rep["g_over_pi"] == pytest.approx(2.05e9, rel=5e-2)
    assert rep.stderr("g_over_pi") > 0.0


def test_fit_two_mode_one_branch_raises():
    B = np.linspace(0.60, 0.89, 50)
    upper = np.array(
        [rwa_two_mode(20.9e9, DEFAULT_GYRO * b, 2.05e9).frequencies[1] for b in B]
    )
    with pytest.raises(UnidentifiableModelError):
        fit_two_mode(B, upper)


def test_fit_two_mode_scale_equivariance():
    B, f = synthetic_two_mode_ridge(2.05e9)
    lam = 2.5
    rep1 = fit_two_mode(B, f)
    rep2 = fit_two_mode(lam * B, lam * f)
    assert rep2["f_c"] == pytest.approx(lam * rep1["f_c"], rel=1e-6)
    assert rep2["g_over_pi"] == pytest.approx(lam * rep1["g_over_pi"], rel=1e-4)
    assert rep2["offset"] == pytest.approx(lam * rep1["offset"], abs=lam * 1e4)
    assert rep2["gyro"] == pytest.approx(rep1["gyro"], rel=1e-6)


def synthetic_three_mode_ridge(gc, gRL, fc=13.9e9, gyro=DEFAULT_GYRO, n=60):
    offset = fc - 0.471 * gyro
    B = np.linspace(0.460, 0.482, n)
    Bs, fs = [], []
    for b in B:
        fm = gyro * b + offset
        eig = rwa_three_mode(fc, fm, fm, gc, gRL)
        Bs += [b] * 3
        fs += list(eig.frequencies)
    return np.array(Bs), np.array(fs)


def test_fit_three_mode_exact_roundtrip():
    B, f = synthetic_three_mode_ridge(143e6, 12.5e6)
    rep = fit_three_mode(B, f)
    assert rep.converged
    assert not rep.flags
    assert rep["g_c_over_pi"] == pytest.approx(143e6, rel=1e-2)
    assert rep["g_rl_over_pi"] == pytest.approx(12.5e6, rel=1e-2)
    assert rep["f_c"] == pytest.approx(13.9e9, rel=1e-6)


def test_fit_three_mode_asymptote_gap():
    B, f = synthetic_three_mode_ridge(143e6, 12.5e6)
    rep = fit_three_mode(B, f)
    # far detuned, the fitted doublet branches split by g_rl
    b_far = 10.0
    fm = rep["gyro"] * b_far + rep["offset_r"]
    eig = rwa_three_mode(rep["f_c"], fm, fm, rep["g_c_over_pi"], rep["g_rl_over_pi"])
    doublet = [x for x in eig.frequencies if abs(x - fm) < 1e9]
    gap = max(doublet) - min(doublet)
    assert gap == pytest.approx(rep["g_rl_over_pi"], rel=5e-2)


def test_fit_three_mode_fallback_without_central_branch():
    B, f = synthetic_two_mode_ridge(143e6, fc=13.9e9)
    rep = fit_three_mode(B, f)
    assert "two-mode-fallback" in rep.flags
    assert rep["g_c_over_pi"] == pytest.approx(143e6, rel=1e-2)
    assert rep["g_rl_over_pi"] == 0.0


def test_fit_three_mode_map_pipeline():
    model = dark_doublet_model()
    B = np.linspace(0.450, 0.492, 220)
    f = np.linspace(13.65e9, 14.15e9, 1500)
    ridge_B, ridge_f = extract_ridge(density_map(model, B, f, PORTS), 0.02)
    assert ridge_B.size >= 10
    rep = fit_three_mode(ridge_B, ridge_f)
    assert rep.converged
    assert rep["g_c_over_pi"] == pytest.approx(143e6, rel=2e-2)
    assert rep["g_rl_over_pi"] == pytest.approx(12.5e6, rel=2e-2)


def test_extract_ridge_basics():
    model = bright_crossing_model()
    B = np.linspace(0.60, 0.89, 40)
    f = np.linspace(18.9e9, 22.9e9, 400)
    dmap = density_map(model, B, f, PORTS)
    ridge_B, ridge_f = extract_ridge(dmap, 0.25)
    assert ridge_B.size >= 40
    assert set(np.unique(ridge_B)) <= set(B.tolist())
    assert np.all((ridge_f >= f[0]) & (ridge_f <= f[-1]))
    with pytest.raises(DomainError):
        extract_ridge(dmap, 0.0)
    with pytest.raises(DomainError):
        extract_ridge(dmap, 1.5)


# ---------------------------------------------------------------------------
# figures of merit


def test_cooperativity_values():
    assert cooperativity(2.05e9, 27e6, 1.1e6) == pytest.approx(141498.3164983165, rel=1e-12)
    assert cooperativity(2.05e9, 27e6, 1.1e6) == pytest.approx(1.3e5, rel=0.15)
    assert cooperativity(143e6, 33e6, 1.2e6) == pytest.approx(516.3888888888889, rel=1e-12)
    assert cooperativity(0.0, 27e6, 1.1e6) == 0.0
    lam = 3.7
    assert cooperativity(lam * 2.05e9, lam * 27e6, lam * 1.1e6) == pytest.approx(
        cooperativity(2.05e9, 27e6, 1.1e6), rel=1e-12
    )
    with pytest.raises(DomainError):
        cooperativity(1e9, 0.0, 1e6)


def test_spin_count_values():
    N = spin_count(2.1e28, 0.8e-3)
    assert N == pytest.approx(5.629734035232909e18, rel=1e-12)
    assert N == pytest.approx(5.63e18, rel=1e-3)
    assert spin_count(2.1e28, 0.0) == 0.0
    assert spin_count(2.1e28, 1.6e-3) == pytest.approx(8 * N, rel=1e-14)
    with pytest.raises(DomainError):
        spin_count(0.0, 1e-3)


def test_coupling_per_spin_values():
    N = spin_count(2.1e28, 0.8e-3)
    per = coupling_per_spin(2.05e9, N)
    assert per == pytest.approx(0.43199619976772113, rel=1e-12)
    assert per == pytest.approx(0.3, rel=1.0)  # convention gap, factor < 2
    assert coupling_per_spin(2.05e9, 1.0) == pytest.approx(1.025e9, rel=1e-14)
    ratio = coupling_per_spin(5.2e9, N) / per
    assert ratio == pytest.approx(2.5365853658536586, rel=1e-12)
    assert ratio == pytest.approx(2.57, rel=2e-2)
    with pytest.raises(DomainError):
        coupling_per_spin(1e9, 0.5)


def test_coupling_from_filling_chain():
    chi = susceptibility(2.05e9, 20.9e9, 0.03)
    assert chi == pytest.approx(0.3206962600062575, rel=1e-12)
    assert coupling_from_filling(20.9e9, chi, 0.03) == pytest.approx(2.05e9, rel=1e-12)
    assert coupling_from_filling(20.9e9, chi, 0.0) == 0.0
    g_opt = coupling_from_filling(20.9e9, chi, 0.2)
    assert g_opt == pytest.approx(5.29e9, rel=1e-3)
    assert g_opt == pytest.approx(5.2e9, rel=2e-2)
    with pytest.raises(DomainError):
        susceptibility(2.05e9, 20.9e9, 0.0)
    with pytest.raises(DomainError):
        coupling_from_filling(20.9e9, -0.1, 0.03)


def test_coupling_ratio_values():
    modeled = coupling_ratio(20.6e9, 13.75e9, 3e-2, 3e-4)
    assert modeled == pytest.approx(14.981818181818182, rel=1e-12)
    assert modeled == pytest.approx(15.0, rel=5e-3)
    measured = 2.05e9 / 143e6
    assert abs(modeled - measured) / measured < 5e-2
    assert coupling_ratio(5e9, 5e9, 0.1, 0.1) == 1.0
    inv = coupling_ratio(13.75e9, 20.6e9, 3e-4, 3e-2)
    assert modeled * inv == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(DomainError):
        coupling_ratio(0.0, 13.75e9, 3e-2, 3e-4)


def test_photon_number_values():
    n = photon_number(1e-12, 20.9e9, 714.0, 0.01, 0.01)
    assert n == pytest.approx(15.396767849827278, rel=1e-12)
    assert 15.0 / 2 < n < 15.0 * 2
    assert photon_number(0.0, 20.9e9, 714.0, 0.01, 0.01) == 0.0
    doubled = photon_number(2e-12, 20.9e9, 714.0, 0.01, 0.01)
    assert doubled == pytest.approx(2 * n, rel=1e-14)
    with pytest.raises(DomainError):
        photon_number(-1e-12, 20.9e9, 714.0, 0.01, 0.01)
    with pytest.raises(DomainError):
        photon_number(1e-12, 20.9e9, 0.0, 0.01, 0.01)


PAPER_CURRENT = dict(f_b=20.9e9, g_over_pi=2.05e9, kappa_b=27e6, gamma_m=1.1e6, xi_b=0.03)


def test_predict_optimized_chain():
    rep = predict_optimized(PAPER_CURRENT, dict(xi_b=0.2))
    assert rep["g_opt_over_pi"] == pytest.approx(5293077239.816803, rel=1e-12)
    assert rep["g_opt_over_pi"] == pytest.approx(5.2e9, rel=2e-2)
    assert rep["cooperativity_opt"] == pytest.approx(943322.1099887766, rel=1e-12)
    assert rep["cooperativity_opt"] == pytest.approx(9.1e5, rel=0.1)
    rep12 = predict_optimized(PAPER_CURRENT, dict(xi_b=0.2, linewidth_factor=12.0))
    assert rep12["cooperativity_opt"] == pytest.approx(11319865.319865318, rel=1e-12)
    assert rep12["cooperativity_opt"] == pytest.approx(1.1e7, rel=0.1)
    assert rep12["kappa_opt"] == pytest.approx(27e6 / 12, rel=1e-14)


def test_predict_optimized_identity_bit_exact():
    rep = predict_optimized(PAPER_CURRENT, dict(xi_b=0.03))
    assert rep["g_opt_over_pi"] == PAPER_CURRENT["g_over_pi"]
    assert rep["kappa_opt"] == PAPER_CURRENT["kappa_b"]
    assert rep["cooperativity_opt"] == rep["cooperativity_current"]
    assert rep["per_spin_scale"] == 1.0


def test_predict_optimized_validation():
    with pytest.raises(DomainError):
        predict_optimized(dict(PAPER_CURRENT, xi_b=0.0), dict(xi_b=0.2))
    with pytest.raises(DomainError):
        predict_optimized(PAPER_CURRENT, dict(xi_b=0.2, linewidth_factor=0.0))


def test_fit_report_serialization_stable():
    B, f = synthetic_two_mode_ridge(2.05e9)
    s1 = fit_two_mode(B, f).serialize()
    s2 = fit_two_mode(B, f).serialize()
    assert s1 == s2
    lines = s1.splitlines()
    assert lines[0].startswith("converged = ")
    assert any(line.startswith("param.g_over_pi = ") for line in lines)
    assert any(line.startswith("stderr.gyro = ") for line in lines)
    assert lines[-1].startswith("flags = ")
    rep = FitReport({"a": (1.0, 0.1)}, 0.0, 3, True, ("x", "y"))
    assert rep.serialize().splitlines()[-1] == "flags = x;y"
