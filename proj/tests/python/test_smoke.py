import math

import numpy as np
import pytest

import tkostat as tk


def test_kernel_matrix_shapes():
    k3 = tk.OperatorKernel(0, 1)
    assert k3.dim == 3
    assert np.asarray(k3.J).shape == (3, 3)
    k4 = tk.OperatorKernel(2, 4, 0.5)
    assert k4.dim == 4
    assert k4.tap_times() == [-2.0, -1.0, 1.0, 2.0]
    with pytest.raises(Exception):
        tk.OperatorKernel(3, 2)


def test_sliding_operator_on_a_tone():
    w = 0.4
    sig = tk.SampledSignal([math.cos(w * i) for i in range(200)], 1.0)
    psi = tk.apply_tko(sig, tk.OperatorKernel(0, 1))
    assert len(psi) == 198
    # a pure tone gives the constant sin^2(w)
    assert np.allclose(psi, math.sin(w) ** 2, atol=1e-12)
    assert tk.freq_response(tk.OperatorKernel(0, 1), w) == pytest.approx(
        1.0 - math.cos(2 * w)
    )


def test_cumulants_match_sampling():
    kernel = tk.OperatorKernel(0, 1)
    cov = tk.CovarianceKernel(0.5, 0.01)
    mu = tk.signal_tap_vector(lambda t: math.cos(0.4 * t), 0.0, kernel)
    model = tk.GaussianVectorModel(mu, tk.build_covariance(cov, kernel.tap_times()), 0.01)
    cum = tk.cumulants(model.mu, model.M, kernel.J)
    cfg = tk.McConfig()
    cfg.seed = 1
    cfg.n_samples = 200000
    mc = tk.sample_quadform(model, kernel.J, cfg)
    assert abs(cum.kappa_s(1) - mc.stats.k1) < 5 * mc.stats.se_k1
    assert abs(cum.kappa_s(2) - mc.stats.k2) < 5 * mc.stats.se_k2


def test_distribution_inversion():
    kernel = tk.OperatorKernel(0, 1)
    model = tk.GaussianVectorModel(
        np.zeros(3), np.eye(3), 1.0
    )
    chf = tk.ChfEvaluator.from_matrix(model.mu, model.M, kernel.J)
    vals = [tk.cdf_gil_pelaez(v, chf) for v in (-2.0, 0.0, 1.0, 4.0)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    grid = list(np.linspace(-6, 10, 161))
    # few-mode chfs decay slowly, so the certifiable tolerance is modest
    dens = tk.pdf_numeric(grid, chf, tol=1e-5)
    assert dens.meta.normalization_error < 0.05
    assert all(f >= 0 for f in dens.pdf)


def test_ratio_density_routes():
    J1 = np.diag([1.0, 1.0, 0.0, 0.0])
    J2 = np.diag([0.0, 0.0, 1.0, 1.0])
    model = tk.GaussianVectorModel(np.zeros(4), np.eye(4), 1.0)
    spec = tk.RatioSpec(J1, J2, model)
    # independent two-degree blocks: density 1/(1+r)^2
    assert tk.ratio_pdf_geary_point(1.0, spec) == pytest.approx(0.25, abs=1e-6)

    spec_thr = tk.RatioSpec(J1, J2, model, 0.1)
    cfg = tk.McConfig()
    cfg.seed = 2
    cfg.n_samples = 100000
    grid = list(np.linspace(0.05, 3.0, 40))
    dens = tk.ratio_pdf_conditioned(grid, spec_thr, cfg)
    assert dens.meta.mc_se > 0
    # rerun is bit-identical
    again = tk.ratio_pdf_conditioned(grid, spec_thr, cfg)
    assert dens.pdf == again.pdf


def test_two_tone_analysis():
    sig = tk.TwoToneSignal(0.6, 2.3)
    assert tk.evaluate(sig, 0.0).x == pytest.approx(1.6)
    ex = tk.find_extrema(sig, 0.0, 5.0)
    assert len(ex) > 5
    flagged = [tk.is_negative_at_extremum(sig, e.t) for e in ex]
    assert any(flagged)
    stats = tk.negative_excursion_stats(sig, 0.0, 10.0, 1e-3)
    assert stats.zero_crossing_rate > 0


def test_esa_demodulation():
    w0 = 0.1
    sig = tk.SampledSignal([math.cos(w0 * i) for i in range(4000)], 1.0)
    est = tk.esa_demodulate(sig, tk.OperatorKernel(0, 1))
    valid = [w for w, ok in zip(est.omega_sq, est.valid_mask) if ok]
    assert np.median(valid) == pytest.approx(w0 * w0, rel=1e-3)
    smoothed = tk.binomial_filter([1.0, -0.5, 1.0, 1.0, 1.0])
    assert len(smoothed) == 3
