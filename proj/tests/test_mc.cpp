#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>

#include "tkostat/mc.hpp"
#include "tkostat/quadform.hpp"

using namespace tkostat;

TEST_CASE("three-degree chi-square sample cumulants") {
    McConfig cfg;
    cfg.seed = 7;
    cfg.n_samples = 1000000;
    const QuadformSample s = sample_quadform(
        GaussianVectorModel(Eigen::VectorXd::Zero(3),
                            Eigen::MatrixXd::Identity(3, 3)),
        Eigen::MatrixXd::Identity(3, 3), cfg);
    CHECK(std::abs(s.stats.k1 - 3.0) < 5.0 * s.stats.se_k1);
    CHECK(std::abs(s.stats.k2 - 6.0) < 5.0 * s.stats.se_k2);
    CHECK(s.stats.n == cfg.n_samples);
}

TEST_CASE("single-eigenvalue histogram matches the closed form") {
    McConfig cfg;
    cfg.seed = 21;
    cfg.n_samples = 1000000;
    cfg.histogram_bins = 200;
    Eigen::VectorXd mu(1);
    mu << 0.0;
    const QuadformSample s = sample_quadform(
        GaussianVectorModel(mu, Eigen::MatrixXd::Identity(1, 1)),
        Eigen::MatrixXd::Identity(1, 1), cfg);
    // one-degree chi-square bin masses, exact through the cdf so the sqrt
    // singularity at zero does not bias the comparison
    auto cdf = [](double v) { return v <= 0.0 ? 0.0 : std::erf(std::sqrt(0.5 * v)); };
    double l1 = 0.0, covered = 0.0;
    for (std::size_t i = 0; i + 1 < s.histogram.edges.size(); ++i) {
        const double lo = s.histogram.edges[i], hi = s.histogram.edges[i + 1];
        const double mass = cdf(hi) - cdf(lo);
        l1 += std::abs(s.histogram.density[i] * (hi - lo) - mass);
        covered += mass;
    }
    CHECK(covered > 0.9);
    CHECK(l1 < 0.02);
}

TEST_CASE("two-degree envelope mode histogram matches the closed form") {
    // V = lam ((g1 + s)^2 + g2^2) with g ~ N(0, N0/2) is the two-degree
    // envelope mode
    const double lam = 0.7, s = 1.3, N0 = 0.5;
    Eigen::VectorXd mu(2);
    mu << s, 0.0;
    McConfig cfg;
    cfg.seed = 8;
    cfg.n_samples = 1000000;
    cfg.histogram_bins = 150;
    const QuadformSample smp = sample_quadform(
        GaussianVectorModel(mu, 0.5 * N0 * Eigen::MatrixXd::Identity(2, 2), N0),
        lam * Eigen::MatrixXd::Identity(2, 2), cfg);
    double l1 = 0.0;
    for (std::size_t i = 0; i + 1 < smp.histogram.edges.size(); ++i) {
        const double lo = smp.histogram.edges[i], hi = smp.histogram.edges[i + 1];
        const double f = pdf_rician_mode(0.5 * (lo + hi), lam, s, N0);
        l1 += std::abs(smp.histogram.density[i] - f) * (hi - lo);
    }
    CHECK(l1 < 0.02);
}

TEST_CASE("standard errors shrink with the sample count") {
    McConfig a;
    a.seed = 5;
    a.n_samples = 200000;
    a.n_partitions = 64;
    McConfig b = a;
    b.n_samples = 2 * a.n_samples;
    const GaussianVectorModel model(Eigen::VectorXd::Zero(3),
                                    Eigen::MatrixXd::Identity(3, 3));
    const Eigen::MatrixXd J = Eigen::MatrixXd::Identity(3, 3);
    const auto sa = sample_quadform(model, J, a);
    const auto sb = sample_quadform(model, J, b);
    const double ratio = sb.stats.se_k1 / sa.stats.se_k1;
    CHECK(ratio > 0.707 * 0.8);
    CHECK(ratio < 0.707 * 1.2);
}

TEST_CASE("results are reproducible across worker counts") {
    McConfig cfg;
    cfg.seed = 33;
    cfg.n_samples = 100000;
    cfg.histogram_bins = 50;
    const GaussianVectorModel model(Eigen::VectorXd::Ones(3),
                                    Eigen::MatrixXd::Identity(3, 3));
    const Eigen::MatrixXd J = Eigen::MatrixXd::Identity(3, 3);
    setenv("TKO_THREADS", "1", 1);
    const auto one = sample_quadform(model, J, cfg);
    setenv("TKO_THREADS", "4", 1);
    const auto four = sample_quadform(model, J, cfg);
    unsetenv("TKO_THREADS");
    CHECK(one.stats.k1 == four.stats.k1);
    CHECK(one.stats.k4 == four.stats.k4);
    CHECK(one.stats.se_k2 == four.stats.se_k2);
    REQUIRE(one.histogram.density.size() == four.histogram.density.size());
    for (std::size_t i = 0; i < one.histogram.density.size(); ++i)
        CHECK(one.histogram.density[i] == four.histogram.density[i]);
}

TEST_CASE("independent block ratio follows the F shape") {
    // V1 ~ chi2_2, V2 ~ chi2_4 independent; R = V1/V2 has density
    // 2 (1+r)^{-3}
    const int n = 6;
    Eigen::MatrixXd J1 = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd J2 = Eigen::MatrixXd::Zero(n, n);
    J1(0, 0) = J1(1, 1) = 1.0;
    for (int i = 2; i < 6; ++i) J2(i, i) = 1.0;
    McConfig cfg;
    cfg.seed = 12;
    cfg.n_samples = 1000000;
    cfg.histogram_bins = 150;
    const GaussianVectorModel model(Eigen::VectorXd::Zero(n),
                                    Eigen::MatrixXd::Identity(n, n));
    const RatioSample r =
        sample_ratio(model, J1, J2, {}, cfg, std::pair{0.0, 20.0});
    CHECK(r.acceptance_rate == doctest::Approx(1.0));
    const double mass_in_range = 1.0 - 1.0 / (21.0 * 21.0);
    double l1 = 0.0;
    for (std::size_t i = 0; i + 1 < r.histogram.edges.size(); ++i) {
        const double lo = r.histogram.edges[i], hi = r.histogram.edges[i + 1];
        const double mid = 0.5 * (lo + hi);
        const double f = 2.0 * std::pow(1.0 + mid, -3.0) / mass_in_range;
        l1 += std::abs(r.histogram.density[i] - f) * (hi - lo);
    }
    CHECK(l1 < 0.02);
}

TEST_CASE("median threshold accepts about half the draws") {
    const int n = 4;
    Eigen::MatrixXd J1 = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd J2 = Eigen::MatrixXd::Zero(n, n);
    J1(0, 0) = J1(1, 1) = 1.0;
    J2(2, 2) = J2(3, 3) = 1.0;
    McConfig cfg;
    cfg.seed = 4;
    cfg.n_samples = 400000;
    const GaussianVectorModel model(Eigen::VectorXd::Zero(n),
                                    Eigen::MatrixXd::Identity(n, n));
    const double median_chi2_2 = 2.0 * std::log(2.0);
    const RatioSample r = sample_ratio(model, J1, J2, median_chi2_2, cfg);
    CHECK(std::abs(r.acceptance_rate - 0.5) < 3.0 * r.acceptance_se + 1e-4);
}

TEST_CASE("identical numerator and denominator give unit ratios") {
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(2, 2);
    McConfig cfg;
    cfg.seed = 3;
    cfg.n_samples = 10000;
    cfg.histogram_bins = 10;
    const GaussianVectorModel model(Eigen::VectorXd::Zero(2),
                                    Eigen::MatrixXd::Identity(2, 2));
    const RatioSample r =
        sample_ratio(model, J, J, {}, cfg, std::pair{0.5, 1.5});
    CHECK(r.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.variance == doctest::Approx(0.0));
    CHECK(r.histogram.out_of_range == 0);
}

TEST_CASE("noise paths reproduce the covariance kernel") {
    const CovarianceKernel cov{0.5, 1.0};
    const double fs = 4.0;
    const std::size_t n_paths = 100;
    std::vector<double> lag0, lag1, far;
    bool fallback = false;
    for (std::size_t k = 0; k < n_paths; ++k) {
        McConfig cfg;
        cfg.seed = 1000 + k;
        bool fb = false;
        const SampledSignal path = sample_noise_path(cov, 200.0, fs, cfg, &fb);
        fallback = fallback || fb;
        const auto& x = path.samples;
        const std::size_t lag = static_cast<std::size_t>(fs); // dt = 1
        const std::size_t farlag = static_cast<std::size_t>(20.0 * fs);
        double c0 = 0.0, c1 = 0.0, cf = 0.0;
        const std::size_t m = x.size() - farlag;
        for (std::size_t i = 0; i < m; ++i) {
            c0 += x[i] * x[i];
            c1 += x[i] * x[i + lag];
            cf += x[i] * x[i + farlag];
        }
        lag0.push_back(c0 / static_cast<double>(m));
        lag1.push_back(c1 / static_cast<double>(m));
        far.push_back(cf / static_cast<double>(m));
    }
    auto mean_se = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s2 = 0.0;
        for (double x : v) s2 += (x - m) * (x - m);
        s2 /= static_cast<double>(v.size() - 1);
        return std::pair{m, std::sqrt(s2 / static_cast<double>(v.size()))};
    };
    const auto [m0, se0] = mean_se(lag0);
    const auto [m1, se1] = mean_se(lag1);
    const auto [mf, sef] = mean_se(far);
    CHECK(std::abs(m0 - 1.0) < 5.0 * se0);
    CHECK(std::abs(m1 - std::exp(-0.5)) < 5.0 * se1);
    CHECK(std::abs(mf) < 5.0 * sef);
    INFO("fallback used: ", fallback);
}

TEST_CASE("noise path generation is deterministic and guarded") {
    const CovarianceKernel cov{0.5, 1.0};
    McConfig cfg;
    cfg.seed = 42;
    const SampledSignal a = sample_noise_path(cov, 50.0, 8.0, cfg);
    const SampledSignal b = sample_noise_path(cov, 50.0, 8.0, cfg);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        CHECK(a.samples[i] == b.samples[i]);
    CHECK_THROWS_AS(sample_noise_path(cov, 2e6, 100.0, cfg),
                    std::invalid_argument);
}

TEST_CASE("histogram bookkeeping") {
    const std::vector<double> v{0.1, 0.4, 0.6, 0.9, 1.4, -0.2};
    const Histogram h = make_histogram(v, 2, std::pair{0.0, 1.0});
    CHECK(h.edges.size() == 3);
    CHECK(h.out_of_range == 2);
    CHECK(h.total_count == 6);
    // unit area over the range
    double area = 0.0;
    for (std::size_t i = 0; i < h.density.size(); ++i)
        area += h.density[i] * (h.edges[i + 1] - h.edges[i]);
    CHECK(area == doctest::Approx(1.0));
    CHECK_THROWS_AS(make_histogram({}, 4), std::invalid_argument);
}
