#ifndef TKOSTAT_MC_HPP
#define TKOSTAT_MC_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "tkostat/gaussian_model.hpp"
#include "tkostat/quadform.hpp"

namespace tkostat {

/// Seeded Monte Carlo configuration. Identical (seed, n_partitions) give
/// bit-identical results regardless of how partitions are scheduled.
struct McConfig {
    std::uint64_t seed = 0;
    std::size_t n_samples = 100000;
    std::size_t n_partitions = 16;
    std::size_t histogram_bins = 0; // 0 = Freedman-Diaconis on a pilot
};

struct Histogram {
    std::vector<double> edges; // bins + 1 entries
    std::vector<double> density; // normalized to unit area over the range
    std::size_t total_count = 0;
    std::size_t out_of_range = 0;
};

struct SampleStats {
    // k-statistics (unbiased cumulant estimators) with jackknife-over-
    // partitions standard errors
    double k1, k2, k3, k4;
    double se_k1, se_k2, se_k3, se_k4;
    std::size_t n;
};

struct QuadformSample {
    SampleStats stats;
    Histogram histogram;
};

/// Draws X ~ N(mu, M) and evaluates X'JX.
QuadformSample sample_quadform(const GaussianVectorModel& model,
                               const Eigen::MatrixXd& J, const McConfig& cfg);

struct RatioSample {
    Histogram histogram;
    double acceptance_rate;
    double acceptance_se; // binomial standard error
    std::size_t accepted;
    double mean;      // conditioned empirical mean of the ratio
    double variance;  // conditioned empirical variance
};

/// Joint draws of (V1, V2) on one Gaussian vector; the ratio V1/V2 is
/// recorded when V2 exceeds the threshold (0 when none is given).
RatioSample sample_ratio(const GaussianVectorModel& model,
                         const Eigen::MatrixXd& J_num,
                         const Eigen::MatrixXd& J_den,
                         std::optional<double> threshold, const McConfig& cfg,
                         std::optional<std::pair<double, double>> range = {},
                         bool square_numerator = false);

/// Stationary Gaussian path with covariance R(dt), generated by circulant
/// embedding (falls back to dense Cholesky when the embedding is not
/// nonnegative definite; `used_fallback` reports that).
SampledSignal sample_noise_path(const CovarianceKernel& cov, double duration,
                                double fs, const McConfig& cfg,
                                bool* used_fallback = nullptr);

/// Histogram utility shared by the MC routines and the CLI.
Histogram make_histogram(const std::vector<double>& samples, std::size_t bins,
                         std::optional<std::pair<double, double>> range = {});

} // namespace tkostat

#endif
