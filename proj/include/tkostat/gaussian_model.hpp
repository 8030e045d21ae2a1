#ifndef TKOSTAT_GAUSSIAN_MODEL_HPP
#define TKOSTAT_GAUSSIAN_MODEL_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "tkostat/kernels.hpp"

namespace tkostat {

/// Gaussian covariance kernel R(t) = scale * exp(-c t^2).
struct CovarianceKernel {
    double c = 0.5;     // decay parameter
    double scale = 1.0; // noise power at lag 0

    double operator()(double t) const;
    /// Correlation time, reported as 1/sqrt(c).
    double correlation_time() const;
};

/// Sample-vector model X ~ N(mu, M) for the signal-plus-noise input at the
/// kernel taps. M is the unnormalized covariance (entries in noise-power
/// units); N0 is the noise power scale used by the diagonal chfs.
struct GaussianVectorModel {
    Eigen::VectorXd mu;
    Eigen::MatrixXd M;
    double N0 = 1.0;

    GaussianVectorModel(Eigen::VectorXd mu_, Eigen::MatrixXd M_, double N0_ = 1.0);
    int dim() const { return static_cast<int>(mu.size()); }
};

/// The (lambda, s) representation of a quadratic form X'JX under a Gaussian
/// model: lambda_j are the eigenvalues of (M/N0)J and s = P'L^{-1}mu with
/// M/N0 = LL'. With this normalization the diagonal chf carries N0
/// explicitly and X'JX ~ sum_j lambda_j N0 (U_j + s_j/sqrt(N0))^2.
struct SpectralDecomposition {
    Eigen::VectorXd lambdas;
    Eigen::VectorXd s;
    double N0 = 1.0;
};

/// M[i][j] = scale * exp(-c (t_i - t_j)^2) at the given tap times.
Eigen::MatrixXd build_covariance(const CovarianceKernel& kernel,
                                 const std::vector<double>& tap_times);

SpectralDecomposition decompose(const GaussianVectorModel& model,
                                const Eigen::MatrixXd& J);

struct MeanVariance {
    double mean;
    double variance;
};

/// Covariance lags entering the first two moments of Psi_p^q; m0 doubles
/// as the noise power N0.
struct CovarianceLags {
    double m0;   // lag 0 (= N0)
    double m2p;  // lag 2p
    double m2q;  // lag 2q
    double mqmp; // lag q-p
    double mqpp; // lag q+p
};

/// Mean and variance of Psi_p^q for signal taps (s1, s2, s3, s4) =
/// (x[n-p], x[n+p], x[n-q], x[n+q]) under stationary Gaussian noise with
/// the given lags. For p = 0 pass s1 = s2 = x[n]. The central noise-only
/// variance is routed through the cumulant formula on the assembled model.
MeanVariance tko_mean_variance(int p, int q, double s1, double s2, double s3,
                               double s4, const CovarianceLags& lags);

/// Deterministic signal sampled at the kernel tap times around center_time.
Eigen::VectorXd signal_tap_vector(const std::function<double(double)>& signal,
                                  double center_time,
                                  const OperatorKernel& kernel);

/// Model for the ESA ratio Psi[x_dot]/Psi[x]: a joint Gaussian vector
/// stacking the x taps and the x_dot taps of one kernel, with
/// cross-covariances from the derivatives of the Gaussian covariance
/// kernel. Returns the model plus the embedded numerator (on x_dot) and
/// denominator (on x) stencils.
struct JointSignalDerivativeModel {
    GaussianVectorModel model;
    Eigen::MatrixXd J_num; // Psi applied to the derivative block
    Eigen::MatrixXd J_den; // Psi applied to the signal block
};

JointSignalDerivativeModel build_joint_signal_derivative_model(
    const CovarianceKernel& cov, const std::function<double(double)>& signal,
    const std::function<double(double)>& signal_derivative, double center_time,
    const OperatorKernel& kernel);

} // namespace tkostat

#endif
