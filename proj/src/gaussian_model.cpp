#include "tkostat/gaussian_model.hpp"

#include <cmath>
#include <stdexcept>

#include "tkostat/quadform.hpp"

namespace tkostat {

double CovarianceKernel::operator()(double t) const {
    return scale * std::exp(-c * t * t);
}

double CovarianceKernel::correlation_time() const { return 1.0 / std::sqrt(c); }

GaussianVectorModel::GaussianVectorModel(Eigen::VectorXd mu_, Eigen::MatrixXd M_,
                                         double N0_)
    : mu(std::move(mu_)), M(std::move(M_)), N0(N0_) {
    if (M.rows() != M.cols() || M.rows() != mu.size())
        throw std::invalid_argument("mu/M dimension mismatch");
    if (!M.isApprox(M.transpose(), 1e-12))
        throw std::invalid_argument("covariance matrix must be symmetric");
    if (N0 <= 0.0) throw std::invalid_argument("N0 must be positive");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (es.eigenvalues().minCoeff() <= 1e-12 * lmax)
        throw std::invalid_argument("covariance matrix not positive definite");
}

Eigen::MatrixXd build_covariance(const CovarianceKernel& kernel,
                                 const std::vector<double>& tap_times) {
    const int n = static_cast<int>(tap_times.size());
    for (int i = 1; i < n; ++i)
        if (!(tap_times[i] > tap_times[i - 1]))
            throw std::invalid_argument("tap times must be strictly increasing");
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = kernel(tap_times[i] - tap_times[j]);
    return M;
}

SpectralDecomposition decompose(const GaussianVectorModel& model,
                                const Eigen::MatrixXd& J) {
    if (J.rows() != J.cols() || J.rows() != model.dim())
        throw std::invalid_argument("kernel matrix dimension mismatch");
    if (!J.isApprox(J.transpose(), 1e-12))
        throw std::invalid_argument("kernel matrix must be symmetric");
    const Eigen::MatrixXd Mn = model.M / model.N0;
    Eigen::LLT<Eigen::MatrixXd> llt(Mn);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("covariance matrix not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::MatrixXd G = L.transpose() * J * L; // symmetric, same spectrum as Mn*J
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    SpectralDecomposition d;
    d.lambdas = es.eigenvalues();
    // eigenvalues below 1e-12 of the largest magnitude are exact zeros
    const double lmax = d.lambdas.cwiseAbs().maxCoeff();
    for (int j = 0; j < d.lambdas.size(); ++j)
        if (std::abs(d.lambdas[j]) < 1e-12 * lmax) d.lambdas[j] = 0.0;
    d.s = es.eigenvectors().transpose() *
          L.triangularView<Eigen::Lower>().solve(model.mu);
    d.N0 = model.N0;
    return d;
}

MeanVariance tko_mean_variance(int p, int q, double s1, double s2, double s3,
                               double s4, const CovarianceLags& lags) {
    const double mean = (s1 * s2 - s3 * s4) + (lags.m2p - lags.m2q);
    const double N0 = lags.m0;
    const double sig_noise =
        N0 * (s1 * s1 + s2 * s2 + s3 * s3 + s4 * s4) +
        2.0 * (s1 * s2 * lags.m2p + s3 * s4 * lags.m2q -
               (s1 * s3 + s2 * s4) * lags.mqmp - (s1 * s4 + s2 * s3) * lags.mqpp);
    // central noise x noise part from the cumulant identity at mu = 0
    Eigen::MatrixXd M, J;
    if (p == 0) {
        // taps (x[n-q], x[n], x[n+q])
        M.resize(3, 3);
        M.setZero();
        M.diagonal().setConstant(N0);
        M(0, 1) = M(1, 0) = lags.mqpp; // lag q
        M(1, 2) = M(2, 1) = lags.mqpp;
        M(0, 2) = M(2, 0) = lags.m2q;
        J = kernel_matrix(0, q);
    } else {
        // taps (x[n-q], x[n-p], x[n+p], x[n+q])
        M.resize(4, 4);
        M.setZero();
        M.diagonal().setConstant(N0);
        M(0, 1) = M(1, 0) = lags.mqmp;
        M(0, 2) = M(2, 0) = lags.mqpp;
        M(0, 3) = M(3, 0) = lags.m2q;
        M(1, 2) = M(2, 1) = lags.m2p;
        M(1, 3) = M(3, 1) = lags.mqpp;
        M(2, 3) = M(3, 2) = lags.mqmp;
        J = kernel_matrix(p, q);
    }
    const Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(M.rows());
    const CumulantSet central = cumulants(mu0, M, J, 2);
    return {mean, central.kappa[1] + sig_noise};
}

Eigen::VectorXd signal_tap_vector(const std::function<double(double)>& signal,
                                  double center_time,
                                  const OperatorKernel& kernel) {
    const auto times = kernel.tap_times();
    Eigen::VectorXd mu(static_cast<int>(times.size()));
    for (int i = 0; i < mu.size(); ++i) mu[i] = signal(center_time + times[i]);
    return mu;
}

JointSignalDerivativeModel build_joint_signal_derivative_model(
    const CovarianceKernel& cov, const std::function<double(double)>& signal,
    const std::function<double(double)>& signal_derivative, double center_time,
    const OperatorKernel& kernel) {
    const auto times = kernel.tap_times();
    const int d = static_cast<int>(times.size());
    const int n = 2 * d;

    auto r = [&cov](double t) { return cov(t); };
    // derivatives of R(t) = scale exp(-c t^2)
    auto r1 = [&cov](double t) { return -2.0 * cov.c * t * cov(t); };
    auto r2 = [&cov](double t) {
        return (-2.0 * cov.c + 4.0 * cov.c * cov.c * t * t) * cov(t);
    };

    Eigen::MatrixXd M(n, n);
    Eigen::VectorXd mu(n);
    for (int i = 0; i < d; ++i) {
        mu[i] = signal(center_time + times[i]);
        mu[d + i] = signal_derivative(center_time + times[i]);
    }
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            const double tau = times[i] - times[j];
            M(i, j) = r(tau);
            // Cov(x(ti), x'(tj)) = -R'(ti - tj); Cov(x', x') = -R''
            M(i, d + j) = -r1(tau);
            M(d + i, j) = r1(tau);
            M(d + i, d + j) = -r2(tau);
        }
    }
    Eigen::MatrixXd J = kernel.J();
    Eigen::MatrixXd J_num = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd J_den = Eigen::MatrixXd::Zero(n, n);
    J_den.topLeftCorner(d, d) = J;
    J_num.bottomRightCorner(d, d) = J;
    return {GaussianVectorModel(mu, M, cov.scale), J_num, J_den};
}

} // namespace tkostat
