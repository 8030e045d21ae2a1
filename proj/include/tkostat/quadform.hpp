#ifndef TKOSTAT_QUADFORM_HPP
#define TKOSTAT_QUADFORM_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "tkostat/gaussian_model.hpp"

namespace tkostat {

using Complex = std::complex<double>;

/// Thrown when an inversion integral cannot be certified to the requested
/// tolerance; carries the achieved error estimate.
class QuadratureNonConvergence : public std::runtime_error {
public:
    QuadratureNonConvergence(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_error(achieved) {}
    double achieved_error;
};

struct CumulantSet {
    std::vector<double> kappa; // kappa[s-1] = kappa_s
    std::vector<double> rho;   // rho[s-3] = rho_s (s >= 3)

    double kappa_s(int s) const { return kappa.at(static_cast<size_t>(s) - 1); }
    double rho_s(int s) const { return rho.at(static_cast<size_t>(s) - 3); }
};

/// kappa_s = 2^(s-1) (s-1)! { tr((MJ)^s) + s mu'J(MJ)^(s-1) mu }
CumulantSet cumulants(const Eigen::VectorXd& mu, const Eigen::MatrixXd& M,
                      const Eigen::MatrixXd& J, int s_max = 8);

struct DensityGridMeta {
    double normalization_error = 0.0; // |1 - trapezoid integral|
    double clamp_total = 0.0;         // total clamped negative mass (abs)
    double mc_se = 0.0;               // worst per-cell MC standard error
    bool flagged = false;             // normalization error above 0.01
    double support_lo = 0.0;
    double support_hi = 0.0;
};

/// Tabulated density (and optionally cdf) on a value grid.
struct DensityGrid {
    std::vector<double> values;
    std::vector<double> pdf;
    std::vector<double> cdf; // empty when not computed
    DensityGridMeta meta;
};

/// Characteristic function of one quadratic form, evaluated through either
/// the matrix representation (mu, M, J) or the diagonal (lambda, s, N0)
/// representation, in the real or the narrowband (two-degrees-per-mode)
/// variant.
class ChfEvaluator {
public:
    enum class Variant { Real, Narrowband };

    static ChfEvaluator from_matrix(const Eigen::VectorXd& mu,
                                    const Eigen::MatrixXd& M,
                                    const Eigen::MatrixXd& J);
    static ChfEvaluator from_diagonal(const SpectralDecomposition& decomp,
                                      Variant variant = Variant::Real);

    Complex operator()(double xi) const;

    /// Upper bound on |phi(xi)|, from the per-mode determinant factors.
    double envelope_bound(double xi) const;

    double kappa(int s) const; // s in 1..4
    int active_modes() const { return active_modes_; }
    Variant variant() const { return variant_; }
    /// |phi| ~ xi^(-decay_exponent) for large xi.
    double decay_exponent() const;

private:
    ChfEvaluator() = default;
    bool matrix_route_ = false;
    Variant variant_ = Variant::Real;
    Eigen::VectorXd lamN0_; // per-mode eigenvalue scales (eigenvalues of MJ)
    Eigen::VectorXd s_;     // noncentralities (diagonal route only)
    double N0_ = 1.0;
    int active_modes_ = 0;
    double kappa_[4] = {0, 0, 0, 0};
    // matrix route data
    Eigen::MatrixXd M_, J_;
    Eigen::VectorXd mu_;
};

// chf evaluations (Eqs. as documented on each evaluator route)
Complex chf_matrix(double xi, const Eigen::VectorXd& mu, const Eigen::MatrixXd& M,
                   const Eigen::MatrixXd& J);
Complex chf_diagonal(double xi, const SpectralDecomposition& decomp);
Complex chf_narrowband(double xi, const SpectralDecomposition& decomp);

/// chf of the real quadratic form C^dagger Q C for a complex Gaussian vector
/// with mean Cbar and Hermitian covariance Lc.
Complex chf_complex(double xi, const Eigen::VectorXcd& Cbar,
                    const Eigen::MatrixXcd& Lc, const Eigen::MatrixXcd& Q);

/// Gil-Pelaez inversion: F(v) = 1/2 - (1/pi) int_0^inf Im[e^{-i xi v}
/// phi(xi)]/xi dxi, by certified adaptive quadrature with an oscillatory
/// tail correction. Result clamped to [0, 1].
double cdf_gil_pelaez(double v, const ChfEvaluator& chf, double tol = 1e-9);

/// Density by inversion: f(v) = (1/pi) int_0^inf Re[e^{-i xi v} phi(xi)] dxi.
double pdf_point_numeric(double v, const ChfEvaluator& chf, double tol = 1e-8);

/// Density tabulated on a grid, with negative clamping and normalization
/// bookkeeping recorded in the meta block.
DensityGrid pdf_numeric(const std::vector<double>& grid, const ChfEvaluator& chf,
                        double tol = 1e-8);

/// Closed form for a single positive eigenvalue, real variant.
double pdf_single_lambda(double v, double lambda, double s, double N0);

/// Closed form for a single mode of the narrowband variant (Rician envelope
/// statistics).
double pdf_rician_mode(double v, double lambda, double s, double N0);

/// Central two-positive/two-negative eigenvalue case: closed-form factor
/// densities combined by the one-sided convolution.
double pdf_two_pos_two_neg(double v, double l1, double l2, double l3, double l4,
                           double N0);

} // namespace tkostat

#endif
