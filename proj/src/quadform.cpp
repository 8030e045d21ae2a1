#include "tkostat/quadform.hpp"

#include <algorithm>
#include <cmath>

#include "tkostat/quadrature.hpp"
#include "tkostat/special.hpp"

namespace tkostat {

namespace {
constexpr Complex kI{0.0, 1.0};
}

CumulantSet cumulants(const Eigen::VectorXd& mu, const Eigen::MatrixXd& M,
                      const Eigen::MatrixXd& J, int s_max) {
    if (s_max < 2) throw std::invalid_argument("s_max must be >= 2");
    CumulantSet out;
    const Eigen::MatrixXd MJ = M * J;
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(M.rows(), M.cols()); // (MJ)^(s-1)
    double factor = 1.0; // 2^(s-1) (s-1)!
    for (int s = 1; s <= s_max; ++s) {
        if (s > 1) {
            power = power * MJ;
            factor *= 2.0 * (s - 1);
        }
        const double tr = (power * MJ).trace();
        const double quad_term = mu.dot(J * (power * mu));
        out.kappa.push_back(factor * (tr + s * quad_term));
    }
    const double k2 = out.kappa_s(2);
    for (int s = 3; s <= s_max; ++s)
        out.rho.push_back(out.kappa_s(s) * std::pow(k2, -0.5 * s));
    return out;
}

// ---------------------------------------------------------------------------
// ChfEvaluator

ChfEvaluator ChfEvaluator::from_matrix(const Eigen::VectorXd& mu,
                                       const Eigen::MatrixXd& M,
                                       const Eigen::MatrixXd& J) {
    if (!J.isApprox(J.transpose(), 1e-12))
        throw std::invalid_argument("J must be symmetric");
    ChfEvaluator e;
    e.matrix_route_ = true;
    e.variant_ = Variant::Real;
    e.M_ = M;
    e.J_ = J;
    e.mu_ = mu;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("M not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L.transpose() * J * L);
    e.lamN0_ = es.eigenvalues(); // eigenvalues of MJ
    e.N0_ = 1.0;
    const double lmax = e.lamN0_.cwiseAbs().maxCoeff();
    for (int j = 0; j < e.lamN0_.size(); ++j)
        if (std::abs(e.lamN0_[j]) > 1e-12 * lmax) ++e.active_modes_;
    const CumulantSet ks = cumulants(mu, M, J, 4);
    for (int s = 1; s <= 4; ++s) e.kappa_[s - 1] = ks.kappa_s(s);
    return e;
}

ChfEvaluator ChfEvaluator::from_diagonal(const SpectralDecomposition& decomp,
                                         Variant variant) {
    ChfEvaluator e;
    e.matrix_route_ = false;
    e.variant_ = variant;
    e.lamN0_ = decomp.lambdas * decomp.N0;
    e.s_ = decomp.s;
    e.N0_ = decomp.N0;
    const double lmax = e.lamN0_.cwiseAbs().maxCoeff();
    for (int j = 0; j < e.lamN0_.size(); ++j)
        if (std::abs(e.lamN0_[j]) > 1e-12 * lmax) ++e.active_modes_;
    for (int s = 1; s <= 4; ++s) {
        double acc = 0.0;
        for (int j = 0; j < e.lamN0_.size(); ++j) {
            const double ls = std::pow(e.lamN0_[j], s);
            const double nc = 1.0 + s * e.s_[j] * e.s_[j] / e.N0_;
            acc += ls * nc;
        }
        double factor = 1.0;
        for (int k = 1; k < s; ++k)
            factor *= (variant == Variant::Real ? 2.0 : 1.0) * k;
        e.kappa_[s - 1] = factor * acc;
    }
    return e;
}

Complex ChfEvaluator::operator()(double xi) const {
    if (matrix_route_) {
        const int n = static_cast<int>(M_.rows());
        // determinant through the per-eigenvalue factors: each 1-2i xi lam
        // has positive real part, so the principal square root applies
        // factor by factor
        Complex det_sqrt{1.0, 0.0};
        for (int j = 0; j < lamN0_.size(); ++j)
            det_sqrt *= std::sqrt(Complex(1.0, -2.0 * xi * lamN0_[j]));
        Complex expo{0.0, 0.0};
        if (mu_.squaredNorm() > 0.0) {
            // exponent i xi mu'J (I - 2 i xi M J)^{-1} mu
            Eigen::MatrixXcd A =
                Eigen::MatrixXcd::Identity(n, n) - 2.0 * kI * xi * (M_ * J_);
            const Eigen::VectorXcd w = A.partialPivLu().solve(mu_.cast<Complex>());
            expo = kI * xi * mu_.cast<Complex>().dot(J_.cast<Complex>() * w);
        }
        return std::exp(expo) / det_sqrt;
    }
    Complex phi{1.0, 0.0};
    if (variant_ == Variant::Real) {
        for (int j = 0; j < lamN0_.size(); ++j) {
            const Complex y = 2.0 * kI * xi * lamN0_[j];
            const Complex fac = 1.0 - y;
            phi *= std::exp((s_[j] * s_[j] / (2.0 * N0_)) * y / fac) / std::sqrt(fac);
        }
    } else {
        for (int j = 0; j < lamN0_.size(); ++j) {
            const Complex y = kI * xi * lamN0_[j];
            const Complex fac = 1.0 - y;
            phi *= std::exp((s_[j] * s_[j] / N0_) * y / fac) / fac;
        }
    }
    return phi;
}

double ChfEvaluator::envelope_bound(double xi) const {
    double b = 1.0;
    if (variant_ == Variant::Real) {
        for (int j = 0; j < lamN0_.size(); ++j) {
            const double y = 2.0 * xi * lamN0_[j];
            b *= std::pow(1.0 + y * y, -0.25);
        }
    } else {
        for (int j = 0; j < lamN0_.size(); ++j) {
            const double y = xi * lamN0_[j];
            b *= std::pow(1.0 + y * y, -0.5);
        }
    }
    return b;
}

double ChfEvaluator::kappa(int s) const {
    if (s < 1 || s > 4) throw std::invalid_argument("kappa order must be 1..4");
    return kappa_[s - 1];
}

double ChfEvaluator::decay_exponent() const {
    return variant_ == Variant::Real ? 0.5 * active_modes_
                                     : static_cast<double>(active_modes_);
}

Complex chf_matrix(double xi, const Eigen::VectorXd& mu, const Eigen::MatrixXd& M,
                   const Eigen::MatrixXd& J) {
    return ChfEvaluator::from_matrix(mu, M, J)(xi);
}

Complex chf_diagonal(double xi, const SpectralDecomposition& decomp) {
    return ChfEvaluator::from_diagonal(decomp, ChfEvaluator::Variant::Real)(xi);
}

Complex chf_narrowband(double xi, const SpectralDecomposition& decomp) {
    return ChfEvaluator::from_diagonal(decomp, ChfEvaluator::Variant::Narrowband)(xi);
}

Complex chf_complex(double xi, const Eigen::VectorXcd& Cbar,
                    const Eigen::MatrixXcd& Lc, const Eigen::MatrixXcd& Q) {
    if (!Lc.isApprox(Lc.adjoint(), 1e-12))
        throw std::invalid_argument("Lc must be Hermitian");
    if (!Q.isApprox(Q.adjoint(), 1e-12))
        throw std::invalid_argument("Q must be Hermitian");
    const int n = static_cast<int>(Lc.rows());
    const Eigen::MatrixXcd A =
        Eigen::MatrixXcd::Identity(n, n) - kI * xi * (Lc * Q);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    const Complex det = lu.determinant();
    Complex expo{0.0, 0.0};
    if (Cbar.squaredNorm() > 0.0) {
        // exponent i xi Cbar^dag Q (I - i xi Lc Q)^{-1} Cbar
        const Eigen::VectorXcd w = lu.solve(Cbar);
        expo = kI * xi * Cbar.dot(Q * w);
    }
    return std::exp(expo) / det;
}

// ---------------------------------------------------------------------------
// Inversion integrals

namespace {

struct TruncationPlan {
    double Xi = 0.0;
    bool oscillatory_tail = false; // apply the integration-by-parts correction
    double tail_estimate = 0.0;
    bool certified = false;
};

// k = 1 for the cdf integrand phi/xi, k = 0 for the pdf integrand phi.
TruncationPlan plan_truncation(const ChfEvaluator& chf, double v, int k,
                               double tol) {
    const double alpha = chf.decay_exponent();
    const double av = std::abs(v);
    const double lam_scale = std::sqrt(std::max(chf.kappa(2), 1e-300));
    TruncationPlan plan;
    double Xi = 1.0 / std::max(lam_scale, 1e-300);
    for (int iter = 0; iter < 80; ++iter) {
        const double b = chf.envelope_bound(Xi);
        double t_plain;
        if (k == 1) {
            t_plain = alpha > 0 ? b / alpha : 1e300;
        } else {
            t_plain = alpha > 1 ? b * Xi / (alpha - 1) : 1e300;
        }
        double t_osc = 1e300;
        if (av > 0.0 && av * Xi > 20.0) {
            const double a1 = alpha + k;
            t_osc = b / std::pow(Xi, k) * (a1 + 1.0) * (a1 + 2.0) /
                    (Xi * Xi * av * av * av);
        }
        plan.Xi = Xi;
        plan.tail_estimate = std::min(t_plain, t_osc);
        plan.oscillatory_tail = t_osc < t_plain;
        if (plan.tail_estimate < 0.25 * tol) {
            plan.certified = true;
            return plan;
        }
        Xi *= 2.0;
        if (Xi > 1e13) break;
    }
    return plan;
}

// First-order-in-derivative tail of int_Xi^inf e^{-i xi v} g(xi) dxi by
// integration by parts: e^{-i Xi v} [ g/(iv) + g'/(iv)^2 ].
Complex ibp_tail(const std::function<Complex(double)>& g, double Xi, double v) {
    const Complex iv{0.0, v};
    const double h = 1e-4 * Xi;
    const Complex g0 = g(Xi);
    const Complex gp = (g(Xi + h) - g(Xi - h)) / (2.0 * h);
    return std::exp(-kI * Xi * v) * (g0 / iv + gp / (iv * iv));
}

} // namespace

double cdf_gil_pelaez(double v, const ChfEvaluator& chf, double tol) {
    const double k1 = chf.kappa(1), k2 = chf.kappa(2), k3 = chf.kappa(3),
                 k4 = chf.kappa(4);
    const double sigma = std::sqrt(std::max(k2, 1e-300));
    const double xi_series = 1e-4 / sigma;

    const TruncationPlan plan = plan_truncation(chf, v, 1, tol);

    auto integrand = [&](double xi) -> double {
        if (xi < xi_series) {
            // log phi series: a + ib with the small-xi removable singularity
            // handled analytically
            const double a = -0.5 * k2 * xi * xi + k4 * xi * xi * xi * xi / 24.0;
            const double b = (k1 - v) * xi - k3 * xi * xi * xi / 6.0;
            const double b_over_xi = (k1 - v) - k3 * xi * xi / 6.0;
            const double sinc_b =
                std::abs(b) < 1e-8 ? 1.0 - b * b / 6.0 : std::sin(b) / b;
            return std::exp(a) * b_over_xi * sinc_b;
        }
        const Complex psi = std::exp(-kI * xi * v) * chf(xi);
        return psi.imag() / xi;
    };

    const QuadResult main =
        integrate_segmented(integrand, plan.Xi, 8.0 / sigma, 0.5 * tol);
    double tail = 0.0;
    if (plan.oscillatory_tail) {
        auto g = [&chf](double xi) -> Complex { return chf(xi) / xi; };
        tail = ibp_tail(g, plan.Xi, v).imag();
    }
    const double achieved = main.error + plan.tail_estimate;
    if (!plan.certified || !main.converged)
        throw QuadratureNonConvergence(
            "Gil-Pelaez inversion did not reach the requested tolerance",
            achieved);
    const double F = 0.5 - (main.value + tail) / M_PI;
    return std::clamp(F, 0.0, 1.0);
}

double pdf_point_numeric(double v, const ChfEvaluator& chf, double tol) {
    const TruncationPlan plan = plan_truncation(chf, v, 0, tol);
    auto integrand = [&](double xi) -> double {
        return (std::exp(-kI * xi * v) * chf(xi)).real();
    };
    const QuadResult main = integrate_segmented(
        integrand, plan.Xi, 8.0 / std::sqrt(std::max(chf.kappa(2), 1e-300)),
        0.5 * tol);
    double tail = 0.0;
    if (plan.oscillatory_tail) {
        auto g = [&chf](double xi) -> Complex { return chf(xi); };
        tail = ibp_tail(g, plan.Xi, v).real();
    }
    if (!plan.certified || !main.converged)
        throw QuadratureNonConvergence(
            "density inversion did not reach the requested tolerance",
            main.error + plan.tail_estimate);
    return (main.value + tail) / M_PI;
}

DensityGrid pdf_numeric(const std::vector<double>& grid, const ChfEvaluator& chf,
                        double tol) {
    DensityGrid out;
    out.values = grid;
    out.pdf.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double f = pdf_point_numeric(grid[i], chf, tol);
        if (f < 0.0) {
            out.meta.clamp_total += -f;
            f = 0.0;
        }
        out.pdf[i] = f;
    }
    double integral = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        integral += 0.5 * (out.pdf[i] + out.pdf[i - 1]) * (grid[i] - grid[i - 1]);
    out.meta.normalization_error = std::abs(1.0 - integral);
    out.meta.flagged = out.meta.normalization_error > 0.01;
    out.meta.support_lo = grid.front();
    out.meta.support_hi = grid.back();
    return out;
}

// ---------------------------------------------------------------------------
// Closed forms

double pdf_single_lambda(double v, double lambda, double s, double N0) {
    if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
    if (v <= 0.0) return 0.0;
    const double log_f = -(s * s + v / lambda) / (2.0 * N0) +
                         log_cosh(s / N0 * std::sqrt(v / lambda)) -
                         0.5 * std::log(2.0 * M_PI * N0 * lambda * v);
    return std::exp(log_f);
}

double pdf_rician_mode(double v, double lambda, double s, double N0) {
    if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
    if (v <= 0.0) return 0.0;
    const double log_f = -(s * s + v / lambda) / N0 +
                         log_bessel_i0(2.0 * std::abs(s) / N0 * std::sqrt(v / lambda)) -
                         std::log(lambda * N0);
    return std::exp(log_f);
}

namespace {

// e^{-A u} I0(B u) / C0 branch density for a central positive pair
struct PairDensity {
    double A, B, C; // f(u) = C exp(-A u) I0(B u), u > 0
    double operator()(double u) const {
        if (u <= 0.0) return 0.0;
        return C * std::exp(-A * u + log_bessel_i0(B * u));
    }
    double decay() const { return A - std::abs(B); } // asymptotic rate
};

PairDensity make_pair_density(double la, double lb, double N0) {
    PairDensity d;
    d.A = 0.25 / N0 * (1.0 / la + 1.0 / lb);
    d.B = 0.25 / N0 * std::abs(1.0 / la - 1.0 / lb);
    d.C = 0.5 / (N0 * std::sqrt(la * lb));
    return d;
}

} // namespace

double pdf_two_pos_two_neg(double v, double l1, double l2, double l3, double l4,
                           double N0) {
    if (!(l1 > 0.0 && l2 > 0.0 && l3 < 0.0 && l4 < 0.0))
        throw std::invalid_argument(
            "expected two positive and two negative eigenvalues");
    const PairDensity fp = make_pair_density(l1, l2, N0);
    const PairDensity fm = make_pair_density(-l3, -l4, N0);
    // f(v) = int_{max(0,v)}^inf f+(u) f-(-(u - v)) du
    const double lo = std::max(0.0, v);
    const double rate = fp.decay() + fm.decay();
    const double hi = lo + 60.0 / rate;
    auto integrand = [&](double u) { return fp(u) * fm(u - v); };
    const QuadResult r = integrate_adaptive(integrand, lo, hi, 1e-12, 1e-10, 8000);
    return r.value;
}

} // namespace tkostat
