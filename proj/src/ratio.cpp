#include "tkostat/ratio.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include "tkostat/quadrature.hpp"

namespace tkostat {

namespace {

using CVec = Eigen::VectorXcd;

void require_symmetric(const Eigen::MatrixXd& J, const char* name) {
    if (J.rows() != J.cols() || !J.isApprox(J.transpose(), 1e-12)) {
        std::ostringstream os;
        os << name << " must be a symmetric square matrix";
        throw std::invalid_argument(os.str());
    }
}

// Whitened working basis for the contour integral at one ratio value r:
// with M = LL', G = L'(J_num - r J_den)L = P diag(lam) P', the integrand
// needs only lam, wt = P'L^{-1}mu and Ht = P'(L'J_den L)P.
struct GearyBasis {
    Eigen::VectorXd lam;
    Eigen::VectorXd wt;
    Eigen::MatrixXd Ht;
    int active = 0;
    double lam_scale = 0.0;
};

struct GearySetup {
    Eigen::MatrixXd G1; // L'J_num L
    Eigen::MatrixXd H;  // L'J_den L
    Eigen::VectorXd w;  // L^{-1} mu
};

GearySetup geary_setup(const RatioSpec& spec) {
    GearySetup s;
    const Eigen::LLT<Eigen::MatrixXd> llt(spec.model.M);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("model covariance is not positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    s.G1 = L.transpose() * spec.J_num * L;
    s.H = L.transpose() * spec.J_den * L;
    s.w = L.triangularView<Eigen::Lower>().solve(spec.model.mu);
    return s;
}

GearyBasis geary_basis(const GearySetup& s, double r) {
    const Eigen::MatrixXd G = s.G1 - r * s.H;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
    GearyBasis b;
    b.lam = eig.eigenvalues();
    const Eigen::MatrixXd& P = eig.eigenvectors();
    b.wt = P.transpose() * s.w;
    b.Ht = P.transpose() * s.H * P;
    b.lam_scale = b.lam.cwiseAbs().maxCoeff();
    const double snap = 1e-12 * std::max(b.lam_scale, 1e-300);
    for (int j = 0; j < b.lam.size(); ++j)
        if (std::abs(b.lam[j]) >= snap) ++b.active;
    return b;
}

// h(xi) = phi_{V1 - r V2}(xi) * [tr(A^{-1}MJ_den) + (A^{-1}mu)'J_den(A^{-1}mu)]
// in the whitened basis; f_R(r) = (1/pi) Int_0^inf Re h.
Complex geary_integrand(const GearyBasis& b, double xi) {
    const int n = static_cast<int>(b.lam.size());
    Complex det_sqrt(1.0, 0.0);
    Complex expo(0.0, 0.0);
    Complex tr(0.0, 0.0);
    CVec y(n);
    for (int j = 0; j < n; ++j) {
        const Complex fac(1.0, -2.0 * xi * b.lam[j]);
        const Complex d = 1.0 / fac;
        det_sqrt *= std::sqrt(fac); // Re(fac) = 1, principal branch per factor
        expo += b.lam[j] * b.wt[j] * b.wt[j] * d;
        tr += b.Ht(j, j) * d;
        y[j] = d * b.wt[j];
    }
    const Complex phi = std::exp(Complex(0.0, xi) * expo) / det_sqrt;
    const Complex quad = y.transpose() * b.Ht * y;
    return phi * (tr + quad);
}

struct GearyPoint {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
    bool degenerate = false;
};

GearyPoint geary_point(const GearyBasis& b, double tol) {
    GearyPoint out;
    if (b.active == 0) {
        // all eigenvalues vanish: the ratio is deterministic and the density
        // at this point is a delta spike; report a capped finite value
        const Complex c = geary_integrand(b, 0.0);
        out.value = std::max(0.0, c.real()) * 1e8 / M_PI;
        out.degenerate = true;
        return out;
    }
    const double decay = static_cast<double>(b.active) / 2.0 + 1.0;
    double cutoff = 64.0 / b.lam_scale;
    double tail = 0.0;
    for (int it = 0; it < 48; ++it) {
        tail = std::abs(geary_integrand(b, cutoff)) * cutoff / (decay - 1.0);
        if (tail <= 0.25 * tol * M_PI) break;
        cutoff *= 2.0;
    }
    auto f = [&b](double xi) { return geary_integrand(b, xi).real(); };
    // the integrand oscillates at the rate set by the noncentralities; anchor
    // the segmentation there so a wide truncation range cannot hide it
    double freq = b.lam_scale;
    for (int j = 0; j < b.lam.size(); ++j)
        freq += std::abs(b.lam[j]) * (b.wt[j] * b.wt[j] + std::abs(b.Ht(j, j)));
    const QuadResult q =
        integrate_segmented(f, cutoff, 1.0 / freq, 0.5 * tol * M_PI);
    out.value = q.value / M_PI;
    out.error = (q.error + tail) / M_PI;
    out.converged = q.converged && tail <= 0.25 * tol * M_PI;
    return out;
}

void check_denominator_positive(const RatioSpec& spec) {
    // a nonnegative-definite form under the model cannot go negative; skip
    // the inversion, which is uncertifiable for the slow chf decay of low
    // mode counts
    const SpectralDecomposition d = decompose(spec.model, spec.J_den);
    const double lmax = d.lambdas.cwiseAbs().maxCoeff();
    if (d.lambdas.minCoeff() >= -1e-12 * lmax) return;
    const ChfEvaluator chf =
        ChfEvaluator::from_matrix(spec.model.mu, spec.model.M, spec.J_den);
    const double p_nonpos = cdf_gil_pelaez(0.0, chf, 1e-6);
    if (!(p_nonpos < 0.01)) {
        std::ostringstream os;
        os << "denominator form is not essentially positive: P(V2 <= 0) ~ "
           << p_nonpos << " (>= 0.01); threshold or filter first";
        throw std::invalid_argument(os.str());
    }
}

double uniform_step(const std::vector<double>& grid) {
    if (grid.size() < 2)
        throw std::invalid_argument("need at least 2 grid points");
    const double d = grid[1] - grid[0];
    if (!(d > 0.0)) throw std::invalid_argument("grid must be increasing");
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double di = grid[i + 1] - grid[i];
        if (std::abs(di - d) > 1e-9 * std::abs(d))
            throw std::invalid_argument("Monte Carlo ratio densities need a uniform grid");
    }
    return d;
}

// Monte Carlo ratio density on a uniform grid of cell centers, with the
// sample count doubled until every cell's standard error is below 2% of
// the peak density.
DensityGrid mc_ratio_density(const std::vector<double>& r_grid,
                             const RatioSpec& spec, double threshold,
                             const McConfig& cfg0, bool square_numerator) {
    const double step = uniform_step(r_grid);
    const std::pair<double, double> range{r_grid.front() - 0.5 * step,
                                          r_grid.back() + 0.5 * step};
    DensityGrid out;
    out.values = r_grid;
    out.meta.support_lo = range.first;
    out.meta.support_hi = range.second;

    McConfig cfg = cfg0;
    cfg.histogram_bins = r_grid.size();
    const double peak_target = 0.02;
    for (int attempt = 0;; ++attempt) {
        const RatioSample rs =
            sample_ratio(spec.model, spec.J_num, spec.J_den, threshold, cfg,
                         range, square_numerator);
        if (attempt == 0 && rs.acceptance_rate < 0.01) {
            std::ostringstream os;
            os << "acceptance probability too small: " << rs.acceptance_rate
               << " (+/- " << rs.acceptance_se << ")";
            throw std::runtime_error(os.str());
        }
        const auto n_acc = static_cast<double>(rs.accepted);
        const double in_range =
            static_cast<double>(rs.accepted - rs.histogram.out_of_range);
        out.pdf.resize(r_grid.size());
        double peak = 0.0;
        for (std::size_t i = 0; i < r_grid.size(); ++i) {
            // renormalize from in-range mass to accepted mass
            out.pdf[i] = rs.histogram.density[i] * (in_range / n_acc);
            peak = std::max(peak, out.pdf[i]);
        }
        double worst_se = 0.0;
        for (double d : out.pdf) {
            const double p = d * step;
            worst_se = std::max(
                worst_se, std::sqrt(std::max(0.0, p * (1.0 - p)) / n_acc) / step);
        }
        out.meta.mc_se = worst_se;
        out.meta.normalization_error = 1.0 - in_range / n_acc;
        const bool met = worst_se <= peak_target * peak && peak > 0.0;
        if (met || attempt >= 6) {
            out.meta.flagged = !met;
            break;
        }
        cfg.n_samples *= 2;
    }
    out.cdf.resize(r_grid.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        acc += out.pdf[i] * step;
        out.cdf[i] = std::min(1.0, acc);
    }
    return out;
}

} // namespace

RatioSpec::RatioSpec(Eigen::MatrixXd J_num_, Eigen::MatrixXd J_den_,
                     GaussianVectorModel model_, std::optional<double> threshold_,
                     bool numerator_squared_)
    : J_num(std::move(J_num_)),
      J_den(std::move(J_den_)),
      model(std::move(model_)),
      threshold(threshold_),
      numerator_squared(numerator_squared_) {
    require_symmetric(J_num, "numerator kernel");
    require_symmetric(J_den, "denominator kernel");
    if (J_num.rows() != model.dim() || J_den.rows() != model.dim())
        throw std::invalid_argument("kernel dimension does not match the model");
    if (threshold && *threshold < 0.0)
        throw std::invalid_argument("threshold must be nonnegative");
}

Complex joint_chf(double xi1, double xi2, const RatioSpec& spec) {
    const Eigen::MatrixXd Jc = xi1 * spec.J_num + xi2 * spec.J_den;
    return chf_matrix(1.0, spec.model.mu, spec.model.M, Jc);
}

double ratio_pdf_geary_point(double r, const RatioSpec& spec, double tol) {
    check_denominator_positive(spec);
    const GearySetup setup = geary_setup(spec);
    const GearyPoint p = geary_point(geary_basis(setup, r), tol);
    if (p.degenerate)
        throw QuadratureNonConvergence(
            "ratio density is a delta spike at this point", p.value);
    if (!p.converged)
        throw QuadratureNonConvergence("ratio density integral did not converge",
                                       p.error);
    return std::max(0.0, p.value);
}

DensityGrid ratio_pdf_geary(const std::vector<double>& r_grid,
                            const RatioSpec& spec, double tol) {
    if (r_grid.size() < 2)
        throw std::invalid_argument("need at least 2 grid points");
    check_denominator_positive(spec);
    const GearySetup setup = geary_setup(spec);
    DensityGrid out;
    out.values = r_grid;
    out.pdf.resize(r_grid.size());
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        const GearyPoint p = geary_point(geary_basis(setup, r_grid[i]), tol);
        double v = p.value;
        if (v < 0.0) {
            out.meta.clamp_total += -v;
            v = 0.0;
        }
        out.pdf[i] = v;
        if (p.degenerate || !p.converged) out.meta.flagged = true;
    }
    out.cdf.resize(r_grid.size());
    double mass = 0.0;
    out.cdf[0] = 0.0;
    for (std::size_t i = 1; i < r_grid.size(); ++i) {
        mass += 0.5 * (out.pdf[i] + out.pdf[i - 1]) * (r_grid[i] - r_grid[i - 1]);
        out.cdf[i] = std::min(1.0, mass);
    }
    out.meta.normalization_error = std::abs(1.0 - mass);
    if (out.meta.normalization_error > 0.01) out.meta.flagged = true;
    out.meta.support_lo = r_grid.front();
    out.meta.support_hi = r_grid.back();
    return out;
}

DensityGrid ratio_pdf_conditioned(const std::vector<double>& r_grid,
                                  const RatioSpec& spec, const McConfig& cfg) {
    if (!spec.threshold || !(*spec.threshold > 0.0))
        throw std::invalid_argument(
            "conditioned ratio density needs a positive threshold");
    return mc_ratio_density(r_grid, spec, *spec.threshold, cfg,
                            spec.numerator_squared);
}

DensityGrid envelope_ratio_pdf(const std::vector<double>& r_grid,
                               const RatioSpec& spec, const McConfig& cfg) {
    if (!spec.numerator_squared)
        throw std::invalid_argument("spec must have numerator_squared set");
    check_denominator_positive(spec);
    return mc_ratio_density(r_grid, spec, spec.threshold.value_or(0.0), cfg,
                            true);
}

IqRatioDensities iq_correlator_ratios(const GaussianVectorModel& model,
                                      const std::vector<double>& sine_grid,
                                      const std::vector<double>& tangent_grid,
                                      const McConfig& cfg) {
    if (model.dim() != 4)
        throw std::invalid_argument("expected a 4-dim (I1, Q1, I2, Q2) model");
    const Eigen::MatrixXd& M = model.M;
    const double scale = M.diagonal().maxCoeff();
    const double tol = 1e-9 * scale;
    const bool symmetric = std::abs(M(0, 0) - M(1, 1)) < tol &&
                           std::abs(M(2, 2) - M(3, 3)) < tol &&
                           std::abs(M(0, 1)) < tol && std::abs(M(2, 3)) < tol &&
                           std::abs(M(0, 2) - M(1, 3)) < tol &&
                           std::abs(M(0, 3) + M(1, 2)) < tol;
    if (!symmetric)
        throw std::invalid_argument(
            "covariance lacks the in-phase/quadrature circular symmetry");

    Eigen::MatrixXd J_cross = Eigen::MatrixXd::Zero(4, 4); // I1Q2 - I2Q1
    J_cross(0, 3) = J_cross(3, 0) = 0.5;
    J_cross(1, 2) = J_cross(2, 1) = -0.5;
    Eigen::MatrixXd J_plus = Eigen::MatrixXd::Zero(4, 4); // I1Q2 + I2Q1
    J_plus(0, 3) = J_plus(3, 0) = 0.5;
    J_plus(1, 2) = J_plus(2, 1) = 0.5;

    IqRatioDensities out;
    const RatioSpec sine_spec(2.0 * J_cross, Eigen::MatrixXd::Identity(4, 4),
                              model);
    out.sine_ratio = ratio_pdf_geary(sine_grid, sine_spec);
    const RatioSpec tan_spec(J_cross, J_plus, model);
    out.tangent_ratio = mc_ratio_density(tangent_grid, tan_spec, 0.0, cfg, false);
    return out;
}

} // namespace tkostat
