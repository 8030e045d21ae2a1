#include "tkostat/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace tkostat {

Eigen::MatrixXd kernel_matrix(int p, int q) {
    if (p < 0 || q <= 0) throw std::invalid_argument("delays must satisfy 0 <= p < q");
    if (p >= q) throw std::invalid_argument("delays must satisfy p < q");
    if (p == 0) {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, 3);
        J(1, 1) = 1.0;
        J(0, 2) = J(2, 0) = -0.5;
        return J;
    }
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4, 4);
    J(0, 3) = J(3, 0) = -0.5;
    J(1, 2) = J(2, 1) = 0.5;
    return J;
}

OperatorKernel::OperatorKernel(int p, int q, double T)
    : p_(p), q_(q), T_(T), J_(kernel_matrix(p, q)) {
    if (T <= 0.0) throw std::invalid_argument("sampling interval T must be positive");
}

std::vector<int> OperatorKernel::tap_offsets() const {
    if (p_ == 0) return {-q_, 0, q_};
    return {-q_, -p_, p_, q_};
}

std::vector<double> OperatorKernel::tap_times() const {
    std::vector<double> t;
    for (int k : tap_offsets()) t.push_back(k * T_);
    return t;
}

std::vector<double> apply_tko(const SampledSignal& signal,
                              const OperatorKernel& kernel) {
    const auto& x = signal.samples;
    const int q = kernel.q(), p = kernel.p();
    const std::size_t n = x.size();
    if (n < static_cast<std::size_t>(2 * q + 1))
        throw std::invalid_argument("signal shorter than 2q+1 samples");
    const double inv_T2 = 1.0 / (kernel.T() * kernel.T());
    std::vector<double> out(n - 2 * q);
    for (std::size_t i = q; i + q < n; ++i) {
        out[i - q] = (x[i - p] * x[i + p] - x[i - q] * x[i + q]) * inv_T2;
    }
    return out;
}

double freq_response(const OperatorKernel& kernel, double omega) {
    const double tq = kernel.q() * kernel.T();
    if (kernel.p() == 0) return 1.0 - std::cos(2.0 * omega * tq);
    const double tp = kernel.p() * kernel.T();
    return std::cos(2.0 * omega * tp) - std::cos(2.0 * omega * tq);
}

std::vector<double> discriminator_extrema(const OperatorKernel& kernel,
                                          double lo, double hi) {
    if (kernel.p() <= 0)
        throw std::invalid_argument("discriminator extrema require p > 0");
    if (!(hi > lo)) throw std::invalid_argument("degenerate search interval");
    const double tp = kernel.p() * kernel.T();
    const double tq = kernel.q() * kernel.T();
    auto g = [tp, tq](double w) {
        return tp * std::sin(2.0 * w * tp) - tq * std::sin(2.0 * w * tq);
    };
    // bracket on a uniform grid, 1024 points per pi of range
    const std::size_t n_grid =
        std::max<std::size_t>(2, static_cast<std::size_t>(1024.0 * (hi - lo) / M_PI));
    std::vector<double> roots;
    double w0 = lo, g0 = g(w0);
    for (std::size_t k = 1; k <= n_grid; ++k) {
        const double w1 = lo + (hi - lo) * static_cast<double>(k) / n_grid;
        const double g1 = g(w1);
        if (g0 == 0.0) {
            roots.push_back(w0);
        } else if (g0 * g1 < 0.0) {
            double a = w0, b = w1, fa = g0;
            while (b - a > 1e-10) {
                const double m = 0.5 * (a + b);
                const double fm = g(m);
                if (fa * fm <= 0.0) {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        w0 = w1;
        g0 = g1;
    }
    if (g0 == 0.0) roots.push_back(w0);
    return roots;
}

CrossTermAmplitudes cross_term_amplitudes(double a_k, double a_l, double w_k,
                                          double w_l,
                                          const OperatorKernel& kernel) {
    const double tp = kernel.p() * kernel.T();
    const double tq = kernel.q() * kernel.T();
    auto sin2 = [](double x) { return std::sin(x) * std::sin(x); };
    CrossTermAmplitudes r;
    r.dc = a_k * a_k * (sin2(w_k * tq) - sin2(w_k * tp)) +
           a_l * a_l * (sin2(w_l * tq) - sin2(w_l * tp));
    const double sum = w_k + w_l, diff = w_k - w_l;
    const double ab = a_k * a_l;
    r.diff_coeff = ab * (std::cos(sum * tp) - std::cos(sum * tq));
    r.sum_coeff = ab * (std::cos(diff * tp) - std::cos(diff * tq));
    return r;
}

} // namespace tkostat
