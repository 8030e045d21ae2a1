#include "tkostat/esa.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tkostat/special.hpp"

namespace tkostat {

namespace {

constexpr int kHalfWidth = 16;   // interpolation support, input samples
constexpr double kKaiserBeta = 10.0;

double kaiser(double u) { // u in [-1, 1]
    const double t = 1.0 - u * u;
    if (t <= 0.0) return 0.0;
    return std::exp(log_bessel_i0(kKaiserBeta * std::sqrt(t)) -
                    log_bessel_i0(kKaiserBeta));
}

double sinc(double z) {
    if (std::abs(z) < 1e-12) return 1.0;
    const double pz = M_PI * z;
    return std::sin(pz) / pz;
}

// windowed-sinc interpolation of x at fractional sample position u; the
// coefficients are corrected to reproduce constants and ramps exactly
// (zeroth and first moments), which the raw Kaiser window does not
double interp_at(const std::vector<double>& x, double u) {
    const int n0 = static_cast<int>(std::floor(u));
    double c[2 * kHalfWidth];
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (int j = 0; j < 2 * kHalfWidth; ++j) {
        const int k = n0 - kHalfWidth + 1 + j;
        const double z = u - k;
        c[j] = sinc(z) * kaiser(z / (kHalfWidth + 1.0));
        s0 += c[j];
        s1 += c[j] * (k - u);
        s2 += c[j] * (k - u) * (k - u);
    }
    // affine reweighting c * (alpha + beta (k - u)) enforcing sum 1 and
    // centroid u; weighting by c keeps the correction spectrally smooth
    const double det = s0 * s2 - s1 * s1;
    const double alpha = s2 / det, beta = -s1 / det;
    double acc = 0.0;
    for (int j = 0; j < 2 * kHalfWidth; ++j) {
        const int k = n0 - kHalfWidth + 1 + j;
        acc += x[static_cast<std::size_t>(k)] * c[j] * (alpha + beta * (k - u));
    }
    return acc;
}

} // namespace

std::size_t derivative_trim() { return kHalfWidth + 1; }

SampledSignal interpolate_derivative(const SampledSignal& signal, int refine) {
    if (refine < 2) throw std::invalid_argument("refine must be >= 2");
    const std::size_t n = signal.samples.size();
    const std::size_t trim = derivative_trim();
    if (n < 2 * trim + 8) throw std::invalid_argument("signal too short");
    const double h = 1.0 / (signal.fs * refine); // fine-grid step, seconds
    SampledSignal out;
    out.fs = signal.fs;
    out.samples.resize(n - 2 * trim);
    const double du = 1.0 / refine;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const double u = static_cast<double>(i + trim);
        out.samples[i] =
            (interp_at(signal.samples, u + du) - interp_at(signal.samples, u - du)) /
            (2.0 * h);
    }
    return out;
}

EsaEstimate esa_demodulate(const SampledSignal& signal,
                           const OperatorKernel& kernel, double threshold,
                           int refine) {
    const int q = kernel.q();
    const std::size_t trim = derivative_trim();
    const SampledSignal deriv = interpolate_derivative(signal, refine);
    const std::vector<double> psi_x = apply_tko(signal, kernel);
    const std::vector<double> psi_d = apply_tko(deriv, kernel);
    // psi_x[j] is centered on sample j + q; psi_d[j] on sample j + trim + q
    const std::size_t n_out = psi_d.size();
    EsaEstimate est;
    est.offset = trim + q;
    est.omega_sq.assign(n_out, std::numeric_limits<double>::quiet_NaN());
    est.amp_sq.assign(n_out, std::numeric_limits<double>::quiet_NaN());
    est.valid_mask.assign(n_out, false);
    for (std::size_t i = 0; i < n_out; ++i) {
        const double px = psi_x[i + trim];
        const double pd = psi_d[i];
        if (px > threshold && pd > threshold) {
            est.omega_sq[i] = pd / px;
            est.amp_sq[i] = px * px / pd;
            est.valid_mask[i] = true;
        }
    }
    return est;
}

std::vector<double> binomial_filter(const std::vector<double>& x) {
    if (x.size() < 3) throw std::invalid_argument("need at least 3 samples");
    std::vector<double> y(x.size() - 2);
    for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = 0.25 * (x[i] + 2.0 * x[i + 1] + x[i + 2]);
    return y;
}

PositivityReport positivity_report(const std::vector<double>& before,
                                   const std::vector<double>& after) {
    if (before.size() != after.size())
        throw std::invalid_argument("sequences are not aligned");
    auto frac = [](const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        std::size_t n = 0;
        for (double x : v)
            if (x < 0.0) ++n;
        return static_cast<double>(n) / static_cast<double>(v.size());
    };
    return {frac(before), frac(after)};
}

} // namespace tkostat
