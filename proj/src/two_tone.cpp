#include "tkostat/two_tone.hpp"

#include <cmath>
#include <stdexcept>

#include "tkostat/esa.hpp"

namespace tkostat {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
}

TwoToneSignal::TwoToneSignal(double a_, double f_, double theta0_)
    : a(a_), f(f_), theta0(theta0_) {
    // a = 0 is admitted as the pure-tone limit
    if (!(a >= 0.0)) throw std::invalid_argument("amplitude ratio must be nonnegative");
    if (!(f > 0.0)) throw std::invalid_argument("frequency ratio must be positive");
}

SignalDerivatives evaluate(const TwoToneSignal& sig, double t) {
    const double p1 = kTwoPi * t;
    const double p2 = kTwoPi * sig.f * t + sig.theta0;
    const double w2 = kTwoPi * sig.f;
    SignalDerivatives d;
    d.x = std::cos(p1) + sig.a * std::cos(p2);
    d.xd = -kTwoPi * std::sin(p1) - sig.a * w2 * std::sin(p2);
    d.xdd = -kTwoPi * kTwoPi * std::cos(p1) - sig.a * w2 * w2 * std::cos(p2);
    return d;
}

std::vector<Extremum> find_extrema(const TwoToneSignal& sig, double lo,
                                   double hi) {
    if (!(hi > lo)) return {};
    const double f_fast = std::max(1.0, sig.f);
    const std::size_t n_grid = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::ceil(64.0 * f_fast * (hi - lo))));
    auto xd = [&sig](double t) { return evaluate(sig, t).xd; };
    std::vector<Extremum> out;
    auto classify = [&sig](double t) {
        const double xdd = evaluate(sig, t).xdd;
        // curvature below grid-scale noise: root sits next to an inflection
        const double scale = kTwoPi * kTwoPi * (1.0 + sig.a * sig.f * sig.f);
        if (std::abs(xdd) < 1e-7 * scale) return ExtremumKind::InflectionAdjacent;
        return xdd > 0.0 ? ExtremumKind::Minimum : ExtremumKind::Maximum;
    };
    double t0 = lo, g0 = xd(t0);
    for (std::size_t k = 1; k <= n_grid; ++k) {
        const double t1 = lo + (hi - lo) * static_cast<double>(k) / n_grid;
        const double g1 = xd(t1);
        if (g0 == 0.0) {
            out.push_back({t0, classify(t0)});
        } else if (g0 * g1 < 0.0) {
            double a = t0, b = t1, fa = g0;
            while (b - a > 1e-12) {
                const double m = 0.5 * (a + b);
                const double fm = xd(m);
                if (fa * fm <= 0.0) {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            const double root = 0.5 * (a + b);
            out.push_back({root, classify(root)});
        }
        t0 = t1;
        g0 = g1;
    }
    if (g0 == 0.0) out.push_back({t0, classify(t0)});
    return out;
}

NegativityBounds negativity_bounds(const TwoToneSignal& sig, double t) {
    const double c1 = std::cos(kTwoPi * t);
    return {-c1 / sig.a, -c1 / (sig.a * sig.f * sig.f)};
}

bool is_negative_at_extremum(const TwoToneSignal& sig, double t0) {
    const SignalDerivatives d = evaluate(sig, t0);
    const double xd_scale = kTwoPi * (1.0 + sig.a * sig.f);
    if (std::abs(d.xd) > 1e-9 * xd_scale)
        throw std::invalid_argument("t0 is not an extremum of the signal");
    const double c1 = std::cos(kTwoPi * t0);
    const double c2 = std::cos(kTwoPi * sig.f * t0 + sig.theta0);
    const double f2 = sig.f * sig.f;
    // quadratic condition in c2
    const double quad = sig.a * sig.a * f2 * c2 * c2 + c1 * c1 +
                        sig.a * (f2 + 1.0) * c1 * c2;
    const bool by_quadratic = quad <= 0.0;
    // between-bounds route; the quadratic's discriminant a^2 c1^2 (f^2-1)^2
    // is never negative, so the roots y_R, y_G are always real
    const NegativityBounds b = negativity_bounds(sig, t0);
    const double blo = std::min(b.y_R, b.y_G), bhi = std::max(b.y_R, b.y_G);
    const bool by_bounds = c2 >= blo && c2 <= bhi;
    if (by_quadratic != by_bounds) {
        // only possible within rounding of the boundary
        if (std::abs(quad) > 1e-9 * (1.0 + sig.a * sig.a * f2))
            throw std::logic_error("negativity routes disagree away from boundary");
    }
    return by_quadratic;
}

namespace {

ExcursionStats excursions_from_samples(const std::vector<double>& psi,
                                       double step) {
    ExcursionStats st;
    st.zero_crossing_rate = 0.0;
    st.mean_negative_duration = 0.0;
    if (psi.size() < 2) return st;
    std::size_t crossings = 0;
    double neg_start = -1.0;
    bool in_negative = psi[0] < 0.0;
    if (in_negative) neg_start = 0.0;
    for (std::size_t i = 1; i < psi.size(); ++i) {
        const double a = psi[i - 1], b = psi[i];
        if ((a < 0.0) != (b < 0.0)) {
            ++crossings;
            // linear sub-grid crossing location
            const double frac = a / (a - b);
            const double t_cross = (static_cast<double>(i - 1) + frac) * step;
            if (b < 0.0) {
                neg_start = t_cross;
            } else if (neg_start >= 0.0) {
                st.negative_durations.push_back(t_cross - neg_start);
                neg_start = -1.0;
            }
        }
    }
    // an excursion still open at the window end is dropped (unknown length)
    const double duration = static_cast<double>(psi.size() - 1) * step;
    st.zero_crossing_rate = static_cast<double>(crossings) / duration;
    if (!st.negative_durations.empty()) {
        double sum = 0.0;
        for (double d : st.negative_durations) sum += d;
        st.mean_negative_duration = sum / static_cast<double>(st.negative_durations.size());
    }
    return st;
}

} // namespace

ExcursionStats negative_excursion_stats(const TwoToneSignal& sig, double lo,
                                        double hi, double step) {
    const double f_fast = std::max(1.0, sig.f);
    if (step > 1.0 / (64.0 * f_fast))
        throw std::invalid_argument("grid step too coarse for the faster tone");
    std::vector<double> psi;
    for (double t = lo; t <= hi + 0.5 * step; t += step) {
        const SignalDerivatives d = evaluate(sig, t);
        psi.push_back(d.xd * d.xd - d.x * d.xdd);
    }
    return excursions_from_samples(psi, step);
}

ExcursionStats negative_excursion_stats(const SampledSignal& path, int refine) {
    const SampledSignal d1 = interpolate_derivative(path, refine);
    const SampledSignal d2 = interpolate_derivative(d1, refine);
    // d1 is trimmed by one support width on each side, d2 by two
    const std::size_t trim = (path.samples.size() - d2.samples.size()) / 2;
    const std::size_t trim1 = (path.samples.size() - d1.samples.size()) / 2;
    std::vector<double> psi(d2.samples.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double x = path.samples[i + trim];
        const double xd = d1.samples[i + trim - trim1];
        const double xdd = d2.samples[i];
        psi[i] = xd * xd - x * xdd;
    }
    return excursions_from_samples(psi, 1.0 / path.fs);
}

} // namespace tkostat
