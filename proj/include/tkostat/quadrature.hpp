#ifndef TKOSTAT_QUADRATURE_HPP
#define TKOSTAT_QUADRATURE_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <queue>
#include <vector>

namespace tkostat {

// Globally adaptive Gauss-Kronrod 7-15 quadrature on a finite interval.
// The worst interval (by Kronrod error estimate) is bisected until the
// accumulated error estimate meets the tolerance or the interval budget
// is exhausted.

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // achieved error estimate
    bool converged = false;
    std::size_t evaluations = 0;
};

namespace detail {

// QUADPACK 15-point Kronrod rule with embedded 7-point Gauss rule
inline constexpr double gk_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr double gk_wk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr double gk_wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
inline void gk15(const F& f, double a, double b, double& result, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    const double fc = f(c);
    resk += gk_wk[7] * fc;
    resg += gk_wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double x = h * gk_nodes[j];
        const double fsum = f(c - x) + f(c + x);
        resk += gk_wk[j] * fsum;
        if (j % 2 == 1) resg += gk_wg[j / 2] * fsum;
    }
    result = resk * h;
    err = std::abs((resk - resg) * h);
}

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

} // namespace detail

template <typename F>
QuadResult integrate_adaptive(const F& f, double a, double b, double abs_tol,
                              double rel_tol = 1e-12,
                              std::size_t max_intervals = 4000) {
    QuadResult out;
    std::priority_queue<detail::Interval> heap;
    detail::Interval root{a, b, 0.0, 0.0};
    detail::gk15(f, a, b, root.value, root.error);
    out.evaluations = 15;
    heap.push(root);
    double total = root.value, total_err = root.error;
    std::size_t n = 1;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) &&
           n < max_intervals) {
        detail::Interval worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (m <= worst.a || m >= worst.b) { // interval at machine resolution
            heap.push(detail::Interval{worst.a, worst.b, worst.value, 0.0});
            total_err -= worst.error;
            continue;
        }
        detail::Interval left{worst.a, m, 0.0, 0.0}, right{m, worst.b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.value, left.error);
        detail::gk15(f, right.a, right.b, right.value, right.error);
        out.evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++n;
    }
    out.value = total;
    out.error = total_err;
    out.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total));
    return out;
}

// Quadrature over [0, b] in dyadic segments anchored at the integrand's
// structure scale: a single adaptive pass over a range many orders of
// magnitude wider than the structure can miss it entirely, because the
// first Gauss-Kronrod panel samples past it and reports a tiny error.
template <typename F>
QuadResult integrate_segmented(const F& f, double b, double scale,
                               double abs_tol,
                               std::size_t max_intervals = 20000) {
    double a = std::min(b, scale);
    int n_seg = 1;
    for (double e = a; e < b; e *= 2.0) ++n_seg;
    const double seg_tol = abs_tol / static_cast<double>(n_seg);
    QuadResult total = integrate_adaptive(f, 0.0, a, seg_tol, 1e-12, max_intervals);
    while (a < b) {
        const double hi = std::min(2.0 * a, b);
        const QuadResult part =
            integrate_adaptive(f, a, hi, seg_tol, 1e-12, max_intervals);
        total.value += part.value;
        total.error += part.error;
        total.converged = total.converged && part.converged;
        total.evaluations += part.evaluations;
        a = hi;
    }
    return total;
}

// Complex-valued integrand: integrate real and imaginary parts jointly by
// driving adaptivity with the combined error.
struct QuadResultC {
    std::complex<double> value{0.0, 0.0};
    double error = 0.0;
    bool converged = false;
};

template <typename F>
QuadResultC integrate_adaptive_complex(const F& f, double a, double b,
                                       double abs_tol, double rel_tol = 1e-12,
                                       std::size_t max_intervals = 4000) {
    struct IntervalC {
        double a, b, error;
        std::complex<double> value;
        bool operator<(const IntervalC& o) const { return error < o.error; }
    };
    auto gk = [&f](double lo, double hi, std::complex<double>& val, double& err) {
        const double c = 0.5 * (lo + hi);
        const double h = 0.5 * (hi - lo);
        std::complex<double> resk{0.0, 0.0}, resg{0.0, 0.0};
        const std::complex<double> fc = f(c);
        resk += detail::gk_wk[7] * fc;
        resg += detail::gk_wg[3] * fc;
        for (int j = 0; j < 7; ++j) {
            const double x = h * detail::gk_nodes[j];
            const std::complex<double> fsum = f(c - x) + f(c + x);
            resk += detail::gk_wk[j] * fsum;
            if (j % 2 == 1) resg += detail::gk_wg[j / 2] * fsum;
        }
        val = resk * h;
        err = std::abs((resk - resg) * h);
    };
    std::priority_queue<IntervalC> heap;
    IntervalC root{a, b, 0.0, {}};
    gk(a, b, root.value, root.error);
    heap.push(root);
    std::complex<double> total = root.value;
    double total_err = root.error;
    std::size_t n = 1;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total)) &&
           n < max_intervals) {
        IntervalC worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (m <= worst.a || m >= worst.b) {
            heap.push(IntervalC{worst.a, worst.b, 0.0, worst.value});
            total_err -= worst.error;
            continue;
        }
        IntervalC left{worst.a, m, 0.0, {}}, right{m, worst.b, 0.0, {}};
        gk(left.a, left.b, left.value, left.error);
        gk(right.a, right.b, right.value, right.error);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++n;
    }
    QuadResultC out;
    out.value = total;
    out.error = total_err;
    out.converged = total_err <= std::max(abs_tol, rel_tol * std::abs(total));
    return out;
}

} // namespace tkostat

#endif
