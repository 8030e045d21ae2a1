#include "tkostat/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <thread>

namespace tkostat {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 partition_engine(std::uint64_t seed, std::size_t partition) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(partition + 1)));
}

std::size_t worker_count(std::size_t n_partitions) {
    std::size_t w = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("TKO_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) w = static_cast<std::size_t>(v);
    }
    return std::clamp<std::size_t>(w, 1, n_partitions);
}

// Runs fn(partition) for every partition, possibly in parallel; each call
// writes only to its own output slot, so scheduling cannot affect results.
template <typename Fn>
void for_each_partition(std::size_t n_partitions, Fn&& fn) {
    const std::size_t workers = worker_count(n_partitions);
    if (workers <= 1) {
        for (std::size_t p = 0; p < n_partitions; ++p) fn(p);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t p = next.fetch_add(1);
                if (p >= n_partitions) return;
                fn(p);
            }
        });
    }
    for (auto& t : pool) t.join();
}

struct PowerSums {
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    std::size_t n = 0;
    void add(double v) {
        const double v2 = v * v;
        s1 += v;
        s2 += v2;
        s3 += v2 * v;
        s4 += v2 * v2;
        ++n;
    }
    PowerSums& operator+=(const PowerSums& o) {
        s1 += o.s1;
        s2 += o.s2;
        s3 += o.s3;
        s4 += o.s4;
        n += o.n;
        return *this;
    }
    PowerSums minus(const PowerSums& o) const {
        PowerSums r = *this;
        r.s1 -= o.s1;
        r.s2 -= o.s2;
        r.s3 -= o.s3;
        r.s4 -= o.s4;
        r.n -= o.n;
        return r;
    }
};

struct KStats {
    double k1, k2, k3, k4;
};

KStats k_statistics(const PowerSums& ps) {
    const double n = static_cast<double>(ps.n);
    const double mean = ps.s1 / n;
    const double m2 = ps.s2 / n - mean * mean;
    const double m3 = ps.s3 / n - 3.0 * mean * ps.s2 / n + 2.0 * mean * mean * mean;
    const double m4 = ps.s4 / n - 4.0 * mean * ps.s3 / n +
                      6.0 * mean * mean * ps.s2 / n - 3.0 * std::pow(mean, 4);
    KStats k;
    k.k1 = mean;
    k.k2 = n / (n - 1.0) * m2;
    k.k3 = n * n / ((n - 1.0) * (n - 2.0)) * m3;
    k.k4 = n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) /
           ((n - 1.0) * (n - 2.0) * (n - 3.0));
    return k;
}

std::size_t partition_size(std::size_t total, std::size_t n_partitions,
                           std::size_t p) {
    const std::size_t base = total / n_partitions;
    return base + (p < total % n_partitions ? 1 : 0);
}

// in-place radix-2 FFT, n a power of two; inverse via sign
void fft(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

} // namespace

Histogram make_histogram(const std::vector<double>& samples, std::size_t bins,
                         std::optional<std::pair<double, double>> range) {
    if (samples.empty()) throw std::invalid_argument("no samples to histogram");
    double lo, hi;
    if (range) {
        lo = range->first;
        hi = range->second;
    } else {
        lo = *std::min_element(samples.begin(), samples.end());
        hi = *std::max_element(samples.begin(), samples.end());
        const double pad = 1e-9 * (hi - lo + 1.0);
        lo -= pad;
        hi += pad;
    }
    if (bins == 0) {
        // Freedman-Diaconis width from a pilot subset, then fixed
        std::vector<double> pilot(samples.begin(),
                                  samples.begin() +
                                      std::min<std::size_t>(samples.size(), 10000));
        std::sort(pilot.begin(), pilot.end());
        const double q1 = pilot[pilot.size() / 4];
        const double q3 = pilot[(3 * pilot.size()) / 4];
        const double iqr = std::max(q3 - q1, 1e-12);
        const double width =
            2.0 * iqr / std::cbrt(static_cast<double>(samples.size()));
        bins = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::ceil((hi - lo) / width)), 16, 512);
    }
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    for (double v : samples) {
        if (v < lo || v >= hi) {
            ++h.out_of_range;
            continue;
        }
        auto idx = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        if (idx >= bins) idx = bins - 1;
        ++counts[idx];
    }
    h.total_count = samples.size();
    h.density.resize(bins);
    const double bin_w = (hi - lo) / static_cast<double>(bins);
    const double in_range = static_cast<double>(samples.size() - h.out_of_range);
    for (std::size_t i = 0; i < bins; ++i)
        h.density[i] = in_range > 0
                           ? static_cast<double>(counts[i]) / (in_range * bin_w)
                           : 0.0;
    return h;
}

QuadformSample sample_quadform(const GaussianVectorModel& model,
                               const Eigen::MatrixXd& J, const McConfig& cfg) {
    const int d = model.dim();
    const Eigen::MatrixXd L = model.M.llt().matrixL();
    std::vector<PowerSums> sums(cfg.n_partitions);
    std::vector<std::vector<double>> values(cfg.n_partitions);
    for_each_partition(cfg.n_partitions, [&](std::size_t p) {
        auto eng = partition_engine(cfg.seed, p);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const std::size_t np = partition_size(cfg.n_samples, cfg.n_partitions, p);
        values[p].reserve(np);
        Eigen::VectorXd z(d);
        for (std::size_t i = 0; i < np; ++i) {
            for (int k = 0; k < d; ++k) z[k] = gauss(eng);
            const Eigen::VectorXd x = model.mu + L * z;
            const double v = x.dot(J * x);
            sums[p].add(v);
            values[p].push_back(v);
        }
    });
    PowerSums total;
    for (const auto& s : sums) total += s;
    const KStats k = k_statistics(total);

    // jackknife-over-partitions standard errors
    const std::size_t g = cfg.n_partitions;
    std::vector<KStats> loo(g);
    for (std::size_t p = 0; p < g; ++p) loo[p] = k_statistics(total.minus(sums[p]));
    auto jackknife_se = [g, &loo](double full, auto member) {
        double mean = 0.0;
        for (const auto& s : loo) mean += s.*member;
        mean /= static_cast<double>(g);
        double ss = 0.0;
        for (const auto& s : loo) {
            const double d2 = s.*member - mean;
            ss += d2 * d2;
        }
        (void)full;
        return std::sqrt(static_cast<double>(g - 1) / static_cast<double>(g) * ss);
    };

    std::vector<double> all;
    all.reserve(cfg.n_samples);
    for (const auto& v : values) all.insert(all.end(), v.begin(), v.end());

    QuadformSample out;
    out.stats = {k.k1,
                 k.k2,
                 k.k3,
                 k.k4,
                 jackknife_se(k.k1, &KStats::k1),
                 jackknife_se(k.k2, &KStats::k2),
                 jackknife_se(k.k3, &KStats::k3),
                 jackknife_se(k.k4, &KStats::k4),
                 total.n};
    out.histogram = make_histogram(all, cfg.histogram_bins);
    return out;
}

RatioSample sample_ratio(const GaussianVectorModel& model,
                         const Eigen::MatrixXd& J_num,
                         const Eigen::MatrixXd& J_den,
                         std::optional<double> threshold, const McConfig& cfg,
                         std::optional<std::pair<double, double>> range,
                         bool square_numerator) {
    const int d = model.dim();
    const double tau = threshold.value_or(0.0);
    const Eigen::MatrixXd L = model.M.llt().matrixL();
    std::vector<std::vector<double>> ratios(cfg.n_partitions);
    for_each_partition(cfg.n_partitions, [&](std::size_t p) {
        auto eng = partition_engine(cfg.seed, p);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const std::size_t np = partition_size(cfg.n_samples, cfg.n_partitions, p);
        Eigen::VectorXd z(d);
        for (std::size_t i = 0; i < np; ++i) {
            for (int k = 0; k < d; ++k) z[k] = gauss(eng);
            const Eigen::VectorXd x = model.mu + L * z;
            double v1 = x.dot(J_num * x);
            const double v2 = x.dot(J_den * x);
            if (square_numerator) v1 *= v1;
            if (v2 > tau) ratios[p].push_back(v1 / v2);
        }
    });
    std::vector<double> all;
    for (const auto& r : ratios) all.insert(all.end(), r.begin(), r.end());
    if (all.empty())
        throw std::runtime_error("no samples accepted above the denominator threshold");
    RatioSample out;
    out.accepted = all.size();
    const double n = static_cast<double>(cfg.n_samples);
    out.acceptance_rate = static_cast<double>(all.size()) / n;
    out.acceptance_se =
        std::sqrt(out.acceptance_rate * (1.0 - out.acceptance_rate) / n);
    double mean = 0.0;
    for (double r : all) mean += r;
    mean /= static_cast<double>(all.size());
    double var = 0.0;
    for (double r : all) var += (r - mean) * (r - mean);
    var /= std::max<double>(1.0, static_cast<double>(all.size()) - 1.0);
    out.mean = mean;
    out.variance = var;
    out.histogram = make_histogram(all, cfg.histogram_bins, range);
    return out;
}

SampledSignal sample_noise_path(const CovarianceKernel& cov, double duration,
                                double fs, const McConfig& cfg,
                                bool* used_fallback) {
    const auto n = static_cast<std::size_t>(std::llround(duration * fs));
    if (n < 2) throw std::invalid_argument("path too short");
    if (static_cast<double>(n) > 1e7)
        throw std::invalid_argument("path exceeds the 1e7 sample memory guard");
    if (used_fallback) *used_fallback = false;

    std::size_t m = 1;
    while (m < 2 * (n - 1)) m <<= 1;
    std::vector<std::complex<double>> c(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t lag = std::min(j, m - j);
        c[j] = cov(static_cast<double>(lag) / fs);
    }
    fft(c, false);
    double min_eig = c[0].real(), max_eig = c[0].real();
    for (const auto& e : c) {
        min_eig = std::min(min_eig, e.real());
        max_eig = std::max(max_eig, e.real());
    }
    SampledSignal out;
    out.fs = fs;
    out.samples.resize(n);
    auto eng = partition_engine(cfg.seed, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    if (min_eig < -1e-10 * max_eig) {
        // embedding not nonnegative definite: dense Cholesky fallback
        if (n > 10000)
            throw std::runtime_error(
                "circulant embedding failed and the path is too long for the "
                "dense fallback");
        if (used_fallback) *used_fallback = true;
        Eigen::MatrixXd M(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                M(i, j) = cov((static_cast<double>(i) - static_cast<double>(j)) / fs);
        const Eigen::MatrixXd L = M.llt().matrixL();
        Eigen::VectorXd z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = gauss(eng);
        const Eigen::VectorXd path = L * z;
        for (std::size_t i = 0; i < n; ++i) out.samples[i] = path[i];
        return out;
    }

    std::vector<std::complex<double>> xi(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double w = std::sqrt(std::max(0.0, c[j].real()) /
                                   static_cast<double>(m));
        xi[j] = std::complex<double>(gauss(eng), gauss(eng)) * w;
    }
    fft(xi, false);
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = xi[i].real();
    return out;
}

} // namespace tkostat
