#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tkostat/esa.hpp"
#include "tkostat/gaussian_model.hpp"
#include "tkostat/kernels.hpp"
#include "tkostat/mc.hpp"
#include "tkostat/quadform.hpp"
#include "tkostat/ratio.hpp"
#include "tkostat/two_tone.hpp"

using json = nlohmann::ordered_json;
using namespace tkostat;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// one table: header row plus columns of equal length
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::string to_csv() const {
        std::ostringstream os;
        for (std::size_t c = 0; c < header.size(); ++c)
            os << header[c] << (c + 1 < header.size() ? "," : "\n");
        const std::size_t rows = columns.empty() ? 0 : columns[0].size();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < columns.size(); ++c)
                os << fmt(columns[c][r]) << (c + 1 < columns.size() ? "," : "\n");
        return os.str();
    }

    json to_json() const {
        json j = json::object();
        for (std::size_t c = 0; c < header.size(); ++c) j[header[c]] = columns[c];
        return j;
    }
};

void write_atomic(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    const std::filesystem::path target(path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open output file: " + tmp.string());
        os << content;
    }
    std::filesystem::rename(tmp, target);
}

// path with an extra suffix before the extension, for secondary tables
std::string derived_path(const std::string& path, const std::string& tag) {
    if (path.empty() || path == "-") return path;
    const std::filesystem::path p(path);
    std::filesystem::path out = p.parent_path() / p.stem();
    out += "_" + tag;
    out += p.extension();
    return out.string();
}

struct OutputOptions {
    std::string path = "-";
    std::string format = "csv";
};

void add_output_options(CLI::App* cmd, OutputOptions& out) {
    cmd->add_option("-o,--out", out.path, "output path ('-' for stdout)");
    cmd->add_option("--format", out.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
}

void emit(const OutputOptions& out, const Table& table, const json& meta,
          const std::vector<std::pair<std::string, Table>>& extra_tables = {}) {
    if (out.format == "json") {
        json doc;
        doc["tool"] = "tko";
        doc["version"] = kVersion;
        doc["meta"] = meta;
        doc["data"] = table.to_json();
        for (const auto& [tag, t] : extra_tables) doc[tag] = t.to_json();
        write_atomic(out.path, doc.dump(2) + "\n");
    } else {
        write_atomic(out.path, table.to_csv());
        for (const auto& [tag, t] : extra_tables)
            write_atomic(derived_path(out.path, tag), t.to_csv());
    }
}

struct KernelOptions {
    int p = 0;
    int q = 1;
    double T = 1.0;
};

void add_kernel_options(CLI::App* cmd, KernelOptions& k) {
    cmd->add_option("-p,--p", k.p, "inner delay p (samples)");
    cmd->add_option("-q,--q", k.q, "outer delay q (samples)");
    cmd->add_option("-T,--sample-time", k.T, "sample spacing T (s)");
}

struct ModelOptions {
    double amp = 1.0;
    double omega = 0.4; // rad/s
    double phase = 0.0;
    double center = 0.0;
    double snr_db = 17.0;
    double c = 0.5;
};

void add_model_options(CLI::App* cmd, ModelOptions& m) {
    cmd->add_option("--amp", m.amp, "tone amplitude");
    cmd->add_option("--omega", m.omega, "tone frequency (rad/s)");
    cmd->add_option("--phase", m.phase, "tone phase (rad)");
    cmd->add_option("--center", m.center, "tap window center time (s)");
    cmd->add_option("--snr-db", m.snr_db,
                    "input SNR (dB); noise power = (amp^2/2) 10^(-SNR/10)");
    cmd->add_option("-c,--decay", m.c, "noise covariance decay parameter");
}

double noise_scale(const ModelOptions& m) {
    // signal power is the mean square over one period
    return (m.amp * m.amp / 2.0) * std::pow(10.0, -m.snr_db / 10.0);
}

GaussianVectorModel build_model(const ModelOptions& m, const OperatorKernel& kernel) {
    const CovarianceKernel cov{m.c, noise_scale(m)};
    std::vector<double> times = kernel.tap_times();
    for (double& t : times) t += m.center;
    const Eigen::VectorXd mu = signal_tap_vector(
        [&m](double t) { return m.amp * std::cos(m.omega * t + m.phase); },
        m.center, kernel);
    return GaussianVectorModel(mu, build_covariance(cov, times), cov.scale);
}

json model_meta(const ModelOptions& m, const KernelOptions& k) {
    json j;
    j["kernel"] = {{"p", k.p}, {"q", k.q}, {"T", k.T}};
    j["signal"] = {{"amp", m.amp}, {"omega", m.omega}, {"phase", m.phase},
                   {"center", m.center}};
    j["noise"] = {{"c", m.c}, {"snr_db", m.snr_db}, {"scale", noise_scale(m)}};
    return j;
}

json cumulant_report(const GaussianVectorModel& model, const Eigen::MatrixXd& J) {
    const CumulantSet cum = cumulants(model.mu, model.M, J);
    const SpectralDecomposition dec = decompose(model, J);
    const CumulantSet noise =
        cumulants(Eigen::VectorXd::Zero(model.dim()), model.M, J);
    json j;
    j["eigenvalues"] = std::vector<double>(
        dec.lambdas.data(), dec.lambdas.data() + dec.lambdas.size());
    j["noncentralities"] =
        std::vector<double>(dec.s.data(), dec.s.data() + dec.s.size());
    j["kappa"] = {cum.kappa_s(1), cum.kappa_s(2), cum.kappa_s(3), cum.kappa_s(4)};
    j["rho3"] = cum.rho_s(3);
    j["rho4"] = cum.rho_s(4);
    j["kappa1_noise_only"] = noise.kappa_s(1);
    j["output_snr_db"] = 10.0 * std::log10(cum.kappa_s(1) / noise.kappa_s(1));
    return j;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

std::vector<double> read_sample_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot read input file: " + path);
    std::vector<double> samples;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        try {
            samples.push_back(std::stod(line));
        } catch (const std::exception&) {
            if (samples.empty()) continue; // header row
            throw std::invalid_argument("non-numeric sample line: " + line);
        }
    }
    if (samples.empty()) throw std::invalid_argument("no samples in " + path);
    return samples;
}

double grid_quantile(const std::vector<double>& values,
                     const std::vector<double>& pdf, double prob) {
    // trapezoid cdf inversion on the grid
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        total += 0.5 * (pdf[i] + pdf[i + 1]) * (values[i + 1] - values[i]);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double cell = 0.5 * (pdf[i] + pdf[i + 1]) * (values[i + 1] - values[i]);
        if (acc + cell >= prob * total) {
            const double frac = (prob * total - acc) / cell;
            return values[i] + frac * (values[i + 1] - values[i]);
        }
        acc += cell;
    }
    return values.back();
}

// ---------------------------------------------------------------------------

int cmd_freq_response(const KernelOptions& k, double w_min, double w_max,
                      std::size_t points, const OutputOptions& out) {
    const OperatorKernel kernel(k.p, k.q, k.T);
    Table t;
    t.header = {"omega_rad_per_s", "response"};
    t.columns.resize(2);
    for (double w : linspace(w_min, w_max, points)) {
        t.columns[0].push_back(w);
        t.columns[1].push_back(freq_response(kernel, w));
    }
    json meta;
    meta["kernel"] = {{"p", k.p}, {"q", k.q}, {"T", k.T}};
    meta["omega_grid"] = {{"min", w_min}, {"max", w_max}, {"points", points}};
    emit(out, t, meta);
    return 0;
}

struct DistOptions {
    double v_min = 0.0;
    double v_max = 10.0;
    std::size_t points = 200;
    double tol = 1e-5;
    bool validate = false;
    std::uint64_t seed = 0;
    std::size_t mc_samples = 100000;
};

int cmd_dist(bool want_pdf, const KernelOptions& k, const ModelOptions& m,
             const DistOptions& d, const OutputOptions& out) {
    const OperatorKernel kernel(k.p, k.q, k.T);
    const GaussianVectorModel model = build_model(m, kernel);
    const double N0 = model.N0;
    // work in noise-power units U = V/N0, through the rescaled model
    // (mu/sqrt(N0), M/N0), so the inversion tolerances apply to O(1) values
    const ChfEvaluator chf = ChfEvaluator::from_matrix(
        model.mu / std::sqrt(N0), model.M / N0, kernel.J());

    const std::vector<double> grid = linspace(d.v_min, d.v_max, d.points);
    Table t;
    json meta = model_meta(m, k);
    meta["report"] = cumulant_report(model, kernel.J());
    meta["value_units"] = "output normalized by the noise power into the detector";
    if (want_pdf) {
        const DensityGrid g = pdf_numeric(grid, chf, d.tol);
        t.header = {"v_over_N0", "pdf"};
        t.columns.resize(2);
        t.columns[0] = grid;
        t.columns[1] = g.pdf;
        meta["normalization_error"] = g.meta.normalization_error;
        meta["clamped_mass"] = g.meta.clamp_total;
        meta["flagged"] = g.meta.flagged;
    } else {
        t.header = {"v_over_N0", "cdf"};
        t.columns.resize(2);
        t.columns[0] = grid;
        for (double u : grid) t.columns[1].push_back(cdf_gil_pelaez(u, chf, d.tol));
    }
    if (d.validate) {
        McConfig cfg;
        cfg.seed = d.seed;
        cfg.n_samples = d.mc_samples;
        cfg.histogram_bins = d.points > 1 ? d.points - 1 : 1;
        const QuadformSample mc = sample_quadform(model, kernel.J(), cfg);
        const CumulantSet cum = cumulants(model.mu, model.M, kernel.J());
        json v;
        v["z_scores"] = {(cum.kappa_s(1) - mc.stats.k1) / mc.stats.se_k1,
                         (cum.kappa_s(2) - mc.stats.k2) / mc.stats.se_k2,
                         (cum.kappa_s(3) - mc.stats.k3) / mc.stats.se_k3,
                         (cum.kappa_s(4) - mc.stats.k4) / mc.stats.se_k4};
        if (want_pdf) {
            // L1 distance between the analytic pdf and the MC histogram,
            // both restricted to the grid range (in V/N0 units)
            double l1 = 0.0;
            for (std::size_t i = 0; i + 1 < mc.histogram.edges.size(); ++i) {
                const double lo = mc.histogram.edges[i] / N0;
                const double hi = mc.histogram.edges[i + 1] / N0;
                const double mid = 0.5 * (lo + hi);
                if (mid < d.v_min || mid > d.v_max) continue;
                const double f = pdf_point_numeric(mid, chf, d.tol);
                l1 += std::abs(f - mc.histogram.density[i] * N0) * (hi - lo);
            }
            v["pdf_l1_distance"] = l1;
        }
        v["seed"] = d.seed;
        v["n_samples"] = d.mc_samples;
        meta["mc_validation"] = v;
    }
    emit(out, t, meta);
    return 0;
}

int cmd_cumulants(const KernelOptions& k, const ModelOptions& m,
                  const OutputOptions& out) {
    const OperatorKernel kernel(k.p, k.q, k.T);
    const GaussianVectorModel model = build_model(m, kernel);
    const json report = cumulant_report(model, kernel.J());
    if (out.format == "json") {
        json doc;
        doc["tool"] = "tko";
        doc["version"] = kVersion;
        doc["meta"] = model_meta(m, k);
        doc["report"] = report;
        write_atomic(out.path, doc.dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << "quantity,value\n";
        const auto& lam = report["eigenvalues"];
        for (std::size_t i = 0; i < lam.size(); ++i)
            os << "lambda_" << i + 1 << "," << fmt(lam[i].get<double>()) << "\n";
        for (int s = 1; s <= 4; ++s)
            os << "kappa_" << s << ","
               << fmt(report["kappa"][static_cast<std::size_t>(s - 1)].get<double>())
               << "\n";
        os << "rho_3," << fmt(report["rho3"].get<double>()) << "\n";
        os << "rho_4," << fmt(report["rho4"].get<double>()) << "\n";
        os << "output_snr_db," << fmt(report["output_snr_db"].get<double>()) << "\n";
        write_atomic(out.path, os.str());
    }
    return 0;
}

struct RatioOptions {
    double r_min = 0.01;
    double r_max = 1.0;
    std::size_t points = 120;
    std::optional<double> threshold;
    std::uint64_t seed = 0;
    std::size_t mc_samples = 200000;
};

int cmd_ratio(const KernelOptions& k, const ModelOptions& m, const RatioOptions& r,
              const OutputOptions& out) {
    const OperatorKernel kernel(k.p, k.q, k.T);
    const CovarianceKernel cov{m.c, noise_scale(m)};
    const JointSignalDerivativeModel jm = build_joint_signal_derivative_model(
        cov,
        [&m](double t) { return m.amp * std::cos(m.omega * t + m.phase); },
        [&m](double t) { return -m.amp * m.omega * std::sin(m.omega * t + m.phase); },
        m.center, kernel);
    const std::vector<double> grid = linspace(r.r_min, r.r_max, r.points);
    const RatioSpec spec(jm.J_num, jm.J_den, jm.model, r.threshold);

    Table t;
    t.header = {"r", "pdf"};
    t.columns.resize(2);
    t.columns[0] = grid;
    json meta = model_meta(m, k);
    meta["ratio"] = "operator on derivative over operator on signal";
    if (r.threshold) {
        McConfig cfg;
        cfg.seed = r.seed;
        cfg.n_samples = r.mc_samples;
        const DensityGrid g = ratio_pdf_conditioned(grid, spec, cfg);
        t.columns[1] = g.pdf;
        meta["route"] = "conditioned Monte Carlo";
        meta["threshold"] = *r.threshold;
        meta["seed"] = r.seed;
        meta["mc_se"] = g.meta.mc_se;
        meta["out_of_range_fraction"] = g.meta.normalization_error;
        const RatioSample acc = sample_ratio(jm.model, jm.J_num, jm.J_den,
                                             r.threshold, cfg);
        meta["acceptance_rate"] = acc.acceptance_rate;
        meta["acceptance_se"] = acc.acceptance_se;
    } else {
        const DensityGrid g = ratio_pdf_geary(grid, spec);
        t.columns[1] = g.pdf;
        meta["route"] = "contour integral";
        meta["clamped_mass"] = g.meta.clamp_total;
        meta["flagged"] = g.meta.flagged;
    }
    meta["iqr"] = grid_quantile(grid, t.columns[1], 0.75) -
                  grid_quantile(grid, t.columns[1], 0.25);
    emit(out, t, meta);
    return 0;
}

struct TwoToneOptions {
    double a = 0.6;
    double f = 2.3;
    double theta0 = 0.0;
    double t0 = 0.0;
    double t1 = 10.0;
    double step = 1e-3;
};

int cmd_two_tone(const TwoToneOptions& o, const OutputOptions& out) {
    const TwoToneSignal sig(o.a, o.f, o.theta0);
    Table curves;
    curves.header = {"t_s", "x", "x_dot", "x_ddot", "psi", "y_R", "y_G", "negative"};
    curves.columns.resize(8);
    const auto n =
        static_cast<std::size_t>(std::floor((o.t1 - o.t0) / o.step)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = o.t0 + static_cast<double>(i) * o.step;
        const SignalDerivatives d = evaluate(sig, t);
        const double psi = d.xd * d.xd - d.x * d.xdd;
        const NegativityBounds b = o.a > 0.0 ? negativity_bounds(sig, t)
                                             : NegativityBounds{0.0, 0.0};
        curves.columns[0].push_back(t);
        curves.columns[1].push_back(d.x);
        curves.columns[2].push_back(d.xd);
        curves.columns[3].push_back(d.xdd);
        curves.columns[4].push_back(psi);
        curves.columns[5].push_back(b.y_R);
        curves.columns[6].push_back(b.y_G);
        curves.columns[7].push_back(psi < 0.0 ? 1.0 : 0.0);
    }

    Table extrema;
    extrema.header = {"t_s", "kind_min0_max1_flat2", "operator_negative"};
    extrema.columns.resize(3);
    for (const Extremum& e : find_extrema(sig, o.t0, o.t1)) {
        extrema.columns[0].push_back(e.t);
        extrema.columns[1].push_back(static_cast<double>(e.kind));
        extrema.columns[2].push_back(is_negative_at_extremum(sig, e.t) ? 1.0 : 0.0);
    }

    // the excursion scan needs a step resolving the faster tone even when the
    // table grid is coarse
    const double scan_step =
        std::min(o.step, 1.0 / (128.0 * std::max(1.0, o.f)));
    const ExcursionStats stats =
        negative_excursion_stats(sig, o.t0, o.t1, scan_step);
    json meta;
    meta["signal"] = {{"a", o.a}, {"f", o.f}, {"theta0", o.theta0}};
    meta["window"] = {{"t0", o.t0}, {"t1", o.t1}, {"step", o.step}};
    meta["excursions"] = {
        {"zero_crossing_rate", stats.zero_crossing_rate},
        {"count", stats.negative_durations.size()},
        {"mean_negative_duration", stats.mean_negative_duration}};
    emit(out, curves, meta, {{"extrema", extrema}});
    return 0;
}

struct EsaOptions {
    std::string input;
    double fs = 1.0;
    double amp = 1.0;
    double omega = 0.1;
    double phase = 0.0;
    std::size_t n = 4000;
    std::optional<double> snr_db;
    double c = 0.5;
    std::uint64_t seed = 0;
    double threshold = 0.0;
    int refine = 8;
    bool filter = false;
};

int cmd_esa(const EsaOptions& o, const KernelOptions& k, const OutputOptions& out) {
    const OperatorKernel kernel(k.p, k.q, k.T);
    SampledSignal signal;
    json meta;
    if (!o.input.empty()) {
        signal.samples = read_sample_file(o.input);
        signal.fs = o.fs;
        meta["input"] = o.input;
    } else {
        signal.fs = o.fs;
        signal.samples.resize(o.n);
        for (std::size_t i = 0; i < o.n; ++i) {
            const double t = static_cast<double>(i) / o.fs;
            signal.samples[i] = o.amp * std::cos(o.omega * t + o.phase);
        }
        meta["signal"] = {{"amp", o.amp}, {"omega", o.omega}, {"phase", o.phase},
                          {"n", o.n}};
        if (o.snr_db) {
            const double scale =
                (o.amp * o.amp / 2.0) * std::pow(10.0, -*o.snr_db / 10.0);
            McConfig cfg;
            cfg.seed = o.seed;
            const SampledSignal noise = sample_noise_path(
                CovarianceKernel{o.c, scale},
                static_cast<double>(o.n) / o.fs, o.fs, cfg);
            for (std::size_t i = 0; i < o.n && i < noise.samples.size(); ++i)
                signal.samples[i] += noise.samples[i];
            meta["noise"] = {{"snr_db", *o.snr_db}, {"c", o.c},
                             {"scale", scale}, {"seed", o.seed}};
        }
    }
    meta["fs"] = signal.fs;
    meta["kernel"] = {{"p", k.p}, {"q", k.q}, {"T", k.T}};
    meta["threshold"] = o.threshold;

    const EsaEstimate est = esa_demodulate(signal, kernel, o.threshold, o.refine);
    Table t;
    t.header = {"t_s", "omega_sq", "amp_sq", "valid"};
    t.columns.resize(4);
    for (std::size_t i = 0; i < est.omega_sq.size(); ++i) {
        t.columns[0].push_back(static_cast<double>(i + est.offset) / signal.fs);
        t.columns[1].push_back(est.omega_sq[i]);
        t.columns[2].push_back(est.amp_sq[i]);
        t.columns[3].push_back(est.valid_mask[i] ? 1.0 : 0.0);
    }

    std::vector<std::pair<std::string, Table>> extra;
    if (o.filter) {
        const SampledSignal deriv = interpolate_derivative(signal, o.refine);
        const std::vector<double> psi = apply_tko(deriv, kernel);
        const std::vector<double> smoothed = binomial_filter(psi);
        const std::vector<double> aligned(psi.begin() + 1, psi.end() - 1);
        const PositivityReport rep = positivity_report(aligned, smoothed);
        Table ft;
        ft.header = {"t_s", "psi_deriv", "psi_deriv_filtered"};
        ft.columns.resize(3);
        const std::size_t off = derivative_trim() + static_cast<std::size_t>(k.q) + 1;
        for (std::size_t i = 0; i < smoothed.size(); ++i) {
            ft.columns[0].push_back(static_cast<double>(i + off) / signal.fs);
            ft.columns[1].push_back(aligned[i]);
            ft.columns[2].push_back(smoothed[i]);
        }
        extra.emplace_back("filter", ft);
        meta["positivity"] = {{"frac_neg_before", rep.frac_neg_before},
                              {"frac_neg_after", rep.frac_neg_after}};
    }
    emit(out, t, meta, extra);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Teager-Kaiser operator statistics toolkit"};
    app.require_subcommand(1);

    KernelOptions kern;
    OutputOptions out;

    auto* fr = app.add_subcommand("freq-response", "single-tone response curve");
    double w_min = 0.0, w_max = M_PI;
    std::size_t fr_points = 512;
    add_kernel_options(fr, kern);
    fr->add_option("--w-min", w_min, "grid start (rad/s)");
    fr->add_option("--w-max", w_max, "grid end (rad/s)");
    fr->add_option("--points", fr_points, "grid points");
    add_output_options(fr, out);

    ModelOptions model;
    DistOptions dist;
    auto add_dist = [&](CLI::App* cmd) {
        add_kernel_options(cmd, kern);
        add_model_options(cmd, model);
        cmd->add_option("--v-min", dist.v_min, "grid start (noise-power units)");
        cmd->add_option("--v-max", dist.v_max, "grid end (noise-power units)");
        cmd->add_option("--points", dist.points, "grid points");
        cmd->add_option("--tol", dist.tol, "inversion tolerance (normalized units)");
        cmd->add_flag("--validate", dist.validate, "attach Monte Carlo comparison");
        cmd->add_option("--seed", dist.seed, "Monte Carlo seed");
        cmd->add_option("--mc-samples", dist.mc_samples, "Monte Carlo sample count");
        add_output_options(cmd, out);
    };
    auto* pdf = app.add_subcommand("pdf", "output density on a value grid");
    add_dist(pdf);
    auto* cdf = app.add_subcommand("cdf", "output distribution on a value grid");
    add_dist(cdf);

    auto* cum = app.add_subcommand("cumulants", "cumulant and eigenvalue report");
    add_kernel_options(cum, kern);
    add_model_options(cum, model);
    add_output_options(cum, out);

    RatioOptions ratio;
    double ratio_threshold = -1.0;
    auto* rat = app.add_subcommand("ratio",
                                   "frequency-squared ratio density");
    add_kernel_options(rat, kern);
    add_model_options(rat, model);
    rat->add_option("--r-min", ratio.r_min, "grid start");
    rat->add_option("--r-max", ratio.r_max, "grid end");
    rat->add_option("--points", ratio.points, "grid points");
    rat->add_option("--threshold", ratio_threshold,
                    "denominator detection threshold (enables the conditioned route)");
    rat->add_option("--seed", ratio.seed, "Monte Carlo seed");
    rat->add_option("--mc-samples", ratio.mc_samples, "Monte Carlo sample count");
    add_output_options(rat, out);

    TwoToneOptions tt;
    auto* two = app.add_subcommand("two-tone", "two-sinusoid operator analysis");
    two->add_option("-a", tt.a, "amplitude ratio");
    two->add_option("-f", tt.f, "frequency ratio");
    two->add_option("--theta0", tt.theta0, "relative phase (rad)");
    two->add_option("--t0", tt.t0, "window start (s)");
    two->add_option("--t1", tt.t1, "window end (s)");
    two->add_option("--step", tt.step, "evaluation step (s)");
    add_output_options(two, out);

    EsaOptions esa;
    double esa_snr = -1e9;
    auto* es = app.add_subcommand("esa", "energy separation demodulation");
    add_kernel_options(es, kern);
    es->add_option("--input", esa.input, "single-column CSV of samples");
    es->add_option("--fs", esa.fs, "sampling rate (Hz)");
    es->add_option("--amp", esa.amp, "tone amplitude");
    es->add_option("--omega", esa.omega, "tone frequency (rad/s)");
    es->add_option("--phase", esa.phase, "tone phase (rad)");
    es->add_option("-n,--samples", esa.n, "generated signal length");
    es->add_option("--snr-db", esa_snr, "add stationary noise at this input SNR");
    es->add_option("-c,--decay", esa.c, "noise covariance decay parameter");
    es->add_option("--seed", esa.seed, "noise path seed");
    es->add_option("--threshold", esa.threshold, "detection threshold");
    es->add_option("--refine", esa.refine, "interpolation refinement factor");
    es->add_flag("--filter", esa.filter, "attach the (1,2,1)/4 smoothing table");
    add_output_options(es, out);

    try {
        app.parse(argc, argv);
        if (fr->parsed())
            return cmd_freq_response(kern, w_min, w_max, fr_points, out);
        if (pdf->parsed()) return cmd_dist(true, kern, model, dist, out);
        if (cdf->parsed()) return cmd_dist(false, kern, model, dist, out);
        if (cum->parsed()) return cmd_cumulants(kern, model, out);
        if (rat->parsed()) {
            if (ratio_threshold >= 0.0) ratio.threshold = ratio_threshold;
            return cmd_ratio(kern, model, ratio, out);
        }
        if (two->parsed()) return cmd_two_tone(tt, out);
        if (es->parsed()) {
            if (esa_snr > -1e8) esa.snr_db = esa_snr;
            return cmd_esa(esa, kern, out);
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const QuadratureNonConvergence& e) {
        std::cerr << "numerical non-convergence: " << e.what()
                  << " (achieved error " << e.achieved_error << ")\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        if (what.find("essentially positive") != std::string::npos) {
            std::cerr << what << "\n"
                      << "hint: rerun with --threshold to condition on denominator "
                         "detection\n";
            return 3;
        }
        std::cerr << what << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 3;
    }
    return 0;
}
