#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tkostat/esa.hpp"
#include "tkostat/gaussian_model.hpp"
#include "tkostat/kernels.hpp"
#include "tkostat/mc.hpp"
#include "tkostat/quadform.hpp"
#include "tkostat/ratio.hpp"
#include "tkostat/two_tone.hpp"

namespace py = pybind11;
using namespace tkostat;

PYBIND11_MODULE(_tkostat, m) {
    m.doc() = "Teager-Kaiser operator statistics: kernels, quadratic-form "
              "distributions, ratio densities, demodulation";

    py::register_exception<QuadratureNonConvergence>(m, "QuadratureNonConvergence");

    py::class_<SampledSignal>(m, "SampledSignal")
        .def(py::init<>())
        .def(py::init([](std::vector<double> samples, double fs) {
                 return SampledSignal{std::move(samples), fs};
             }),
             py::arg("samples"), py::arg("fs") = 1.0)
        .def_readwrite("samples", &SampledSignal::samples)
        .def_readwrite("fs", &SampledSignal::fs);

    py::class_<OperatorKernel>(m, "OperatorKernel")
        .def(py::init<int, int, double>(), py::arg("p"), py::arg("q"),
             py::arg("T") = 1.0)
        .def_property_readonly("p", &OperatorKernel::p)
        .def_property_readonly("q", &OperatorKernel::q)
        .def_property_readonly("T", &OperatorKernel::T)
        .def_property_readonly("dim", &OperatorKernel::dim)
        .def_property_readonly("J", &OperatorKernel::J)
        .def("tap_offsets", &OperatorKernel::tap_offsets)
        .def("tap_times", &OperatorKernel::tap_times);

    m.def("apply_tko", &apply_tko, py::arg("signal"), py::arg("kernel"));
    m.def("freq_response", &freq_response, py::arg("kernel"), py::arg("omega"));
    m.def("discriminator_extrema", &discriminator_extrema, py::arg("kernel"),
          py::arg("lo"), py::arg("hi"));

    py::class_<CovarianceKernel>(m, "CovarianceKernel")
        .def(py::init([](double c, double scale) {
                 return CovarianceKernel{c, scale};
             }),
             py::arg("c") = 0.5, py::arg("scale") = 1.0)
        .def_readwrite("c", &CovarianceKernel::c)
        .def_readwrite("scale", &CovarianceKernel::scale)
        .def("__call__", &CovarianceKernel::operator())
        .def("correlation_time", &CovarianceKernel::correlation_time);

    py::class_<GaussianVectorModel>(m, "GaussianVectorModel")
        .def(py::init<Eigen::VectorXd, Eigen::MatrixXd, double>(), py::arg("mu"),
             py::arg("M"), py::arg("N0") = 1.0)
        .def_readwrite("mu", &GaussianVectorModel::mu)
        .def_readwrite("M", &GaussianVectorModel::M)
        .def_readwrite("N0", &GaussianVectorModel::N0)
        .def_property_readonly("dim", &GaussianVectorModel::dim);

    py::class_<SpectralDecomposition>(m, "SpectralDecomposition")
        .def_readwrite("lambdas", &SpectralDecomposition::lambdas)
        .def_readwrite("s", &SpectralDecomposition::s)
        .def_readwrite("N0", &SpectralDecomposition::N0);

    m.def("build_covariance", &build_covariance, py::arg("kernel"),
          py::arg("tap_times"));
    m.def("decompose", &decompose, py::arg("model"), py::arg("J"));
    m.def("signal_tap_vector", &signal_tap_vector, py::arg("signal"),
          py::arg("center_time"), py::arg("kernel"));

    py::class_<JointSignalDerivativeModel>(m, "JointSignalDerivativeModel")
        .def_readwrite("model", &JointSignalDerivativeModel::model)
        .def_readwrite("J_num", &JointSignalDerivativeModel::J_num)
        .def_readwrite("J_den", &JointSignalDerivativeModel::J_den);
    m.def("build_joint_signal_derivative_model",
          &build_joint_signal_derivative_model, py::arg("cov"), py::arg("signal"),
          py::arg("signal_derivative"), py::arg("center_time"), py::arg("kernel"));

    py::class_<CumulantSet>(m, "CumulantSet")
        .def_readwrite("kappa", &CumulantSet::kappa)
        .def_readwrite("rho", &CumulantSet::rho)
        .def("kappa_s", &CumulantSet::kappa_s)
        .def("rho_s", &CumulantSet::rho_s);
    m.def("cumulants", &cumulants, py::arg("mu"), py::arg("M"), py::arg("J"),
          py::arg("s_max") = 8);

    py::class_<ChfEvaluator> chf(m, "ChfEvaluator");
    py::enum_<ChfEvaluator::Variant>(chf, "Variant")
        .value("Real", ChfEvaluator::Variant::Real)
        .value("Narrowband", ChfEvaluator::Variant::Narrowband);
    chf.def_static("from_matrix", &ChfEvaluator::from_matrix, py::arg("mu"),
                   py::arg("M"), py::arg("J"))
        .def_static("from_diagonal", &ChfEvaluator::from_diagonal,
                    py::arg("decomp"),
                    py::arg("variant") = ChfEvaluator::Variant::Real)
        .def("__call__", &ChfEvaluator::operator())
        .def("kappa", &ChfEvaluator::kappa)
        .def("envelope_bound", &ChfEvaluator::envelope_bound)
        .def("decay_exponent", &ChfEvaluator::decay_exponent);

    py::class_<DensityGridMeta>(m, "DensityGridMeta")
        .def_readwrite("normalization_error", &DensityGridMeta::normalization_error)
        .def_readwrite("clamp_total", &DensityGridMeta::clamp_total)
        .def_readwrite("mc_se", &DensityGridMeta::mc_se)
        .def_readwrite("flagged", &DensityGridMeta::flagged);
    py::class_<DensityGrid>(m, "DensityGrid")
        .def_readwrite("values", &DensityGrid::values)
        .def_readwrite("pdf", &DensityGrid::pdf)
        .def_readwrite("cdf", &DensityGrid::cdf)
        .def_readwrite("meta", &DensityGrid::meta);

    m.def("cdf_gil_pelaez", &cdf_gil_pelaez, py::arg("v"), py::arg("chf"),
          py::arg("tol") = 1e-9);
    m.def("pdf_point_numeric", &pdf_point_numeric, py::arg("v"), py::arg("chf"),
          py::arg("tol") = 1e-8);
    m.def("pdf_numeric", &pdf_numeric, py::arg("grid"), py::arg("chf"),
          py::arg("tol") = 1e-8);
    m.def("pdf_single_lambda", &pdf_single_lambda, py::arg("v"), py::arg("lam"),
          py::arg("s"), py::arg("N0"));
    m.def("pdf_rician_mode", &pdf_rician_mode, py::arg("v"), py::arg("lam"),
          py::arg("s"), py::arg("N0"));
    m.def("pdf_two_pos_two_neg", &pdf_two_pos_two_neg, py::arg("v"),
          py::arg("l1"), py::arg("l2"), py::arg("l3"), py::arg("l4"),
          py::arg("N0"));

    py::class_<RatioSpec>(m, "RatioSpec")
        .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd, GaussianVectorModel,
                      std::optional<double>, bool>(),
             py::arg("J_num"), py::arg("J_den"), py::arg("model"),
             py::arg("threshold") = py::none(),
             py::arg("numerator_squared") = false)
        .def_readwrite("J_num", &RatioSpec::J_num)
        .def_readwrite("J_den", &RatioSpec::J_den)
        .def_readwrite("threshold", &RatioSpec::threshold);
    m.def("joint_chf", &joint_chf, py::arg("xi1"), py::arg("xi2"), py::arg("spec"));
    m.def("ratio_pdf_geary", &ratio_pdf_geary, py::arg("r_grid"), py::arg("spec"),
          py::arg("tol") = 1e-6);
    m.def("ratio_pdf_geary_point", &ratio_pdf_geary_point, py::arg("r"),
          py::arg("spec"), py::arg("tol") = 1e-6);
    m.def("ratio_pdf_conditioned", &ratio_pdf_conditioned, py::arg("r_grid"),
          py::arg("spec"), py::arg("cfg"));
    m.def("envelope_ratio_pdf", &envelope_ratio_pdf, py::arg("r_grid"),
          py::arg("spec"), py::arg("cfg"));

    py::class_<McConfig>(m, "McConfig")
        .def(py::init<>())
        .def_readwrite("seed", &McConfig::seed)
        .def_readwrite("n_samples", &McConfig::n_samples)
        .def_readwrite("n_partitions", &McConfig::n_partitions)
        .def_readwrite("histogram_bins", &McConfig::histogram_bins);
    py::class_<Histogram>(m, "Histogram")
        .def_readwrite("edges", &Histogram::edges)
        .def_readwrite("density", &Histogram::density)
        .def_readwrite("total_count", &Histogram::total_count)
        .def_readwrite("out_of_range", &Histogram::out_of_range);
    py::class_<SampleStats>(m, "SampleStats")
        .def_readonly("k1", &SampleStats::k1)
        .def_readonly("k2", &SampleStats::k2)
        .def_readonly("k3", &SampleStats::k3)
        .def_readonly("k4", &SampleStats::k4)
        .def_readonly("se_k1", &SampleStats::se_k1)
        .def_readonly("se_k2", &SampleStats::se_k2)
        .def_readonly("se_k3", &SampleStats::se_k3)
        .def_readonly("se_k4", &SampleStats::se_k4)
        .def_readonly("n", &SampleStats::n);
    py::class_<QuadformSample>(m, "QuadformSample")
        .def_readonly("stats", &QuadformSample::stats)
        .def_readonly("histogram", &QuadformSample::histogram);
    py::class_<RatioSample>(m, "RatioSample")
        .def_readonly("histogram", &RatioSample::histogram)
        .def_readonly("acceptance_rate", &RatioSample::acceptance_rate)
        .def_readonly("acceptance_se", &RatioSample::acceptance_se)
        .def_readonly("accepted", &RatioSample::accepted)
        .def_readonly("mean", &RatioSample::mean)
        .def_readonly("variance", &RatioSample::variance);

    m.def("sample_quadform", &sample_quadform, py::arg("model"), py::arg("J"),
          py::arg("cfg"));
    m.def(
        "sample_ratio",
        [](const GaussianVectorModel& model, const Eigen::MatrixXd& J_num,
           const Eigen::MatrixXd& J_den, std::optional<double> threshold,
           const McConfig& cfg, std::optional<std::pair<double, double>> range,
           bool square_numerator) {
            return sample_ratio(model, J_num, J_den, threshold, cfg, range,
                                square_numerator);
        },
        py::arg("model"), py::arg("J_num"), py::arg("J_den"),
        py::arg("threshold") = py::none(), py::arg("cfg") = McConfig{},
        py::arg("range") = py::none(), py::arg("square_numerator") = false);
    m.def(
        "sample_noise_path",
        [](const CovarianceKernel& cov, double duration, double fs,
           const McConfig& cfg) {
            return sample_noise_path(cov, duration, fs, cfg);
        },
        py::arg("cov"), py::arg("duration"), py::arg("fs"), py::arg("cfg"));

    py::class_<TwoToneSignal>(m, "TwoToneSignal")
        .def(py::init<double, double, double>(), py::arg("a"), py::arg("f"),
             py::arg("theta0") = 0.0)
        .def_readwrite("a", &TwoToneSignal::a)
        .def_readwrite("f", &TwoToneSignal::f)
        .def_readwrite("theta0", &TwoToneSignal::theta0);
    py::class_<SignalDerivatives>(m, "SignalDerivatives")
        .def_readonly("x", &SignalDerivatives::x)
        .def_readonly("xd", &SignalDerivatives::xd)
        .def_readonly("xdd", &SignalDerivatives::xdd);
    py::enum_<ExtremumKind>(m, "ExtremumKind")
        .value("Minimum", ExtremumKind::Minimum)
        .value("Maximum", ExtremumKind::Maximum)
        .value("InflectionAdjacent", ExtremumKind::InflectionAdjacent);
    py::class_<Extremum>(m, "Extremum")
        .def_readonly("t", &Extremum::t)
        .def_readonly("kind", &Extremum::kind);
    py::class_<NegativityBounds>(m, "NegativityBounds")
        .def_readonly("y_R", &NegativityBounds::y_R)
        .def_readonly("y_G", &NegativityBounds::y_G);
    py::class_<ExcursionStats>(m, "ExcursionStats")
        .def_readonly("zero_crossing_rate", &ExcursionStats::zero_crossing_rate)
        .def_readonly("negative_durations", &ExcursionStats::negative_durations)
        .def_readonly("mean_negative_duration",
                      &ExcursionStats::mean_negative_duration);

    m.def("evaluate", &evaluate, py::arg("signal"), py::arg("t"));
    m.def("find_extrema", &find_extrema, py::arg("signal"), py::arg("lo"),
          py::arg("hi"));
    m.def("negativity_bounds", &negativity_bounds, py::arg("signal"),
          py::arg("t"));
    m.def("is_negative_at_extremum", &is_negative_at_extremum, py::arg("signal"),
          py::arg("t0"));
    m.def("negative_excursion_stats",
          py::overload_cast<const TwoToneSignal&, double, double, double>(
              &negative_excursion_stats),
          py::arg("signal"), py::arg("lo"), py::arg("hi"), py::arg("step"));
    m.def("negative_excursion_stats_sampled",
          py::overload_cast<const SampledSignal&, int>(&negative_excursion_stats),
          py::arg("path"), py::arg("refine") = 8);

    py::class_<EsaEstimate>(m, "EsaEstimate")
        .def_readonly("omega_sq", &EsaEstimate::omega_sq)
        .def_readonly("amp_sq", &EsaEstimate::amp_sq)
        .def_readonly("valid_mask", &EsaEstimate::valid_mask)
        .def_readonly("offset", &EsaEstimate::offset);
    py::class_<PositivityReport>(m, "PositivityReport")
        .def_readonly("frac_neg_before", &PositivityReport::frac_neg_before)
        .def_readonly("frac_neg_after", &PositivityReport::frac_neg_after);

    m.def("interpolate_derivative", &interpolate_derivative, py::arg("signal"),
          py::arg("refine") = 8);
    m.def("derivative_trim", &derivative_trim);
    m.def("esa_demodulate", &esa_demodulate, py::arg("signal"), py::arg("kernel"),
          py::arg("threshold") = 0.0, py::arg("refine") = 8);
    m.def("binomial_filter", &binomial_filter, py::arg("x"));
    m.def("positivity_report", &positivity_report, py::arg("before"),
          py::arg("after"));
}
