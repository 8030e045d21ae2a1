#ifndef TKOSTAT_ESA_HPP
#define TKOSTAT_ESA_HPP

#include <cstdint>
#include <vector>

#include "tkostat/kernels.hpp"

namespace tkostat {

/// Per-sample energy-separation estimates. Entries where threshold
/// detection failed are masked invalid and carry no numeric value (NaN in
/// the storage, valid_mask false).
struct EsaEstimate {
    std::vector<double> omega_sq; // IF squared, rad^2/s^2
    std::vector<double> amp_sq;   // envelope squared
    std::vector<bool> valid_mask;
    std::size_t offset = 0; // index into the original signal of entry 0
};

/// Band-limited derivative estimate: windowed-sinc (Kaiser beta = 10,
/// half-width 16 input samples) interpolation onto a grid refined by
/// `refine`, central differencing there, decimation back to fs. Endpoints
/// inside the interpolation support are trimmed.
SampledSignal interpolate_derivative(const SampledSignal& signal, int refine = 8);

/// How many samples interpolate_derivative trims on each side.
std::size_t derivative_trim();

/// ESA demodulation: omega^2 = Psi[x_dot]/Psi[x], a^2 = Psi[x]^2/Psi[x_dot],
/// with samples masked whenever either denominator fails the threshold.
EsaEstimate esa_demodulate(const SampledSignal& signal,
                           const OperatorKernel& kernel, double threshold = 0.0,
                           int refine = 8);

/// Three-point binomial smoother (1, 2, 1)/4; edges trimmed.
std::vector<double> binomial_filter(const std::vector<double>& x);

struct PositivityReport {
    double frac_neg_before;
    double frac_neg_after;
};

PositivityReport positivity_report(const std::vector<double>& before,
                                   const std::vector<double>& after);

} // namespace tkostat

#endif
