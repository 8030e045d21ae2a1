#ifndef TKOSTAT_KERNELS_HPP
#define TKOSTAT_KERNELS_HPP

#include <Eigen/Dense>
#include <vector>

namespace tkostat {

/// A sampled real signal with its sampling rate.
struct SampledSignal {
    std::vector<double> samples;
    double fs = 1.0; // Hz
};

/// Discrete symmetric Teager-Kaiser kernel parameterized by the delay pair
/// (p, q), p < q. The sample vector ordering is (x[n-q], x[n], x[n+q]) for
/// p = 0 and (x[n-q], x[n-p], x[n+p], x[n+q]) for p > 0.
class OperatorKernel {
public:
    OperatorKernel(int p, int q, double T = 1.0);

    int p() const { return p_; }
    int q() const { return q_; }
    double T() const { return T_; }
    int dim() const { return p_ == 0 ? 3 : 4; }
    const Eigen::MatrixXd& J() const { return J_; }

    /// Tap offsets in sample counts relative to the center sample.
    std::vector<int> tap_offsets() const;
    /// Tap offsets in seconds.
    std::vector<double> tap_times() const;

private:
    int p_, q_;
    double T_;
    Eigen::MatrixXd J_;
};

/// Stencil matrix of the symmetric kernel (3x3 for p=0, 4x4 for p>0).
Eigen::MatrixXd kernel_matrix(int p, int q);

/// Sliding application of Psi_p^q; output[i] corresponds to input sample
/// i + q (edges trimmed, not padded). Output length = len - 2q.
std::vector<double> apply_tko(const SampledSignal& signal,
                              const OperatorKernel& kernel);

/// Single-tone frequency response: 1 - cos(2*w*tq) for p = 0,
/// cos(2*w*tp) - cos(2*w*tq) for p > 0. w in rad/sample-time units.
double freq_response(const OperatorKernel& kernel, double omega);

/// Roots of tp*sin(2*w*tp) - tq*sin(2*w*tq) in [lo, hi]; these locate the
/// extrema of the bipolar response. Requires p > 0.
std::vector<double> discriminator_extrema(const OperatorKernel& kernel,
                                          double lo, double hi);

struct CrossTermAmplitudes {
    double dc;         // sum over both tones of a^2[sin^2(w tq) - sin^2(w tp)]
    double sum_coeff;  // coefficient of cos((wk+wl) t)
    double diff_coeff; // coefficient of cos((wk-wl) t)
};

/// Two-tone mixing products of the kernel output: dc level plus the
/// sum- and difference-frequency cross-term coefficients.
CrossTermAmplitudes cross_term_amplitudes(double a_k, double a_l, double w_k,
                                          double w_l,
                                          const OperatorKernel& kernel);

} // namespace tkostat

#endif
