#ifndef TKOSTAT_RATIO_HPP
#define TKOSTAT_RATIO_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "tkostat/gaussian_model.hpp"
#include "tkostat/mc.hpp"
#include "tkostat/quadform.hpp"

namespace tkostat {

/// Ratio R = V1/V2 of two quadratic forms on one Gaussian vector, with an
/// optional denominator detection threshold and an optional squared
/// numerator (V3 = V1^2).
struct RatioSpec {
    Eigen::MatrixXd J_num;
    Eigen::MatrixXd J_den;
    GaussianVectorModel model;
    std::optional<double> threshold;
    bool numerator_squared = false;

    RatioSpec(Eigen::MatrixXd J_num_, Eigen::MatrixXd J_den_,
              GaussianVectorModel model_,
              std::optional<double> threshold_ = {},
              bool numerator_squared_ = false);
};

/// Bivariate chf E[exp(i(xi1 V1 + xi2 V2))], via the single-form chf of the
/// combined kernel xi1 J_num + xi2 J_den.
Complex joint_chf(double xi1, double xi2, const RatioSpec& spec);

/// Ratio density by the contour integral of the analytic xi2-derivative of
/// the bivariate chf along xi2 = -r xi1. Requires an essentially positive
/// denominator: P(V2 <= 0) < 0.01.
DensityGrid ratio_pdf_geary(const std::vector<double>& r_grid,
                            const RatioSpec& spec, double tol = 1e-6);

/// Single-point version of ratio_pdf_geary.
double ratio_pdf_geary_point(double r, const RatioSpec& spec,
                             double tol = 1e-6);

/// Density of V1/V2 conditioned on V2 > threshold, by seeded Monte Carlo.
/// The sample count grows (deterministically) until every grid cell's
/// standard error is below 2% of the peak density; the worst cell error is
/// recorded in meta.mc_se. Normalized over the accepted mass.
DensityGrid ratio_pdf_conditioned(const std::vector<double>& r_grid,
                                  const RatioSpec& spec, const McConfig& cfg);

/// Density of V1^2/V2 (numerator_squared mode), same Monte Carlo error
/// contract as ratio_pdf_conditioned.
DensityGrid envelope_ratio_pdf(const std::vector<double>& r_grid,
                               const RatioSpec& spec, const McConfig& cfg);

/// The two phase-difference ratio densities on a 4-dim (I1, Q1, I2, Q2)
/// model: sine_ratio is 2(I1 Q2 - I2 Q1)/(I1^2 + Q1^2 + I2^2 + Q2^2)
/// (positive-definite denominator, contour route) and tangent_ratio is
/// (I1 Q2 - I2 Q1)/(I1 Q2 + I2 Q1) (sign-indefinite denominator, Monte
/// Carlo conditioned on a positive denominator).
struct IqRatioDensities {
    DensityGrid sine_ratio;
    DensityGrid tangent_ratio;
};

IqRatioDensities iq_correlator_ratios(const GaussianVectorModel& model,
                                      const std::vector<double>& sine_grid,
                                      const std::vector<double>& tangent_grid,
                                      const McConfig& cfg);

} // namespace tkostat

#endif
