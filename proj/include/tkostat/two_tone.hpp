#ifndef TKOSTAT_TWO_TONE_HPP
#define TKOSTAT_TWO_TONE_HPP

#include <vector>

#include "tkostat/kernels.hpp"

namespace tkostat {

/// x(t) = cos(2 pi t) + a cos(2 pi f t + theta0), the normalized
/// two-sinusoid interference model.
struct TwoToneSignal {
    double a;       // amplitude ratio a2/a1, > 0
    double f;       // frequency ratio f2/f1, > 0
    double theta0 = 0.0;

    TwoToneSignal(double a_, double f_, double theta0_ = 0.0);
};

struct SignalDerivatives {
    double x, xd, xdd;
};

/// Analytic signal value and its first two derivatives.
SignalDerivatives evaluate(const TwoToneSignal& signal, double t);

enum class ExtremumKind { Minimum, Maximum, InflectionAdjacent };

struct Extremum {
    double t;
    ExtremumKind kind;
};

/// All roots of x'(t) in [lo, hi], bracketed on a grid of at least 64
/// points per period of the faster tone and bisected to 1e-12.
std::vector<Extremum> find_extrema(const TwoToneSignal& signal, double lo,
                                   double hi);

struct NegativityBounds {
    double y_R; // -cos(2 pi t)/a
    double y_G; // -cos(2 pi t)/(a f^2)
};

NegativityBounds negativity_bounds(const TwoToneSignal& signal, double t);

/// True iff the operator output x'^2 - x x'' is <= 0 at the extremum t0.
/// Both the quadratic condition and the between-bounds test are evaluated
/// and must agree.
bool is_negative_at_extremum(const TwoToneSignal& signal, double t0);

struct ExcursionStats {
    double zero_crossing_rate;    // sign changes of the operator output per unit time
    std::vector<double> negative_durations;
    double mean_negative_duration; // 0 when no negative excursion occurs
};

/// Negative-excursion statistics of the continuous operator output on a
/// uniform evaluation grid (analytic derivatives).
ExcursionStats negative_excursion_stats(const TwoToneSignal& signal, double lo,
                                        double hi, double step);

/// Same statistics for a sampled path; derivatives come from band-limited
/// interpolation, so edge trims propagate.
ExcursionStats negative_excursion_stats(const SampledSignal& path, int refine = 8);

} // namespace tkostat

#endif
