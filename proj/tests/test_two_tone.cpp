#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "tkostat/two_tone.hpp"

using namespace tkostat;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("pure-tone limit evaluates exactly") {
    const TwoToneSignal sig(0.0, 2.3);
    for (double t : {0.0, 0.17, 0.5, 1.93}) {
        const SignalDerivatives d = evaluate(sig, t);
        CHECK(d.x == doctest::Approx(std::cos(kTwoPi * t)).epsilon(1e-14));
        CHECK(d.xd == doctest::Approx(-kTwoPi * std::sin(kTwoPi * t)).epsilon(1e-14));
        CHECK(d.xdd ==
              doctest::Approx(-kTwoPi * kTwoPi * std::cos(kTwoPi * t)).epsilon(1e-14));
    }
}

TEST_CASE("time-zero value and finite-difference derivatives") {
    const TwoToneSignal sig(0.6, 2.3, 0.0);
    CHECK(evaluate(sig, 0.0).x == doctest::Approx(1.6).epsilon(1e-14));

    const double h = 1e-6;
    for (double t : {0.1, 0.45, 2.2}) {
        const SignalDerivatives d = evaluate(sig, t);
        const double fd =
            (evaluate(sig, t + h).x - evaluate(sig, t - h).x) / (2.0 * h);
        CHECK(std::abs(d.xd - fd) < 1e-6 * std::max(1.0, std::abs(d.xd)));
        const double fdd =
            (evaluate(sig, t + h).xd - evaluate(sig, t - h).xd) / (2.0 * h);
        CHECK(std::abs(d.xdd - fdd) < 1e-4 * std::max(1.0, std::abs(d.xdd)));
    }
    CHECK_THROWS_AS(TwoToneSignal(-0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(TwoToneSignal(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("pure-tone extrema sit at half-integer times") {
    const std::vector<Extremum> ex = find_extrema(TwoToneSignal(0.0, 1.0), 0.1, 3.4);
    REQUIRE(ex.size() == 6); // t = 0.5, 1.0, ..., 3.0 since x' = 0 there
    for (std::size_t k = 0; k < ex.size(); ++k) {
        const double expect = 0.5 * static_cast<double>(k + 1);
        CHECK(std::abs(ex[k].t - expect) < 1e-10);
        const ExtremumKind want =
            (k % 2 == 0) ? ExtremumKind::Minimum : ExtremumKind::Maximum;
        CHECK(ex[k].kind == want);
    }
}

TEST_CASE("extremum finder matches a dense-grid oracle") {
    const TwoToneSignal sig(0.6, 2.3, 0.0);
    const std::vector<Extremum> ex = find_extrema(sig, 0.0, 10.0);

    // oracle: sign changes of x' on a very fine grid, bisected
    std::vector<double> oracle;
    const int n = 2000000;
    double prev = evaluate(sig, 0.0).xd;
    for (int i = 1; i <= n; ++i) {
        const double t = 10.0 * static_cast<double>(i) / n;
        const double cur = evaluate(sig, t).xd;
        if ((prev < 0.0) != (cur < 0.0)) {
            double lo = 10.0 * static_cast<double>(i - 1) / n, hi = t;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((evaluate(sig, lo).xd < 0.0) != (evaluate(sig, mid).xd < 0.0))
                    hi = mid;
                else
                    lo = mid;
            }
            oracle.push_back(0.5 * (lo + hi));
        }
        prev = cur;
    }
    REQUIRE(!oracle.empty());
    for (double t0 : oracle) {
        double best = 1e9;
        for (const Extremum& e : ex) best = std::min(best, std::abs(e.t - t0));
        CHECK(best < 1e-9);
    }
    // faster interference produces more extrema per unit time
    const std::size_t n_fast = find_extrema(TwoToneSignal(0.6, 7.1, 0.0), 0.0, 10.0).size();
    CHECK(n_fast > ex.size());
}

TEST_CASE("bounding curves evaluate per the closed formulas") {
    const TwoToneSignal sig(0.6, 2.3, 0.0);
    const NegativityBounds at0 = negativity_bounds(sig, 0.0);
    CHECK(at0.y_R == doctest::Approx(-1.0 / 0.6).epsilon(1e-12));
    CHECK(at0.y_G == doctest::Approx(-1.0 / (0.6 * 5.29)).epsilon(1e-12));
    CHECK(std::abs(at0.y_G) < std::abs(at0.y_R)); // f > 1 tightens the bound

    const NegativityBounds quarter = negativity_bounds(sig, 0.25);
    CHECK(quarter.y_R == doctest::Approx(0.0));
    CHECK(quarter.y_G == doctest::Approx(0.0));

    const TwoToneSignal unit(0.6, 1.0, 0.0);
    const NegativityBounds same = negativity_bounds(unit, 0.1);
    CHECK(same.y_R == doctest::Approx(same.y_G).epsilon(1e-14));
}

TEST_CASE("negativity decision agrees with the direct operator sign") {
    const TwoToneSignal sig(0.6, 2.3, 0.0);
    const std::vector<Extremum> ex = find_extrema(sig, 0.0, 10.0);
    REQUIRE(ex.size() > 10);
    std::size_t negatives = 0;
    for (const Extremum& e : ex) {
        const SignalDerivatives d = evaluate(sig, e.t);
        const double psi = d.xd * d.xd - d.x * d.xdd;
        const bool flagged = is_negative_at_extremum(sig, e.t);
        if (std::abs(psi) > 1e-9) CHECK(flagged == (psi < 0.0));
        if (flagged) ++negatives;
    }
    CHECK(negatives > 0);

    // pure tone: the operator output is a positive constant
    const TwoToneSignal tone(0.0, 1.0);
    for (const Extremum& e : find_extrema(tone, 0.0, 5.0))
        CHECK_FALSE(is_negative_at_extremum(tone, e.t));

    CHECK_THROWS_AS(is_negative_at_extremum(sig, 0.013), std::invalid_argument);
}

TEST_CASE("quadratic condition and bound interval agree on random scenarios") {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> ua(0.05, 3.0), uf(0.2, 5.0),
        uth(0.0, kTwoPi);
    std::size_t checked = 0, negatives = 0;
    while (checked < 10000) {
        const TwoToneSignal sig(ua(rng), uf(rng), uth(rng));
        for (const Extremum& e : find_extrema(sig, 0.0, 4.0)) {
            // the call itself evaluates both routes and throws on mismatch
            const bool flagged = is_negative_at_extremum(sig, e.t);
            const SignalDerivatives d = evaluate(sig, e.t);
            const double psi = d.xd * d.xd - d.x * d.xdd;
            if (std::abs(psi) > 1e-9) CHECK(flagged == (psi < 0.0));
            if (flagged) ++negatives;
            ++checked;
        }
    }
    CHECK(negatives > 0);
}

TEST_CASE("excursion statistics on the analytic signal") {
    const TwoToneSignal tone(0.0, 1.0);
    const ExcursionStats pure = negative_excursion_stats(tone, 0.0, 10.0, 1e-3);
    CHECK(pure.negative_durations.empty());
    CHECK(pure.mean_negative_duration == 0.0);
    CHECK(pure.zero_crossing_rate == 0.0);

    const TwoToneSignal sig(0.6, 2.3, 0.0);
    const ExcursionStats coarse = negative_excursion_stats(sig, 0.0, 20.0, 2e-4);
    const ExcursionStats fine = negative_excursion_stats(sig, 0.0, 20.0, 1e-4);
    CHECK(!coarse.negative_durations.empty());
    CHECK(coarse.zero_crossing_rate > 0.0);
    CHECK(std::abs(fine.mean_negative_duration - coarse.mean_negative_duration) <
          0.01 * coarse.mean_negative_duration);

    // every excursion length is positive and the mean matches the list
    double sum = 0.0;
    for (double d : fine.negative_durations) {
        CHECK(d > 0.0);
        sum += d;
    }
    CHECK(fine.mean_negative_duration ==
          doctest::Approx(sum / static_cast<double>(fine.negative_durations.size())));

    CHECK_THROWS_AS(negative_excursion_stats(sig, 0.0, 1.0, 0.5),
                    std::invalid_argument);
}

TEST_CASE("excursion count moves continuously with the relative phase") {
    const double window = 10.0;
    std::size_t prev = 0;
    bool first = true;
    for (double th = 0.0; th < 0.02; th += 1e-3) {
        const TwoToneSignal sig(0.6, 2.3, th);
        const std::size_t count =
            negative_excursion_stats(sig, 0.0, window, 1e-4).negative_durations.size();
        if (!first) {
            const std::size_t jump = count > prev ? count - prev : prev - count;
            CHECK(jump <= 1);
        }
        prev = count;
        first = false;
    }
}

TEST_CASE("sampled-path excursion statistics track the analytic ones") {
    const TwoToneSignal sig(0.6, 2.3, 0.0);
    const double fs = 400.0;
    SampledSignal path;
    path.fs = fs;
    const std::size_t n = static_cast<std::size_t>(40.0 * fs);
    path.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        path.samples[i] = evaluate(sig, static_cast<double>(i) / fs).x;
    const ExcursionStats sampled = negative_excursion_stats(path);
    const ExcursionStats analytic = negative_excursion_stats(sig, 0.1, 39.9, 1e-4);
    REQUIRE(!sampled.negative_durations.empty());
    CHECK(sampled.mean_negative_duration ==
          doctest::Approx(analytic.mean_negative_duration).epsilon(0.1));
    CHECK(sampled.zero_crossing_rate ==
          doctest::Approx(analytic.zero_crossing_rate).epsilon(0.1));
}
