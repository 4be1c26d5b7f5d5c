#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "loctime/measure.hpp"
#include "loctime/numeric.hpp"

using namespace loctime;

namespace {

// price a call on P = S - S0 by exact quadrature against the quantile grid;
// independent of the library's call-curve machinery
double price_call(const QuantileMeasure& m, double strike, int n = 200001) {
    double acc = 0.0;
    const double dp = 1.0 / n;
    for (int i = 0; i < n; ++i) {
        const double p = (i + 0.5) * dp;
        acc += std::max(m.quantile(p) - strike, 0.0);
    }
    return acc * dp;
}

}  // namespace

TEST_CASE("parametric families") {
    auto se = QuantileMeasure::sym_exp(1.0);
    CHECK(se.quantile(0.75) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-12));
    CHECK(se.tail(0.5) == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-12));
    CHECK(std::abs(se.mean()) < 1e-10);

    auto tp = QuantileMeasure::two_point(1.0);
    CHECK(tp.quantile(0.25) == -1.0);
    CHECK(tp.quantile(0.75) == 1.0);
    CHECK(tp.quantile(0.5) == 1.0);  // right-continuous
    CHECK(tp.mean() == 0.0);
    CHECK(tp.symmetric());

    auto un = QuantileMeasure::uniform(1.0);
    CHECK(un.quantile(0.75) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(un.mean()) < 1e-10);

    CHECK_THROWS_AS(QuantileMeasure::sym_exp(-1.0), Error);
    CHECK_THROWS_AS(QuantileMeasure::uniform(0.0), Error);
}

TEST_CASE("from_samples") {
    const double one[] = {3.0};
    CHECK_THROWS_AS(QuantileMeasure::from_samples(one), Error);

    const double two[] = {-1.0, 1.0};
    auto m2 = QuantileMeasure::from_samples(two);
    CHECK(m2.quantile(0.25) == -1.0);
    CHECK(m2.quantile(0.75) == 1.0);
    CHECK(m2.mean() == 0.0);

    const double four[] = {0.0, 0.0, 0.0, 4.0};
    auto m4 = QuantileMeasure::from_samples(four);
    CHECK(m4.quantile(0.5) == -1.0);
    CHECK(m4.quantile(0.9) == 3.0);
    CHECK(m4.cdf(-1.0) == doctest::Approx(0.75));
    CHECK(m4.mean() == doctest::Approx(0.0));
}

TEST_CASE("empirical law matches its generator at the 1% KS level") {
    std::mt19937_64 gen(20240811);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 100000;
    std::vector<double> draws(n);
    // symmetric exponential with alpha = 1 via inverse transform
    for (auto& x : draws) {
        const double p = u(gen);
        x = p < 0.5 ? std::log(2.0 * p) / 2.0 : -std::log(2.0 * (1.0 - p)) / 2.0;
    }
    std::sort(draws.begin(), draws.end());
    auto se = QuantileMeasure::sym_exp(1.0);
    const double d =
        ks_statistic(draws, [&](double x) { return se.cdf(x); });
    CHECK(d <= 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("evaluate consistency") {
    auto se = QuantileMeasure::sym_exp(1.0);
    CHECK_THROWS_AS(se.quantile(0.0), Error);
    CHECK_THROWS_AS(se.quantile(1.0), Error);
    CHECK(se.ks_distance(se) == 0.0);
    auto tp = QuantileMeasure::two_point(1.0);
    CHECK(tp.ks_distance(tp) == 0.0);
    CHECK(tp.cdf(1.0) + tp.tail(1.0) > 1.0);  // atom at 1: cdf + tail > 1
    CHECK(se.cdf(0.3) + se.tail(0.3) == doctest::Approx(1.0).epsilon(1e-14));
    // right-continuous inverse: cdf(quantile(p)) >= p
    for (double p : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        CHECK(se.cdf(se.quantile(p)) >= p - 1e-12);
        CHECK(tp.cdf(tp.quantile(p)) >= p - 1e-12);
    }
}

TEST_CASE("quantile monotonicity") {
    auto m = QuantileMeasure::discrete({{-2.0, 0.25}, {0.5, 0.5}, {1.0, 0.25}});
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(1e-6, 1.0 - 1e-6);
    for (int i = 0; i < 200; ++i) {
        double p1 = u(gen), p2 = u(gen);
        if (p1 > p2) std::swap(p1, p2);
        CHECK(m.quantile(p1) <= m.quantile(p2) + 1e-15);
    }
}

TEST_CASE("user grid centering") {
    std::vector<QuantileMeasure::Node> nodes{{0.25, 0.0}, {0.75, 2.0}};
    auto m = QuantileMeasure::from_grid(nodes, QuantileMeasure::Interp::step);
    CHECK(std::abs(m.mean()) < 1e-12);
}

TEST_CASE("call curve: exactly priced two-point recovers the atoms") {
    const double s0 = 10.0;
    std::vector<std::pair<double, double>> quotes;
    for (double k = -2.0; k <= 2.0 + 1e-9; k += 0.5) {
        double c;
        if (k <= -1.0)
            c = -k;
        else if (k < 1.0)
            c = (1.0 - k) / 2.0;
        else
            c = 0.0;
        quotes.emplace_back(s0 + k, c);
    }
    auto m = from_call_curve(CallCurve(s0, quotes));
    CHECK(m.quantile(0.25) == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(m.quantile(0.75) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(m.mean()) < 1e-10);
}

TEST_CASE("call curve: quadrature-priced uniform recovers the CDF") {
    const double s0 = 5.0;
    auto un = QuantileMeasure::uniform(1.0);
    std::vector<std::pair<double, double>> quotes;
    const int n_strikes = 111;  // aligned so +-1 are strikes
    for (int i = 0; i < n_strikes; ++i) {
        const double k = -1.1 + 2.2 * i / (n_strikes - 1);
        quotes.emplace_back(s0 + k, price_call(un, k));
    }
    auto m = from_call_curve(CallCurve(s0, quotes));
    double sup = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double x = -1.05 + 2.1 * i / 99.0;
        sup = std::max(sup, std::abs(m.cdf(x) - un.cdf(x)));
    }
    CHECK(sup <= 1e-3);
    CHECK(m.ks_distance(un) <= 2e-3);
}

TEST_CASE("call curve roundtrip KS for smooth laws (200 strikes)") {
    const double s0 = 20.0;
    auto se = QuantileMeasure::sym_exp(1.0);
    std::vector<std::pair<double, double>> quotes;
    for (int i = 0; i < 200; ++i) {
        const double k = -4.0 + 8.0 * i / 199.0;
        quotes.emplace_back(s0 + k, price_call(se, k));
    }
    auto m = from_call_curve(CallCurve(s0, quotes));
    CHECK(m.ks_distance(se) <= 1e-3);
}

TEST_CASE("call curve validation errors") {
    CHECK_THROWS_AS(
        from_call_curve(CallCurve(1.0, {{0.5, 0.6}, {1.5, 0.1}})), Error);
    // concave price kink -> arbitrage violation
    std::vector<std::pair<double, double>> bad{{0.5, 0.52}, {1.0, 0.40},
                                               {1.5, 0.05}, {2.0, 0.04}};
    CHECK_THROWS_AS(from_call_curve(CallCurve(1.0, bad)), Error);
}

TEST_CASE("measure JSON round trip") {
    auto m = QuantileMeasure::discrete({{-1.5, 0.4}, {1.0, 0.6}});
    auto j = m.to_json();
    auto back = QuantileMeasure::from_json(j);
    for (double p : {0.05, 0.3, 0.41, 0.77, 0.95})
        CHECK(back.quantile(p) == m.quantile(p));
    CHECK(back.atom_at_zero() == m.atom_at_zero());
}

TEST_CASE("split_zero_atom") {
    auto mix = QuantileMeasure::discrete({{-1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}});
    auto [p0, stripped] = mix.split_zero_atom();
    CHECK(p0 == doctest::Approx(0.5));
    REQUIRE(stripped.has_value());
    CHECK(stripped->quantile(0.25) == -1.0);
    CHECK(stripped->quantile(0.75) == 1.0);

    auto delta0 = QuantileMeasure::discrete({{0.0, 1.0}});
    auto [p1, none] = delta0.split_zero_atom();
    CHECK(p1 == 1.0);
    CHECK(!none.has_value());

    auto tp = QuantileMeasure::two_point(1.0);
    auto [p2, same] = tp.split_zero_atom();
    CHECK(p2 == 0.0);
    REQUIRE(same.has_value());
    CHECK(same->quantile(0.75) == 1.0);
}
