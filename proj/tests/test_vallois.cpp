#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "loctime/numeric.hpp"
#include "loctime/vallois.hpp"

using namespace loctime;

namespace {

// Independent oracle for symmetric atomless laws:
//   psi(x) = int_0^x s / tail(s) d mu(s)
// computed in x-space with the analytic density ratio d mu / tail.
double psi_symmetric_oracle(const QuantileMeasure& m, double x) {
    // d mu(s)/tail(s) = -d log tail(s); integrate s d(-log tail) by parts in
    // s using fine composite quadrature of the left-hand form directly.
    const int n = 20000;
    double acc = 0.0;
    double prev_log = std::log(m.tail(0.0));
    for (int i = 1; i <= n; ++i) {
        const double s = x * i / n;
        const double cur_log = std::log(m.tail(s));
        const double mid = x * (i - 0.5) / n;
        acc += mid * (prev_log - cur_log);
        prev_log = cur_log;
    }
    return acc;
}

}  // namespace

TEST_CASE("two_point construction is exact") {
    auto tp = QuantileMeasure::two_point(1.0);
    auto tables = build_tables(tp);
    const auto& core = *tables.core;
    CHECK(tables.a_star == doctest::Approx(0.5).epsilon(1e-14));
    for (std::size_t i = 0; i < core.grid_a().size(); i += 97) {
        const double a = core.grid_a()[i];
        CHECK(core.alpha_nodes()[i] == doctest::Approx(1.0 - a).epsilon(1e-11));
        CHECK(core.xi_nodes()[i] ==
              doctest::Approx(-std::log(2.0 * (1.0 - a))).epsilon(1e-10));
        CHECK(core.balance_residual(i) <= 1e-10);
    }
    auto prof = build_profile(tp);
    for (double l : {0.1, 0.5, 1.0, 3.0, 7.0}) {
        CHECK(prof.phi_plus_at(l) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(prof.phi_minus_at(l) == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(prof.nubar_at(l) == doctest::Approx(std::exp(-l)).epsilon(1e-9));
    }
    CHECK(prof.survival.back() <= 1e-8);
}

TEST_CASE("uniform: xi and psi match the closed forms") {
    auto un = QuantileMeasure::uniform(1.0);
    auto tables = build_tables(un);
    const auto& core = *tables.core;
    CHECK(core.xi_at(0.75) == doctest::Approx(-0.5 - std::log(0.5)).epsilon(1e-10));
    for (double x : {0.05, 0.2, 0.5, 0.8, 0.95, 0.99}) {
        const double expect = -x - std::log1p(-x);
        CHECK(core.psi_plus_at(x) == doctest::Approx(expect).epsilon(1e-8));
    }
    // nubar(psi(0.5)) = 2 tail(0.5) = 0.5
    auto prof = build_profile(un);
    const double l = core.psi_plus_at(0.5);
    CHECK(prof.nubar_at(l) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(core.nubar_at(l) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("sym_exp: psi, phi, nubar closed forms at 1e-6 relative accuracy") {
    auto se = QuantileMeasure::sym_exp(1.0);
    auto prof = build_profile(se);
    const auto& core = *prof.core;
    for (int i = 0; i < 100; ++i) {
        const double x = 0.05 * std::pow(100.0, i / 99.0);  // 0.05 .. 5
        const double psi = core.psi_plus_at(x);
        CHECK(std::abs(psi - x * x) <= 1e-6 * x * x);
    }
    for (int i = 0; i < 100; ++i) {
        const double l = 0.01 * std::pow(2500.0, i / 99.0);  // 0.01 .. 25
        const double phi = core.phi_plus_at(l);
        const double nb = core.nubar_at(l);
        CHECK(std::abs(phi - std::sqrt(l)) <= 1e-6 * std::sqrt(l));
        CHECK(std::abs(nb - std::exp(-2.0 * std::sqrt(l))) <=
              1e-6 * std::exp(-2.0 * std::sqrt(l)));
        CHECK(std::abs(core.phi_minus_at(l) + phi) <= 1e-8);
        // the serialized piecewise-linear table is coarser but still tight
        CHECK(std::abs(prof.phi_minus_at(l) + phi) <= 2e-4);
    }
    CHECK(prof.survival.back() <= 1e-8);
}

TEST_CASE("general construction agrees with the symmetric-shortcut oracle") {
    for (auto m : {QuantileMeasure::sym_exp(1.3), QuantileMeasure::uniform(0.7)}) {
        auto core = ValloisCore::build(m);
        const double x_hi = 0.8 * m.support_max();
        for (int i = 1; i <= 8; ++i) {
            const double x = x_hi * i / 8.0;
            const double oracle = psi_symmetric_oracle(m, x);
            CHECK(std::abs(core->psi_plus_at(x) - oracle) <=
                  1e-6 * std::max(1.0, oracle));
        }
    }
}

TEST_CASE("asymmetric two-point") {
    auto m = QuantileMeasure::discrete({{-0.5, 2.0 / 3.0}, {1.0, 1.0 / 3.0}});
    CHECK(std::abs(m.mean()) < 1e-15);
    auto prof = build_profile(m);
    CHECK(prof.core->a_star() == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    for (double l : {0.2, 1.0, 4.0}) {
        CHECK(prof.phi_plus_at(l) == doctest::Approx(1.0).epsilon(1e-11));
        CHECK(prof.phi_minus_at(l) == doctest::Approx(-0.5).epsilon(1e-11));
        CHECK(prof.nubar_at(l) ==
              doctest::Approx(std::exp(-1.5 * l)).epsilon(1e-8));
    }
    // hazard identity: Delta(l) = l (1/(2 phi+) + 1/(2 |phi-|)) = 1.5 l
    CHECK(prof.delta_at(2.0) == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("survival identity nubar(xi(a)) = alpha(a) + 1 - a vs hazard quadrature") {
    auto se = QuantileMeasure::sym_exp(1.0);
    auto prof = build_profile(se);
    // independent check: Delta(l) from the boundary tables by quadrature,
    // in u = sqrt(s) coordinates to tame the 1/phi(s) ~ 1/sqrt(s) start
    for (double l : {0.25, 1.0, 4.0}) {
        const int n = 20000;
        const double u_hi = std::sqrt(l);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = u_hi * (i + 0.5) / n;
            const double s = u * u;
            acc += u * (1.0 / prof.core->phi_plus_at(s) +
                        1.0 / std::abs(prof.core->phi_minus_at(s)));
        }
        acc *= u_hi / n;
        CHECK(std::exp(-acc) ==
              doctest::Approx(prof.core->nubar_at(l)).epsilon(1e-4));
    }
}

TEST_CASE("right-continuous inverse property") {
    auto m = QuantileMeasure::discrete({{-1.0, 0.5}, {0.5, 0.25}, {1.5, 0.25}});
    auto prof = build_profile(m);
    for (double x : {0.1, 0.4999, 0.5, 0.7, 1.2, 1.4999}) {
        const double l = prof.psi_plus_at(x);
        CHECK(prof.phi_plus_at(l) >= x - 1e-9);
    }
}

TEST_CASE("wrap_atom_zero") {
    auto tp = QuantileMeasure::two_point(1.0);
    auto w0 = wrap_atom_zero(tp);
    CHECK(w0.p0 == 0.0);
    REQUIRE(w0.stripped.has_value());

    auto mix = QuantileMeasure::discrete({{-1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}});
    auto w1 = wrap_atom_zero(mix);
    CHECK(w1.p0 == doctest::Approx(0.5));
    REQUIRE(w1.stripped.has_value());
    CHECK(w1.stripped->quantile(0.25) == -1.0);

    auto d0 = QuantileMeasure::discrete({{0.0, 1.0}});
    auto w2 = wrap_atom_zero(d0);
    CHECK(w2.p0 == 1.0);
    CHECK(!w2.stripped.has_value());
    CHECK_THROWS_AS(build_profile(d0), Error);

    // profile of the mixture carries p0
    auto prof = build_profile(mix);
    CHECK(prof.p0 == doctest::Approx(0.5));
}

TEST_CASE("exact_sample laws") {
    auto tp = QuantileMeasure::two_point(1.0);
    auto prof = build_profile(tp);
    prof.validate_for_sampling();
    RngStream rng = RngStream::for_index(20240811, 0);
    const int n = 100000;
    std::vector<double> ls(n), bs(n);
    for (int i = 0; i < n; ++i) {
        auto [l, b] = exact_sample(prof, rng);
        ls[i] = l;
        bs[i] = b;
    }
    auto stats = mean_stats(ls);
    CHECK(std::abs(stats.mean - 1.0) <= 0.01);  // Exp(1), 3 sigma ~ 0.0095
    // P(L > 1) for sym_exp = e^{-2}
    auto se = QuantileMeasure::sym_exp(1.0);
    auto prof2 = build_profile(se);
    prof2.validate_for_sampling();
    int count = 0;
    std::vector<double> bs2(n);
    for (int i = 0; i < n; ++i) {
        auto [l, b] = exact_sample(prof2, rng);
        if (l > 1.0) ++count;
        bs2[i] = b;
    }
    const double p_hat = static_cast<double>(count) / n;
    const double p = std::exp(-2.0);
    CHECK(std::abs(p_hat - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
    // KS of B against the source laws at the 1% level
    std::sort(bs.begin(), bs.end());
    std::sort(bs2.begin(), bs2.end());
    const double crit = 1.63 / std::sqrt(static_cast<double>(n));
    CHECK(ks_statistic(bs, [&](double x) { return tp.cdf(x); },
                       [&](double x) { return tp.cdf_left(x); }) <= crit);
    CHECK(ks_statistic(bs2, [&](double x) { return se.cdf(x); }) <= crit);
}

TEST_CASE("asymmetric exact_sample and mean-zero check") {
    auto m = QuantileMeasure::discrete({{-0.5, 2.0 / 3.0}, {1.0, 1.0 / 3.0}});
    auto prof = build_profile(m);
    prof.validate_for_sampling();
    RngStream rng = RngStream::for_index(7, 0);
    const int n = 100000;
    std::vector<double> bs(n);
    for (int i = 0; i < n; ++i) bs[i] = exact_sample(prof, rng).second;
    auto st = mean_stats(bs);
    CHECK(std::abs(st.mean) <= 3.0 * st.se);
    std::sort(bs.begin(), bs.end());
    CHECK(ks_statistic(bs, [&](double x) { return m.cdf(x); },
                       [&](double x) { return m.cdf_left(x); }) <=
          1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("truncated / degenerate profiles are rejected") {
    EmbeddingProfile p;
    p.grid_l = {0.0, 1.0};
    p.phi_plus = {1.0, 1.0};
    p.phi_minus = {-1.0, -1.0};
    p.delta = {0.0, 1.0};
    p.survival = {1.0, std::exp(-1.0)};
    CHECK_THROWS_AS(p.validate_for_sampling(), Error);  // nubar end ~ 0.37

    EmbeddingProfile d;
    d.grid_l = {0.0, 0.5, 40.0};
    d.phi_plus = {0.0, 0.0, 1.0};  // flat zero start
    d.phi_minus = {-1.0, -1.0, -1.0};
    d.delta = {0.0, 20.0, 40.0};
    d.survival = {1.0, std::exp(-20.0), std::exp(-40.0)};
    CHECK_THROWS_AS(d.validate_for_sampling(), Error);
}

TEST_CASE("profile JSON round trip") {
    auto prof = build_profile(QuantileMeasure::two_point(1.0));
    auto j = prof.to_json();
    auto back = EmbeddingProfile::from_json(j);
    CHECK(back.p0 == prof.p0);
    for (double l : {0.3, 1.7})
        CHECK(back.phi_plus_at(l) == doctest::Approx(prof.phi_plus_at(l)));
    RngStream rng(42);
    auto [l, b] = exact_sample(back, rng);
    CHECK((b == doctest::Approx(1.0) || b == doctest::Approx(-1.0)));
    CHECK(l > 0.0);
}
