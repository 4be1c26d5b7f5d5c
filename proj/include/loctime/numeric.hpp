#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace loctime {

// 7-point Gauss-Legendre rule on [-1, 1]. Exact for polynomials up to
// degree 13; used panel-wise everywhere a quantile-coordinate integral
// appears.
struct Gauss7 {
    static constexpr std::array<double, 7> x = {
        -0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
        0.0,
        0.4058451513773972, 0.7415311855993945, 0.9491079123427585};
    static constexpr std::array<double, 7> w = {
        0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
        0.4179591836734694,
        0.3818300505051189, 0.2797053914892767, 0.1294849661688697};
};

template <class F>
double gauss7(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 7; ++i) s += Gauss7::w[i] * f(c + h * Gauss7::x[i]);
    return s * h;
}

// Composite Gauss-Legendre with simple dyadic refinement until two
// consecutive levels agree. Good enough for the smooth closed-form
// integrands this project meets outside the quantile machinery.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-12,
                          int max_level = 16) {
    if (a == b) return 0.0;
    double prev = gauss7(f, a, b);
    std::size_t n = 2;
    for (int level = 0; level < max_level; ++level, n *= 2) {
        double s = 0.0;
        const double h = (b - a) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            s += gauss7(f, a + h * static_cast<double>(i), a + h * static_cast<double>(i + 1));
        if (std::abs(s - prev) <= rel_tol * (std::abs(s) + 1e-300) + 1e-300)
            return s;
        prev = s;
    }
    return prev;
}

// Bisection for monotone f with a sign change on [lo, hi].
template <class F>
double bisect(F&& f, double lo, double hi, double x_tol = 1e-14,
              int max_iter = 200) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    const bool rising = flo < 0.0;
    for (int i = 0; i < max_iter && hi - lo > x_tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == rising)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline double sqr(double x) { return x * x; }

// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sample Kolmogorov-Smirnov statistic: sup_x |F_n(x) - G(x)| for a
// sorted sample against a reference CDF. Handles reference jumps by also
// probing the left limit via cdf(x-).
double ks_statistic(std::span<const double> sorted_sample,
                    const std::function<double(double)>& cdf);

// Same but with an explicit left-limit evaluator (needed against CDFs with
// atoms; for continuous CDFs pass the same function twice).
double ks_statistic(std::span<const double> sorted_sample,
                    const std::function<double(double)>& cdf,
                    const std::function<double(double)>& cdf_left);

struct MeanStats {
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;  // sd / sqrt(n)
    std::size_t n = 0;
};

MeanStats mean_stats(std::span<const double> xs);

// Embedded Dormand-Prince 5(4) step on a 2-dimensional state.
// Returns the 5th-order solution and an error estimate.
struct Rk45Step {
    std::array<double, 2> y5;
    double err;  // max-norm of the embedded error estimate
};

using Rhs2 = std::function<std::array<double, 2>(double, const std::array<double, 2>&)>;

Rk45Step rk45_step(const Rhs2& f, double t, const std::array<double, 2>& y,
                   double h);

}  // namespace loctime
