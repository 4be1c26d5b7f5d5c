#include "loctime/numeric.hpp"

namespace loctime {

double ks_statistic(std::span<const double> sorted_sample,
                    const std::function<double(double)>& cdf) {
    return ks_statistic(sorted_sample, cdf, cdf);
}

double ks_statistic(std::span<const double> sorted_sample,
                    const std::function<double(double)>& cdf,
                    const std::function<double(double)>& cdf_left) {
    const double n = static_cast<double>(sorted_sample.size());
    double d = 0.0;
    // iterate runs of equal values so tied samples are compared at the run
    // boundaries only
    std::size_t i = 0;
    while (i < sorted_sample.size()) {
        const double x = sorted_sample[i];
        std::size_t j = i;
        while (j < sorted_sample.size() && sorted_sample[j] == x) ++j;
        const double lo = static_cast<double>(i) / n;  // F_n(x-)
        const double hi = static_cast<double>(j) / n;  // F_n(x)
        d = std::max(d, std::abs(hi - cdf(x)));
        d = std::max(d, std::abs(lo - cdf_left(x)));
        i = j;
    }
    return d;
}

MeanStats mean_stats(std::span<const double> xs) {
    MeanStats s;
    s.n = xs.size();
    if (s.n == 0) return s;
    double acc = 0.0;
    for (double x : xs) acc += x;
    s.mean = acc / static_cast<double>(s.n);
    double var = 0.0;
    for (double x : xs) var += sqr(x - s.mean);
    if (s.n > 1) var /= static_cast<double>(s.n - 1);
    s.sd = std::sqrt(var);
    s.se = s.sd / std::sqrt(static_cast<double>(s.n));
    return s;
}

namespace {

// Dormand-Prince coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

std::array<double, 2> axpy(const std::array<double, 2>& y, double h,
                           std::initializer_list<std::pair<double, const std::array<double, 2>*>> terms) {
    std::array<double, 2> out = y;
    for (const auto& [c, k] : terms) {
        out[0] += h * c * (*k)[0];
        out[1] += h * c * (*k)[1];
    }
    return out;
}

}  // namespace

Rk45Step rk45_step(const Rhs2& f, double t, const std::array<double, 2>& y,
                   double h) {
    const auto k1 = f(t, y);
    const auto k2 = f(t + c2 * h, axpy(y, h, {{a21, &k1}}));
    const auto k3 = f(t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const auto k4 = f(t + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const auto k5 = f(t + c5 * h,
                      axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const auto k6 = f(t + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3},
                                         {a64, &k4}, {a65, &k5}}));
    std::array<double, 2> y5{};
    for (int i = 0; i < 2; ++i)
        y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                            b6 * k6[i]);
    const auto k7 = f(t + h, y5);
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                               e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        err = std::max(err, std::abs(ei));
    }
    return {y5, err};
}

}  // namespace loctime
