#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loctime/common.hpp"

#include "json.hpp"

namespace loctime {

// A centered probability law on the real line represented through its
// quantile function Q(p). Atoms are flat stretches of Q, support gaps are
// jumps. Mass at zero is stored separately in `atom_at_zero` and the grid
// then describes the law conditioned to be nonzero. Parametric families
// additionally carry closed forms which the numerical layers prefer to
// grid interpolation.
class QuantileMeasure {
  public:
    enum class Interp { piecewise_linear, step };

    struct Node {
        double p;
        double x;
    };

    // -- queries -----------------------------------------------------------

    // Right-continuous quantile, p in (0,1).
    double quantile(double p) const;
    // Left limit of the quantile at p (differs from quantile(p) across a
    // support gap).
    double quantile_left(double p) const;
    // Right-continuous CDF, P(X <= x).
    double cdf(double x) const;
    // Left limit of the CDF, P(X < x).
    double cdf_left(double x) const;
    // Right tail, P(X >= x) = 1 - cdf_left(x).
    double tail(double x) const;
    double mean() const;
    double ks_distance(const QuantileMeasure& other) const;

    double atom_at_zero() const { return p0_; }
    Interp interp() const { return interp_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    bool symmetric() const { return symmetric_; }
    bool analytic() const { return static_cast<bool>(analytic_quantile_); }
    // p-locations where Q is not smooth (grid nodes, family kinks):
    // integrators must not straddle these.
    std::vector<double> breakpoints() const;
    // Minimum / maximum of the (truncated) support.
    double support_min() const { return nodes_.front().x; }
    double support_max() const { return nodes_.back().x; }

    // -- construction ------------------------------------------------------

    static QuantileMeasure sym_exp(double alpha, int grid_nodes = 2048);
    static QuantileMeasure uniform(double half_width, int grid_nodes = 2048);
    static QuantileMeasure two_point(double a);
    // Atoms (x_k, w_k); weights are normalised, the law is then centered by
    // an exact shift.
    static QuantileMeasure discrete(std::vector<std::pair<double, double>> atoms);
    // User grid, auto-shifted to zero mean.
    static QuantileMeasure from_grid(std::vector<Node> nodes, Interp interp,
                                     double p0 = 0.0);
    static QuantileMeasure from_samples(std::span<const double> samples);

    nlohmann::json to_json() const;
    static QuantileMeasure from_json(const nlohmann::json& j);

    // Invariant check used by `measure validate`; throws on violation.
    void validate(double centering_tol = 1e-8) const;

    // Total mass at zero and the law conditioned to be nonzero. The second
    // member is empty exactly for the point mass at zero.
    std::pair<double, std::optional<QuantileMeasure>> split_zero_atom() const;

  private:

    std::vector<Node> nodes_;
    Interp interp_ = Interp::piecewise_linear;
    double p0_ = 0.0;
    bool symmetric_ = false;

    // Closed forms when the family has them.
    std::function<double(double)> analytic_quantile_;
    std::function<double(double)> analytic_cdf_;
    std::vector<double> analytic_breaks_;  // extra p-space kinks

    double grid_quantile(double p) const;
    double grid_cdf(double x, bool left_limit) const;
};

// Tagged family record for the CLI / make_parametric.
struct FamilySpec {
    std::string family;  // sym_exp | two_point | uniform | user_grid
    double alpha = 1.0;
    double a = 1.0;
    double half_width = 1.0;
    std::vector<QuantileMeasure::Node> grid;
    std::string grid_interp = "piecewise_linear";
    int grid_nodes = 2048;
};

QuantileMeasure make_parametric(const FamilySpec& spec);

// A maturity-T call curve in forward units: quotes (strike, price) with the
// forward level S0. Strikes strictly increasing.
class CallCurve {
  public:
    CallCurve(double forward, std::vector<std::pair<double, double>> quotes);

    double forward() const { return forward_; }
    const std::vector<std::pair<double, double>>& quotes() const { return quotes_; }

    void validate(double tol = 1e-8) const;

    static CallCurve from_csv_file(const std::string& path, double forward);
    void to_csv_file(const std::string& path) const;

  private:
    double forward_;
    std::vector<std::pair<double, double>> quotes_;
};

// Breeden-Litzenberger ingestion: second divided differences of the call
// prices give the density of P_T = S_T - S0; negative butterflies are
// clipped and mass renormalised; isolated spikes become atoms; the support
// edges of diffuse mass are refined against the intrinsic value.
QuantileMeasure from_call_curve(const CallCurve& curve);

}  // namespace loctime
