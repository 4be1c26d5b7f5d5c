#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "loctime/vallois.hpp"

namespace loctime {

// Convex increasing objective F of the terminal local time. Families carry
// closed forms; `with_cap` produces the derivative-capped modification
// F_K' = min(F', K) used when the raw derivative is unbounded.
class Objective {
  public:
    static Objective constant(double c);
    static Objective linear(double slope, double f0 = 0.0);
    static Objective power(double coef, double exponent, double f0 = 0.0);
    static Objective custom(std::function<double(double)> value,
                            std::function<double(double)> deriv,
                            std::function<double(double)> deriv2, double f0,
                            bool convex_nondecreasing);

    Objective with_cap(double cap) const;

    double value(double l) const;
    double deriv(double l) const;   // right derivative
    double deriv2(double l) const;  // 0 where unknown
    double f0() const;
    bool convex_nondecreasing() const { return convex_; }
    double cap() const { return cap_; }
    bool has_cap() const { return cap_ < std::numeric_limits<double>::infinity(); }
    // l-locations where the curvature jumps (the cap kink)
    const std::vector<double>& kinks() const { return kinks_; }
    // true when deriv2 blows up at l -> 0 (power exponent < 2)
    bool deriv2_singular_at_zero() const { return singular_; }
    double power_exponent() const { return exponent_; }
    const std::string& describe() const { return label_; }

  private:
    Objective() = default;
    std::function<double(double)> value_, deriv_, deriv2_;
    double cap_ = std::numeric_limits<double>::infinity();
    double cap_kink_ = std::numeric_limits<double>::infinity();
    std::vector<double> kinks_;
    bool convex_ = true;
    bool singular_ = false;
    double exponent_ = 1.0;
    std::string label_ = "custom";
};

// Construction tables of the dual payoff on the quantile grid: hazard-split
// accumulations of delta, the tangent slopes A+/A-, the intercept C and the
// running tangent-gap integral Gamma.
class DualTables {
  public:
    std::shared_ptr<const ValloisCore> core;
    Objective f;
    double cap_used = std::numeric_limits<double>::infinity();
    double delta_end = 0.0;  // asymptotic closure value at the table end
    double closure = 0.0;    // survival * delta_end carried past the end

    std::vector<double> a, l, w;          // dual grid (core nodes plus F-kinks)
    std::vector<double> q_node, qal_node;  // boundary values at the grid
    std::vector<double> r;  // R(a) = 2 int_a^end q F''(xi) da'
    std::vector<double> delta_gap, sigma, a_plus, a_minus, c_intercept,
        gamma_big;

    double sigma0() const { return sigma.front(); }

    // precise in-panel evaluators (arguments in the quantile coordinate)
    double delta_at_a(double aa) const;
    double sigma_at_a(double aa) const;
    double a_plus_at_a(double aa) const;
    double a_minus_at_a(double aa) const;
    double c_at_a(double aa) const;
    double gamma_at_a(double aa) const;
    double a_of_l(double ll) const;
    double l_of_a(double aa) const;

    // Integration points per panel. `rule` 0: points in the quantile
    // coordinate; 1: points placed in u = l^(1/s) to absorb a curvature
    // singularity of F at l = 0. `wa` are quadrature weights against da, so
    // every panel integral is a plain weighted sum.
    struct Panel {
        double b[7], q[7], qal[7], wpt[7], xi[7], dpt[7];
        double wa[7];
        double tnorm[7], wbar[7];  // barycentric interp in the rule coordinate
        double c0 = 0.0, c1 = 1.0;
        int rule = 0;
        double sexp = 2.0;
    };
    std::vector<Panel> panels;

  private:
    friend DualTables build_dual_tables(const Objective&, const EmbeddingProfile&);
    enum class Kind { ap, am, c, gamma };
    double rule_coord(const Panel& p, double aa) const;
    double interp_pt(std::size_t panel, const double* ys, double tau) const;
    double integrate_partial(std::size_t panel, double a_to, Kind kind) const;
    std::size_t locate(double aa) const;
};

// Build the tables: Sigma(l) nubar(l) = int_l^inf F' dnu by a backward
// integrating-factor recursion for delta = Sigma - F', then forward
// accumulation of A+/-, C and Gamma. Throws cap-required when the tail
// integral diverges on the truncated grid.
DualTables build_dual_tables(const Objective& f, const EmbeddingProfile& profile);

// The convex dual payoff H: knot table for fast evaluation plus the
// generating tables for precise evaluation and the tangent accessors.
class DualPayoff {
  public:
    struct Eval {
        double value;
        bool extrapolated;
    };

    double value(double x) const { return eval(x).value; }
    Eval eval(double x) const;
    double derivative(double x) const;       // right derivative
    double derivative_left(double x) const;  // left derivative
    double h0() const { return h0_; }

    // construction-tangent views on the local-time axis
    double gamma_plus(double l) const;
    double gamma_minus(double l) const;
    double big_gamma(double l) const;
    double theta(double l) const;

    double max_interior_slope() const;
    double slope_end_plus() const { return sl_hi_; }
    double slope_end_minus() const { return sl_lo_; }
    double x_knot_min() const { return xs_.front(); }
    double x_knot_max() const { return xs_.back(); }
    const std::vector<double>& knots_x() const { return xs_; }
    const std::vector<double>& knots_h() const { return hs_; }

    std::shared_ptr<const DualTables> tables() const { return tables_; }

    nlohmann::json to_json() const;
    static DualPayoff from_json(const nlohmann::json& j);  // knots only

  private:
    friend DualPayoff eval_dual_payoff(const DualTables&);
    std::vector<double> xs_, hs_;
    double h0_ = 0.0;
    double sl_lo_ = 0.0, sl_hi_ = 0.0;  // continuation slopes beyond the knots
    std::shared_ptr<const DualTables> tables_;
};

DualPayoff eval_dual_payoff(const DualTables& tables);

// Forward map: recover F from (H, phi) with right-derivative tangents.
// The table route is exact for construction-produced payoffs.
Objective forward_objective(const DualPayoff& payoff);
// Closed-form route for externally supplied H (hp must be the right
// derivative). Throws tangent-mismatch when theta+ != theta-.
Objective forward_objective(const std::function<double(double)>& h,
                            const std::function<double(double)>& hp,
                            const EmbeddingProfile& profile,
                            double theta_tol = 1e-6);

// Robust price bound Theta = int H d mu (+ p0 H(0)).
double price_bound(const DualPayoff& payoff, const QuantileMeasure& measure);

}  // namespace loctime
