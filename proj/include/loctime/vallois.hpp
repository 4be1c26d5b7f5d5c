#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "loctime/measure.hpp"
#include "loctime/rng.hpp"

#include "json.hpp"

namespace loctime {

struct VallowBuildOptions {
    int core_grid = 2048;         // uniform c-lattice density
    double eps_tail = 1e-9;       // grid reaches [eps_tail, 1 - eps_tail]
    double tail_ratio = 1.6;      // geometric panel growth toward the tails
    int refine_factor = 8;        // extra subdivision near a*
    int refine_span = 16;         // uniform panels around a* that get refined
    double table_dl_max = 0.25;   // max l-spacing of exported profile rows
};

// Positive-branch quantile machinery behind the embedding construction.
//
// Everything lives in the quantile coordinate a in [a*, 1): the balance
// map alpha(a), the local-time coordinate xi(a), and per-panel
// Gauss-Legendre caches of (q, alpha, q(alpha), W = alpha + 1 - a).
// The boundary pair is parametric on this grid: phi_plus(xi(a)) = q(a),
// phi_minus(xi(a)) = q(alpha(a)), and the local-time survival is
// nubar(xi(a)) = W(a) exactly.
class ValloisCore {
  public:
    static std::shared_ptr<const ValloisCore> build(
        const QuantileMeasure& stripped, const VallowBuildOptions& opt = {});

    const QuantileMeasure& measure() const { return mu_; }
    double a_star() const { return a_star_; }
    double a_end() const { return pos_a_.back(); }
    std::size_t node_count() const { return pos_a_.size(); }

    // node tables (positive branch)
    const std::vector<double>& grid_a() const { return pos_a_; }
    const std::vector<double>& alpha_nodes() const { return alpha_node_; }
    const std::vector<double>& xi_nodes() const { return xi_node_; }
    const std::vector<double>& q_nodes() const { return q_node_; }
    const std::vector<double>& qalpha_nodes() const { return qalpha_node_; }
    const std::vector<double>& w_nodes() const { return w_node_; }

    // on-demand evaluators (precise; panel-interpolated alpha)
    double alpha_at(double a) const;
    double alpha_inv_at(double c) const;
    double xi_at(double a) const;
    double a_of_l(double l) const;
    double psi_plus_at(double x) const;   // x > 0
    double psi_minus_at(double x) const;  // x < 0
    double phi_plus_at(double l) const;
    double phi_minus_at(double l) const;
    double nubar_at(double l) const;

    // residual of the alpha balance equation at node i (diagnostics)
    double balance_residual(std::size_t i) const;

    // Panel-wise Gauss-Legendre integration of f(j, b) where j is the
    // panel index and b the abscissa; the callback receives cached values.
    struct GlPoint {
        double b, q, alpha, qalpha, w, xi;
    };
    const GlPoint& gl_point(std::size_t panel, int k) const {
        return panels_[panel].pt[k];
    }
    double panel_width(std::size_t panel) const {
        return pos_a_[panel + 1] - pos_a_[panel];
    }

    double q_at(double c) const;  // measure quantile with tail clamping

    double alpha_interp_public(std::size_t panel, double b) const {
        return alpha_interp(panel, b);
    }

    bool tail_clamped() const { return tail_clamped_; }

  private:
    struct Panel {
        GlPoint pt[7];
    };

    QuantileMeasure mu_;
    double a_star_ = 0.0;
    bool tail_clamped_ = false;

    std::vector<double> neg_c_;     // ascending, [eps, a*]
    std::vector<double> neg_jabs_;  // Jabs_k = int_{c_k}^{a*} |q|
    std::vector<double> pos_a_;     // ascending, [a*, 1-eps]
    std::vector<double> pos_t_;     // T_i = int_{a*}^{a_i} q
    std::vector<double> alpha_node_, xi_node_, q_node_, qalpha_node_, w_node_;
    std::vector<Panel> panels_;

    double jabs_at(double b) const;
    double t_at(double a) const;
    double alpha_solve(double a) const;
    double alpha_interp(std::size_t panel, double b) const;
    std::size_t locate_panel(double a) const;
};

// The spec-facing table bundle: a*, the alpha table on [a*, 1) and the
// xi table on (0, 1) (negative branch derived through the balance map).
struct ValloisTables {
    double a_star = 0.0;
    std::vector<std::pair<double, double>> alpha;  // (a, alpha(a))
    std::vector<std::pair<double, double>> xi;     // (a, xi(a)), both branches
    std::shared_ptr<const ValloisCore> core;
};

ValloisTables build_tables(const QuantileMeasure& measure,
                           const VallowBuildOptions& opt = {});

// Local-time-indexed stopping boundaries and the law of the stopped local
// time. Tables are piecewise linear in l; `core` (when present) provides
// precise evaluation.
struct EmbeddingProfile {
    std::vector<double> grid_l;
    std::vector<double> phi_plus;
    std::vector<double> phi_minus;
    std::vector<double> delta;     // hazard, -log survival
    std::vector<double> survival;  // nubar
    double p0 = 0.0;
    std::shared_ptr<const ValloisCore> core;

    double l_end() const { return grid_l.back(); }
    double x_max() const { return phi_plus.back(); }
    double x_min() const { return phi_minus.back(); }

    // table (piecewise-linear) evaluators; fine for simulation
    double phi_plus_at(double l) const;
    double phi_minus_at(double l) const;
    double delta_at(double l) const;
    double nubar_at(double l) const;  // exact exponential between delta nodes
    // right-continuous inverses
    double psi_plus_at(double x) const;
    double psi_minus_at(double x) const;

    void validate_for_sampling() const;  // throws truncated-profile / degenerate

    nlohmann::json to_json() const;
    static EmbeddingProfile from_json(const nlohmann::json& j);
};

EmbeddingProfile build_profile(const QuantileMeasure& measure,
                               const VallowBuildOptions& opt = {});

// Bernoulli randomisation for mass at zero: p0 plus the law conditioned to
// be nonzero. `stripped` is empty exactly when the measure is a point mass
// at zero (the embedding is then tau = 0).
struct AtomWrap {
    double p0 = 0.0;
    std::optional<QuantileMeasure> stripped;
};

AtomWrap wrap_atom_zero(const QuantileMeasure& measure);

// Draw (L, B) from the embedding law by inverting the survival table (exact
// exponential interpolation between hazard nodes) and picking the boundary
// side by excursion rates.
std::pair<double, double> exact_sample(const EmbeddingProfile& profile,
                                       RngStream& rng);

}  // namespace loctime
