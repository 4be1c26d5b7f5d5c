#include "loctime/vallois.hpp"

#include <algorithm>
#include <cmath>

#include "loctime/numeric.hpp"

namespace loctime {

namespace {

// Barycentric weights for the Gauss-Legendre 7 abscissae on [-1,1].
const std::array<double, 7>& bary_weights() {
    static const std::array<double, 7> w = [] {
        std::array<double, 7> out{};
        for (int j = 0; j < 7; ++j) {
            double prod = 1.0;
            for (int k = 0; k < 7; ++k)
                if (k != j) prod *= (Gauss7::x[j] - Gauss7::x[k]);
            out[j] = 1.0 / prod;
        }
        return out;
    }();
    return w;
}

void append_uniform(std::vector<double>& pts, double lo, double hi, int m) {
    const double step = 1.0 / m;
    for (double p = std::ceil(lo / step) * step; p < hi; p += step)
        if (p > lo && p < hi) pts.push_back(p);
}

std::vector<double> finalize_grid(std::vector<double> pts, double lo, double hi) {
    pts.push_back(lo);
    pts.push_back(hi);
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    out.reserve(pts.size());
    for (double p : pts) {
        if (p < lo || p > hi) continue;
        if (!out.empty() && p - out.back() < 1e-15) continue;
        out.push_back(p);
    }
    if (out.size() < 2) out.push_back(hi);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// core build
// ---------------------------------------------------------------------------

std::shared_ptr<const ValloisCore> ValloisCore::build(
    const QuantileMeasure& stripped, const VallowBuildOptions& opt) {
    if (stripped.atom_at_zero() != 0.0)
        throw Error(ErrorKind::invalid_parameter,
                    "build requires a zero-atom-free measure; strip it first");
    const double scale =
        std::max({1.0, std::abs(stripped.support_min()), stripped.support_max()});
    if (std::abs(stripped.mean()) > 1e-8 * scale)
        throw Error(ErrorKind::centering, "measure not centered");

    auto core = std::make_shared<ValloisCore>();
    core->mu_ = stripped;
    const double eps = opt.eps_tail;
    const double a_star = stripped.cdf(0.0);
    if (!(a_star > eps && a_star < 1.0 - eps))
        throw Error(ErrorKind::unsupported_measure,
                    "one-sided measure: mu(R-) must lie strictly inside (0,1)");
    core->a_star_ = a_star;

    const auto breaks = stripped.breakpoints();
    const int m = opt.core_grid;
    const double span = static_cast<double>(opt.refine_span) / m;
    const double sub = 1.0 / (static_cast<double>(m) * opt.refine_factor);

    // negative-side c grid on [eps, a*]
    {
        std::vector<double> pts;
        append_uniform(pts, eps, a_star, m);
        for (double g = 1.0 / m; g > eps * opt.tail_ratio; g /= opt.tail_ratio)
            if (g > eps && g < a_star) pts.push_back(g);
        for (double p = a_star - span; p < a_star; p += sub)
            if (p > eps) pts.push_back(p);
        for (double b : breaks)
            if (b > eps && b < a_star) pts.push_back(b);
        core->neg_c_ = finalize_grid(std::move(pts), eps, a_star);
    }
    // positive-side a grid on [a*, 1-eps]
    {
        std::vector<double> pts;
        append_uniform(pts, a_star, 1.0 - eps, m);
        for (double g = 1.0 / m; g > eps * opt.tail_ratio; g /= opt.tail_ratio)
            if (1.0 - g > a_star) pts.push_back(1.0 - g);
        for (double p = a_star + sub; p < a_star + span; p += sub)
            if (p < 1.0 - eps) pts.push_back(p);
        for (double b : breaks)
            if (b > a_star && b < 1.0 - eps) pts.push_back(b);
        core->pos_a_ = finalize_grid(std::move(pts), a_star, 1.0 - eps);
    }

    if (!stripped.analytic()) {
        const auto& ns = stripped.nodes();
        core->tail_clamped_ = ns.front().p > eps || ns.back().p < 1.0 - eps;
    }

    auto q = [&core](double c) { return core->mu_.quantile(c); };

    // prefix integrals
    core->neg_jabs_.assign(core->neg_c_.size(), 0.0);
    for (std::size_t k = core->neg_c_.size() - 1; k-- > 0;) {
        core->neg_jabs_[k] =
            core->neg_jabs_[k + 1] +
            gauss7([&](double c) { return -q(c); }, core->neg_c_[k],
                   core->neg_c_[k + 1]);
    }
    auto rebuild_pos_prefix = [&core, &q] {
        core->pos_t_.assign(core->pos_a_.size(), 0.0);
        for (std::size_t i = 0; i + 1 < core->pos_a_.size(); ++i)
            core->pos_t_[i + 1] =
                core->pos_t_[i] + gauss7(q, core->pos_a_[i], core->pos_a_[i + 1]);
    };
    rebuild_pos_prefix();

    // positive nodes at balance preimages of negative breakpoints keep
    // q(alpha(.)) smooth within panels
    {
        std::vector<double> extra;
        for (double b : breaks) {
            if (!(b > eps && b < a_star)) continue;
            const double target = core->jabs_at(b);
            if (target <= 0.0 || target >= core->pos_t_.back()) continue;
            extra.push_back(bisect(
                [&](double a) { return core->t_at(a) - target; }, a_star,
                core->pos_a_.back(), 1e-15));
        }
        if (!extra.empty()) {
            for (double a : extra) core->pos_a_.push_back(a);
            std::sort(core->pos_a_.begin(), core->pos_a_.end());
            core->pos_a_.erase(
                std::unique(core->pos_a_.begin(), core->pos_a_.end(),
                            [](double x, double y) { return y - x < 1e-15; }),
                core->pos_a_.end());
            rebuild_pos_prefix();
        }
    }

    const std::size_t n = core->pos_a_.size();
    core->alpha_node_.resize(n);
    core->q_node_.resize(n);
    core->qalpha_node_.resize(n);
    core->w_node_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = core->pos_a_[i];
        const double al = i == 0 ? a_star : core->alpha_solve(a);
        core->alpha_node_[i] = al;
        core->q_node_[i] = q(a);
        // the negative boundary approaches alpha from below; at jump points
        // the left limit is the negative-branch value
        core->qalpha_node_[i] = stripped.quantile_left(al);
        core->w_node_[i] = al + 1.0 - a;
    }

    core->panels_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double a0 = core->pos_a_[i], a1 = core->pos_a_[i + 1];
        const double c = 0.5 * (a0 + a1), h = 0.5 * (a1 - a0);
        auto& panel = core->panels_[i];
        for (int j = 0; j < 7; ++j) {
            const double b = c + h * Gauss7::x[j];
            auto& pt = panel.pt[j];
            pt.b = b;
            pt.q = q(b);
            pt.alpha = core->alpha_solve(b);
            pt.qalpha = q(pt.alpha);
            pt.w = pt.alpha + 1.0 - b;
        }
    }

    core->xi_node_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        auto& panel = core->panels_[i];
        const double a0 = core->pos_a_[i];
        const double h = 0.5 * (core->pos_a_[i + 1] - a0);
        double full = 0.0;
        for (int j = 0; j < 7; ++j)
            full += Gauss7::w[j] * 2.0 * panel.pt[j].q / panel.pt[j].w;
        core->xi_node_[i + 1] = core->xi_node_[i] + full * h;
        auto integrand = [&](double b) {
            return 2.0 * core->q_at(b) / (core->alpha_interp(i, b) + 1.0 - b);
        };
        double lo = a0, acc = core->xi_node_[i];
        for (int j = 0; j < 7; ++j) {
            acc += gauss7(integrand, lo, panel.pt[j].b);
            panel.pt[j].xi = acc;
            lo = panel.pt[j].b;
        }
    }

    return core;
}

double ValloisCore::q_at(double c) const { return mu_.quantile(c); }

double ValloisCore::jabs_at(double b) const {
    if (b >= a_star_) return 0.0;
    if (b <= neg_c_.front()) return neg_jabs_.front();
    auto it = std::upper_bound(neg_c_.begin(), neg_c_.end(), b);
    const std::size_t k = static_cast<std::size_t>(it - neg_c_.begin()) - 1;
    const double part =
        gauss7([this](double c) { return -mu_.quantile(c); }, neg_c_[k], b);
    return neg_jabs_[k] - part;
}

double ValloisCore::t_at(double a) const {
    if (a <= a_star_) return 0.0;
    if (a >= pos_a_.back()) return pos_t_.back();
    auto it = std::upper_bound(pos_a_.begin(), pos_a_.end(), a);
    const std::size_t i = static_cast<std::size_t>(it - pos_a_.begin()) - 1;
    return pos_t_[i] +
           gauss7([this](double c) { return mu_.quantile(c); }, pos_a_[i], a);
}

double ValloisCore::alpha_solve(double a) const {
    const double t = t_at(a);
    if (t <= 0.0) return a_star_;
    if (t >= neg_jabs_.front()) return neg_c_.front();
    std::size_t lo = 0, hi = neg_jabs_.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (neg_jabs_[mid] >= t)
            lo = mid;
        else
            hi = mid;
    }
    const double target = neg_jabs_[lo] - t;
    auto f = [&](double b) {
        return gauss7([this](double c) { return -mu_.quantile(c); }, neg_c_[lo],
                      b) -
               target;
    };
    return bisect(f, neg_c_[lo], neg_c_[lo + 1], 1e-16);
}

std::size_t ValloisCore::locate_panel(double a) const {
    if (a <= pos_a_.front()) return 0;
    if (a >= pos_a_.back()) return pos_a_.size() - 2;
    auto it = std::upper_bound(pos_a_.begin(), pos_a_.end(), a);
    return static_cast<std::size_t>(it - pos_a_.begin()) - 1;
}

double ValloisCore::alpha_interp(std::size_t panel, double b) const {
    const auto& p = panels_[panel];
    const auto& bw = bary_weights();
    const double a0 = pos_a_[panel], a1 = pos_a_[panel + 1];
    const double u = (2.0 * b - (a0 + a1)) / (a1 - a0);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < 7; ++j) {
        const double d = u - Gauss7::x[j];
        if (std::abs(d) < 1e-14) return p.pt[j].alpha;
        const double wj = bw[j] / d;
        num += wj * p.pt[j].alpha;
        den += wj;
    }
    return num / den;
}

double ValloisCore::alpha_at(double a) const {
    if (a <= a_star_) return a_star_;
    if (a >= pos_a_.back()) return alpha_node_.back();
    return alpha_interp(locate_panel(a), a);
}

double ValloisCore::alpha_inv_at(double c) const {
    if (c >= a_star_) return a_star_;
    if (c <= alpha_node_.back()) return pos_a_.back();
    std::size_t lo = 0, hi = alpha_node_.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (alpha_node_[mid] >= c)
            lo = mid;
        else
            hi = mid;
    }
    return bisect([&](double a) { return c - alpha_at(a); }, pos_a_[lo],
                  pos_a_[hi], 1e-16);
}

double ValloisCore::xi_at(double a) const {
    if (a <= a_star_) return 0.0;
    if (a >= pos_a_.back()) return xi_node_.back();
    const std::size_t i = locate_panel(a);
    return xi_node_[i] +
           gauss7(
               [&](double b) {
                   return 2.0 * q_at(b) / (alpha_interp(i, b) + 1.0 - b);
               },
               pos_a_[i], a);
}

double ValloisCore::a_of_l(double l) const {
    if (l <= 0.0) return a_star_;
    if (l >= xi_node_.back()) return pos_a_.back();
    auto it = std::upper_bound(xi_node_.begin(), xi_node_.end(), l);
    const std::size_t i = static_cast<std::size_t>(it - xi_node_.begin()) - 1;
    if (xi_node_[i + 1] <= xi_node_[i]) return pos_a_[i + 1];
    return bisect([&](double a) { return xi_at(a) - l; }, pos_a_[i],
                  pos_a_[i + 1], 1e-16);
}

double ValloisCore::psi_plus_at(double x) const {
    if (!(x > 0.0))
        throw Error(ErrorKind::invalid_parameter, "psi_plus: x must be > 0");
    const double a = std::min(std::max(mu_.cdf(x), a_star_), pos_a_.back());
    return xi_at(a);
}

double ValloisCore::psi_minus_at(double x) const {
    if (!(x < 0.0))
        throw Error(ErrorKind::invalid_parameter, "psi_minus: x must be < 0");
    const double c =
        std::min(std::max(mu_.cdf_left(x), alpha_node_.back()), a_star_);
    return xi_at(alpha_inv_at(c));
}

double ValloisCore::phi_plus_at(double l) const { return q_at(a_of_l(l)); }

double ValloisCore::phi_minus_at(double l) const {
    return mu_.quantile_left(alpha_at(a_of_l(l)));
}

double ValloisCore::nubar_at(double l) const {
    const double a = a_of_l(l);
    return alpha_at(a) + 1.0 - a;
}

double ValloisCore::balance_residual(std::size_t i) const {
    return std::abs(pos_t_[i] - jabs_at(alpha_node_[i]));
}

// ---------------------------------------------------------------------------
// spec-facing tables and the profile
// ---------------------------------------------------------------------------

ValloisTables build_tables(const QuantileMeasure& measure,
                           const VallowBuildOptions& opt) {
    auto core = ValloisCore::build(measure, opt);
    ValloisTables t;
    t.core = core;
    t.a_star = core->a_star();
    const auto& a = core->grid_a();
    const auto& al = core->alpha_nodes();
    const auto& xi = core->xi_nodes();
    t.alpha.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) t.alpha.emplace_back(a[i], al[i]);
    t.xi.reserve(2 * a.size());
    for (std::size_t i = a.size(); i-- > 1;) t.xi.emplace_back(al[i], -xi[i]);
    for (std::size_t i = 0; i < a.size(); ++i) t.xi.emplace_back(a[i], xi[i]);
    return t;
}

EmbeddingProfile build_profile(const QuantileMeasure& measure,
                               const VallowBuildOptions& opt) {
    auto wrap = wrap_atom_zero(measure);
    if (!wrap.stripped)
        throw Error(ErrorKind::degenerate_measure,
                    "point mass at zero: the embedding is tau = 0");
    auto core = ValloisCore::build(*wrap.stripped, opt);

    EmbeddingProfile prof;
    prof.p0 = wrap.p0;
    prof.core = core;
    const auto& a = core->grid_a();
    const auto& xi = core->xi_nodes();
    const auto& qp = core->q_nodes();
    const auto& qa = core->qalpha_nodes();
    const auto& al = core->alpha_nodes();
    const auto& w = core->w_nodes();
    const auto& mu = core->measure();

    auto push = [&prof](double l, double fp, double fm, double nb) {
        prof.grid_l.push_back(l);
        prof.phi_plus.push_back(fp);
        prof.phi_minus.push_back(fm);
        prof.survival.push_back(nb);
        prof.delta.push_back(-std::log(nb));
    };

    for (std::size_t i = 0; i < a.size(); ++i) {
        const double l = xi[i];
        if (i > 0) {
            // tail panels stretch in l; subdivide so the exported table keeps
            // a bounded row spacing
            const double gap = l - xi[i - 1];
            if (gap > opt.table_dl_max) {
                const int parts =
                    std::min(256, static_cast<int>(gap / opt.table_dl_max) + 1);
                const double a0 = a[i - 1], a1 = a[i];
                for (int s = 1; s < parts; ++s) {
                    const double b = a0 + (a1 - a0) * s / parts;
                    const double alb = core->alpha_interp_public(i - 1, b);
                    push(core->xi_at(b), mu.quantile(b), mu.quantile_left(alb),
                         alb + 1.0 - b);
                }
            }
            // a support gap at a[i] (or at its balance image) makes the
            // boundary jump; keep both one-sided values at the same l
            const double left_p = mu.quantile_left(a[i]);
            if (left_p < qp[i]) push(l, left_p, qa[i], w[i]);
            const double up_m = mu.quantile(al[i]);  // pre-jump value
            if (up_m > qa[i]) push(l, qp[i], up_m, w[i]);
        }
        push(l, qp[i], qa[i], w[i]);
    }
    return prof;
}

AtomWrap wrap_atom_zero(const QuantileMeasure& measure) {
    auto [p0, stripped] = measure.split_zero_atom();
    AtomWrap w;
    w.p0 = p0;
    w.stripped = std::move(stripped);
    return w;
}

// ---------------------------------------------------------------------------
// profile table evaluation
// ---------------------------------------------------------------------------

namespace {

// piecewise-linear lookup; at duplicated abscissae takes the later row
// (right-continuous convention)
double pl_at(const std::vector<double>& xs, const std::vector<double>& ys,
             double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double w = xs[i + 1] - xs[i];
    if (w <= 0.0) return ys[i + 1];
    const double t = (x - xs[i]) / w;
    return ys[i] + t * (ys[i + 1] - ys[i]);
}

}  // namespace

double EmbeddingProfile::phi_plus_at(double l) const {
    return pl_at(grid_l, phi_plus, l);
}

double EmbeddingProfile::phi_minus_at(double l) const {
    return pl_at(grid_l, phi_minus, l);
}

double EmbeddingProfile::delta_at(double l) const { return pl_at(grid_l, delta, l); }

double EmbeddingProfile::nubar_at(double l) const {
    if (l <= 0.0) return 1.0;
    return std::exp(-delta_at(l));
}

double EmbeddingProfile::psi_plus_at(double x) const {
    if (x < phi_plus.front()) return 0.0;
    if (x >= phi_plus.back()) return grid_l.back();
    auto it = std::upper_bound(phi_plus.begin(), phi_plus.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - phi_plus.begin());
    const double w = phi_plus[i] - phi_plus[i - 1];
    if (w <= 0.0) return grid_l[i];
    const double t = (x - phi_plus[i - 1]) / w;
    return grid_l[i - 1] + t * (grid_l[i] - grid_l[i - 1]);
}

double EmbeddingProfile::psi_minus_at(double x) const {
    if (x > phi_minus.front()) return 0.0;
    if (x <= phi_minus.back()) return grid_l.back();
    auto it = std::partition_point(phi_minus.begin(), phi_minus.end(),
                                   [x](double v) { return v >= x; });
    const std::size_t i = static_cast<std::size_t>(it - phi_minus.begin());
    const double w = phi_minus[i] - phi_minus[i - 1];
    if (w >= 0.0) return grid_l[i];
    const double t = (x - phi_minus[i - 1]) / w;
    return grid_l[i - 1] + t * (grid_l[i] - grid_l[i - 1]);
}

void EmbeddingProfile::validate_for_sampling() const {
    if (grid_l.size() < 2)
        throw Error(ErrorKind::truncated_profile, "profile table too short");
    if (survival.back() > 1e-8)
        throw Error(ErrorKind::truncated_profile,
                    "survival at the table end is " +
                        std::to_string(survival.back()) +
                        " (> 1e-8): table truncated too early");
    for (std::size_t i = 0; i < grid_l.size(); ++i) {
        if (grid_l[i] > 1e-12 && phi_plus[i] <= 0.0)
            throw Error(ErrorKind::degenerate_measure,
                        "phi_plus vanishes on an initial interval of positive "
                        "length (hazard diverges)");
        if (grid_l[i] > 1e-12 && phi_minus[i] >= 0.0)
            throw Error(ErrorKind::degenerate_measure,
                        "phi_minus vanishes on an initial interval of positive "
                        "length (hazard diverges)");
        if (i > 0 && delta[i] < delta[i - 1] - 1e-12)
            throw Error(ErrorKind::truncated_profile, "hazard not increasing");
    }
}

nlohmann::json EmbeddingProfile::to_json() const {
    nlohmann::json j;
    j["p0"] = p0;
    auto pack = [this](const std::vector<double>& ys) {
        auto arr = nlohmann::json::array();
        for (std::size_t i = 0; i < grid_l.size(); ++i)
            arr.push_back({grid_l[i], ys[i]});
        return arr;
    };
    j["phi_plus"] = pack(phi_plus);
    j["phi_minus"] = pack(phi_minus);
    j["delta"] = pack(delta);
    return j;
}

EmbeddingProfile EmbeddingProfile::from_json(const nlohmann::json& j) {
    EmbeddingProfile p;
    p.p0 = j.at("p0").get<double>();
    const auto& fp = j.at("phi_plus");
    const auto& fm = j.at("phi_minus");
    const auto& dl = j.at("delta");
    if (fp.size() != fm.size() || fp.size() != dl.size() || fp.size() < 2)
        throw Error(ErrorKind::io, "profile JSON: table sizes disagree");
    for (std::size_t i = 0; i < fp.size(); ++i) {
        const double l = fp[i].at(0).get<double>();
        if (std::abs(fm[i].at(0).get<double>() - l) > 1e-12 ||
            std::abs(dl[i].at(0).get<double>() - l) > 1e-12)
            throw Error(ErrorKind::io, "profile JSON: l-grids disagree");
        p.grid_l.push_back(l);
        p.phi_plus.push_back(fp[i].at(1).get<double>());
        p.phi_minus.push_back(fm[i].at(1).get<double>());
        p.delta.push_back(dl[i].at(1).get<double>());
        p.survival.push_back(std::exp(-p.delta.back()));
    }
    return p;
}

// ---------------------------------------------------------------------------
// exact sampling by survival inversion
// ---------------------------------------------------------------------------

std::pair<double, double> exact_sample(const EmbeddingProfile& profile,
                                       RngStream& rng) {
    if (profile.p0 > 0.0 && rng.next_uniform() < profile.p0)
        return {0.0, 0.0};
    const double d = -std::log(rng.next_uniform());
    const auto& dl = profile.delta;
    const auto& ls = profile.grid_l;
    double l;
    if (d >= dl.back()) {
        l = ls.back();  // survival there is below the sampling precondition
    } else {
        auto it = std::upper_bound(dl.begin(), dl.end(), d);
        const std::size_t i = static_cast<std::size_t>(it - dl.begin()) - 1;
        const double w = dl[i + 1] - dl[i];
        l = w <= 0.0 ? ls[i + 1]
                     : ls[i] + (d - dl[i]) / w * (ls[i + 1] - ls[i]);
    }
    const double xp = std::max(profile.phi_plus_at(l), 1e-300);
    const double xm = std::max(-profile.phi_minus_at(l), 1e-300);
    // excursion rates 1/(2 phi+) vs 1/(2 |phi-|)
    const double p_up = xm / (xp + xm);
    return {l, rng.next_uniform() < p_up ? xp : -xm};
}

}  // namespace loctime
