#include "loctime/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "loctime/numeric.hpp"

namespace loctime {

namespace {

constexpr double kGridEps = 1e-6;  // display-grid tail truncation in p

double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

}  // namespace

// ---------------------------------------------------------------------------
// queries
// ---------------------------------------------------------------------------

double QuantileMeasure::grid_quantile(double p) const {
    const auto& ns = nodes_;
    if (p <= ns.front().p) return ns.front().x;
    if (p >= ns.back().p) {
        if (interp_ == Interp::step) {
            // last piece extends to 1
        }
        return ns.back().x;
    }
    // first node with node.p > p
    auto it = std::upper_bound(ns.begin(), ns.end(), p,
                               [](double v, const Node& n) { return v < n.p; });
    const std::size_t hi = static_cast<std::size_t>(it - ns.begin());
    const Node& a = ns[hi - 1];
    if (interp_ == Interp::step) return a.x;
    const Node& b = ns[hi];
    if (a.p == p || b.p == a.p) return a.x;
    const double t = (p - a.p) / (b.p - a.p);
    return a.x + t * (b.x - a.x);
}

double QuantileMeasure::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorKind::invalid_parameter, "quantile: p must lie in (0,1)");
    if (p0_ <= 0.0) {
        if (analytic_quantile_) return analytic_quantile_(p);
        return grid_quantile(p);
    }
    // full law = conditional grid law + atom at zero
    const double cm = p0_ == 1.0 ? 0.0
                                 : (analytic_cdf_ ? analytic_cdf_(0.0) : grid_cdf(0.0, true));
    const double t1 = (1.0 - p0_) * cm;
    if (p < t1) {
        const double q = p / (1.0 - p0_);
        return analytic_quantile_ ? analytic_quantile_(q) : grid_quantile(q);
    }
    if (p < t1 + p0_) return 0.0;
    const double q = (p - p0_) / (1.0 - p0_);
    return analytic_quantile_ ? analytic_quantile_(q) : grid_quantile(q);
}

double QuantileMeasure::quantile_left(double p) const {
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorKind::invalid_parameter, "quantile_left: p outside (0,1)");
    if (analytic_quantile_ && p0_ <= 0.0) return analytic_quantile_(p);
    if (p0_ > 0.0) return quantile(p);  // atom handling shares the main path
    const auto& ns = nodes_;
    if (p <= ns.front().p) return ns.front().x;
    if (p > ns.back().p) return ns.back().x;
    // first node with node.p >= p
    auto it = std::lower_bound(ns.begin(), ns.end(), p,
                               [](const Node& n, double v) { return n.p < v; });
    const std::size_t i = static_cast<std::size_t>(it - ns.begin());
    if (ns[i].p == p) {
        if (interp_ == Interp::step) return i > 0 ? ns[i - 1].x : ns[i].x;
        return ns[i].x;  // first node of an equal-p block: the left value
    }
    return grid_quantile(p);  // continuity point
}

double QuantileMeasure::grid_cdf(double x, bool left_limit) const {
    const auto& ns = nodes_;
    if (left_limit) {
        if (x <= ns.front().x) return 0.0;
        if (x > ns.back().x) return 1.0;
        // first node with node.x >= x
        auto it = std::lower_bound(ns.begin(), ns.end(), x,
                                   [](const Node& n, double v) { return n.x < v; });
        const std::size_t i = static_cast<std::size_t>(it - ns.begin());
        if (ns[i].x == x) return ns[i].p;
        // ns[i-1].x < x < ns[i].x
        if (interp_ == Interp::step) return ns[i].p;
        const Node& a = ns[i - 1];
        const Node& b = ns[i];
        if (b.p == a.p) return a.p;
        return a.p + (x - a.x) / (b.x - a.x) * (b.p - a.p);
    }
    if (x < ns.front().x) return 0.0;
    if (x >= ns.back().x) return 1.0;
    // last node with node.x <= x
    auto it = std::upper_bound(ns.begin(), ns.end(), x,
                               [](double v, const Node& n) { return v < n.x; });
    const std::size_t j = static_cast<std::size_t>(it - ns.begin()) - 1;
    const Node& a = ns[j];
    const Node& b = ns[j + 1];
    if (interp_ == Interp::step) return b.p == a.p ? a.p : b.p;
    if (a.x == x || b.x == a.x) {
        // atoms / exact hit: right-continuity puts us at the top of the run
        if (a.x == x) return a.p;
    }
    if (b.p == a.p) return a.p;
    return a.p + (x - a.x) / (b.x - a.x) * (b.p - a.p);
}

double QuantileMeasure::cdf(double x) const {
    double g;
    if (analytic_cdf_)
        g = analytic_cdf_(x);
    else
        g = grid_cdf(x, false);
    if (p0_ > 0.0) g = (1.0 - p0_) * g + (x >= 0.0 ? p0_ : 0.0);
    return clamp01(g);
}

double QuantileMeasure::cdf_left(double x) const {
    double g;
    if (analytic_cdf_)
        g = analytic_cdf_(x);  // families are atomless: left limit = value
    else
        g = grid_cdf(x, true);
    if (p0_ > 0.0) g = (1.0 - p0_) * g + (x > 0.0 ? p0_ : 0.0);
    return clamp01(g);
}

double QuantileMeasure::tail(double x) const { return 1.0 - cdf_left(x); }

double QuantileMeasure::mean() const {
    const auto& ns = nodes_;
    double m = 0.0;
    if (interp_ == Interp::step) {
        for (std::size_t k = 0; k < ns.size(); ++k) {
            const double p_lo = k == 0 ? 0.0 : ns[k].p;  // first piece clamps to 0
            const double p_hi = (k + 1 < ns.size()) ? ns[k + 1].p : 1.0;
            m += ns[k].x * (p_hi - p_lo);
        }
    } else {
        m += ns.front().x * ns.front().p;
        for (std::size_t i = 0; i + 1 < ns.size(); ++i)
            m += 0.5 * (ns[i].x + ns[i + 1].x) * (ns[i + 1].p - ns[i].p);
        m += ns.back().x * (1.0 - ns.back().p);
    }
    return (1.0 - p0_) * m;
}

double QuantileMeasure::ks_distance(const QuantileMeasure& other) const {
    std::vector<double> xs;
    xs.reserve(nodes_.size() + other.nodes_.size() + 2);
    for (const auto& n : nodes_) xs.push_back(n.x);
    for (const auto& n : other.nodes_) xs.push_back(n.x);
    if (p0_ > 0.0 || other.p0_ > 0.0) xs.push_back(0.0);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    double d = 0.0;
    for (double x : xs) {
        d = std::max(d, std::abs(cdf(x) - other.cdf(x)));
        d = std::max(d, std::abs(cdf_left(x) - other.cdf_left(x)));
    }
    return d;
}

std::vector<double> QuantileMeasure::breakpoints() const {
    std::vector<double> bs = analytic_breaks_;
    if (!analytic_quantile_) {
        for (const auto& n : nodes_) bs.push_back(n.p);
    }
    std::sort(bs.begin(), bs.end());
    bs.erase(std::unique(bs.begin(), bs.end()), bs.end());
    return bs;
}

void QuantileMeasure::validate(double centering_tol) const {
    if (nodes_.size() < 1)
        throw Error(ErrorKind::insufficient_data, "measure grid is empty");
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        if (nodes_[i + 1].p < nodes_[i].p)
            throw Error(ErrorKind::invalid_parameter, "quantile grid: p not sorted");
        if (nodes_[i + 1].x < nodes_[i].x)
            throw Error(ErrorKind::invalid_parameter,
                        "quantile grid: values not nondecreasing");
    }
    if (p0_ < 0.0 || p0_ >= 1.0 + 1e-15)
        throw Error(ErrorKind::invalid_parameter, "atom_at_zero outside [0,1)");
    const double m = mean();
    if (std::abs(m) > centering_tol)
        throw Error(ErrorKind::centering,
                    "measure not centered: |mean| = " + std::to_string(std::abs(m)));
}

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

QuantileMeasure QuantileMeasure::sym_exp(double alpha, int grid_nodes) {
    if (!(alpha > 0.0))
        throw Error(ErrorKind::invalid_parameter, "sym_exp: alpha must be > 0");
    const double lam = 2.0 * alpha * alpha;
    QuantileMeasure m;
    m.analytic_quantile_ = [lam](double p) {
        return p < 0.5 ? std::log(2.0 * p) / lam : -std::log(2.0 * (1.0 - p)) / lam;
    };
    m.analytic_cdf_ = [lam](double x) {
        return x < 0.0 ? 0.5 * std::exp(lam * x) : 1.0 - 0.5 * std::exp(-lam * x);
    };
    m.analytic_breaks_ = {0.5};
    m.symmetric_ = true;
    m.interp_ = Interp::piecewise_linear;
    const int n = std::max(grid_nodes, 16);
    m.nodes_.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double p = (i + 0.5) / n;
        p = std::min(1.0 - kGridEps, std::max(kGridEps, p));
        m.nodes_.push_back({p, m.analytic_quantile_(p)});
    }
    return m;
}

QuantileMeasure QuantileMeasure::uniform(double half_width, int grid_nodes) {
    if (!(half_width > 0.0))
        throw Error(ErrorKind::invalid_parameter, "uniform: half_width must be > 0");
    const double w = half_width;
    QuantileMeasure m;
    m.analytic_quantile_ = [w](double p) { return w * (2.0 * p - 1.0); };
    m.analytic_cdf_ = [w](double x) { return clamp01((x + w) / (2.0 * w)); };
    m.symmetric_ = true;
    m.interp_ = Interp::piecewise_linear;
    const int n = std::max(grid_nodes, 16);
    for (int i = 0; i < n; ++i) {
        const double p = (i + 0.5) / n;
        m.nodes_.push_back({p, m.analytic_quantile_(p)});
    }
    return m;
}

QuantileMeasure QuantileMeasure::two_point(double a) {
    if (!(a > 0.0))
        throw Error(ErrorKind::invalid_parameter, "two_point: a must be > 0");
    return discrete({{-a, 0.5}, {a, 0.5}});
}

QuantileMeasure QuantileMeasure::discrete(
    std::vector<std::pair<double, double>> atoms) {
    if (atoms.empty())
        throw Error(ErrorKind::insufficient_data, "discrete: no atoms");
    std::sort(atoms.begin(), atoms.end());
    // merge duplicates, normalise
    std::vector<std::pair<double, double>> merged;
    double total = 0.0;
    for (const auto& [x, w] : atoms) {
        if (w < 0.0)
            throw Error(ErrorKind::invalid_parameter, "discrete: negative weight");
        if (w == 0.0) continue;
        if (!merged.empty() && merged.back().first == x)
            merged.back().second += w;
        else
            merged.emplace_back(x, w);
        total += w;
    }
    if (merged.empty() || total <= 0.0)
        throw Error(ErrorKind::insufficient_data, "discrete: zero total mass");
    double mean = 0.0;
    for (auto& [x, w] : merged) {
        w /= total;
        mean += x * w;
    }
    QuantileMeasure m;
    m.interp_ = Interp::step;
    double cum = 0.0;
    for (const auto& [x, w] : merged) {
        m.nodes_.push_back({cum, x - mean});
        cum += w;
    }
    // symmetry detection (after centering)
    m.symmetric_ = true;
    for (std::size_t i = 0, j = m.nodes_.size(); i < j; ++i) {
        const double w_i = (i + 1 < m.nodes_.size() ? m.nodes_[i + 1].p : 1.0) -
                           m.nodes_[i].p;
        const std::size_t r = m.nodes_.size() - 1 - i;
        const double w_r = (r + 1 < m.nodes_.size() ? m.nodes_[r + 1].p : 1.0) -
                           m.nodes_[r].p;
        if (std::abs(m.nodes_[i].x + m.nodes_[r].x) > 1e-12 ||
            std::abs(w_i - w_r) > 1e-12) {
            m.symmetric_ = false;
            break;
        }
    }
    return m;
}

QuantileMeasure QuantileMeasure::from_grid(std::vector<Node> nodes, Interp interp,
                                           double p0) {
    if (nodes.size() < 1)
        throw Error(ErrorKind::insufficient_data, "from_grid: empty grid");
    QuantileMeasure m;
    m.nodes_ = std::move(nodes);
    m.interp_ = interp;
    m.p0_ = p0;
    const double shift = m.mean() / (1.0 - p0);
    for (auto& n : m.nodes_) n.x -= shift;
    const double resid = m.mean();
    if (std::abs(resid) > 1e-10 * (1.0 + std::abs(m.nodes_.back().x)))
        throw Error(ErrorKind::centering,
                    "user grid not centered after auto-shift, residual mean = " +
                        std::to_string(resid));
    return m;
}

QuantileMeasure QuantileMeasure::from_samples(std::span<const double> samples) {
    if (samples.size() < 2)
        throw Error(ErrorKind::insufficient_data,
                    "from_samples: need at least 2 samples");
    std::vector<double> xs(samples.begin(), samples.end());
    std::sort(xs.begin(), xs.end());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    QuantileMeasure m;
    m.interp_ = Interp::step;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i] - mean;
        if (!m.nodes_.empty() && m.nodes_.back().x == x) continue;
        m.nodes_.push_back({static_cast<double>(i) / n, x});
    }
    return m;
}

std::pair<double, std::optional<QuantileMeasure>> QuantileMeasure::split_zero_atom()
    const {
    const double c1 = grid_cdf(0.0, true);
    const double c2 = grid_cdf(0.0, false);
    const double w = std::max(0.0, c2 - c1);
    const double p0_total = p0_ + (1.0 - p0_) * w;
    if (p0_total >= 1.0 - 1e-15) return {1.0, std::nullopt};
    if (w <= 0.0) {
        QuantileMeasure out = *this;
        out.p0_ = 0.0;
        return {p0_, std::move(out)};
    }
    QuantileMeasure out;
    out.interp_ = interp_;
    out.symmetric_ = symmetric_;
    const double s = 1.0 - w;
    for (const auto& n : nodes_) {
        if (n.x < 0.0)
            out.nodes_.push_back({n.p / s, n.x});
        else if (n.x > 0.0)
            out.nodes_.push_back({(n.p - w) / s, n.x});
    }
    if (interp_ == Interp::piecewise_linear) {
        // keep the (massless) junction so adjacent segments still meet 0
        out.nodes_.push_back({c1 / s, 0.0});
        std::sort(out.nodes_.begin(), out.nodes_.end(),
                  [](const Node& a, const Node& b) {
                      return a.p < b.p || (a.p == b.p && a.x < b.x);
                  });
    }
    if (out.nodes_.empty()) return {1.0, std::nullopt};
    return {p0_total, std::move(out)};
}

QuantileMeasure make_parametric(const FamilySpec& spec) {
    if (spec.family == "sym_exp") return QuantileMeasure::sym_exp(spec.alpha, spec.grid_nodes);
    if (spec.family == "two_point") return QuantileMeasure::two_point(spec.a);
    if (spec.family == "uniform")
        return QuantileMeasure::uniform(spec.half_width, spec.grid_nodes);
    if (spec.family == "user_grid") {
        auto interp = spec.grid_interp == "step" ? QuantileMeasure::Interp::step
                                                 : QuantileMeasure::Interp::piecewise_linear;
        return QuantileMeasure::from_grid(spec.grid, interp);
    }
    throw Error(ErrorKind::invalid_parameter, "unknown family: " + spec.family);
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

nlohmann::json QuantileMeasure::to_json() const {
    nlohmann::json j;
    j["p0"] = p0_;
    auto arr = nlohmann::json::array();
    for (const auto& n : nodes_) arr.push_back({n.p, n.x});
    j["nodes"] = std::move(arr);
    j["interp"] = interp_ == Interp::step ? "step" : "piecewise_linear";
    return j;
}

QuantileMeasure QuantileMeasure::from_json(const nlohmann::json& j) {
    QuantileMeasure m;
    m.p0_ = j.at("p0").get<double>();
    m.interp_ = j.at("interp").get<std::string>() == "step" ? Interp::step
                                                            : Interp::piecewise_linear;
    for (const auto& e : j.at("nodes"))
        m.nodes_.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    if (m.nodes_.empty())
        throw Error(ErrorKind::insufficient_data, "measure JSON has no nodes");
    return m;
}

// ---------------------------------------------------------------------------
// call curves
// ---------------------------------------------------------------------------

CallCurve::CallCurve(double forward, std::vector<std::pair<double, double>> quotes)
    : forward_(forward), quotes_(std::move(quotes)) {
    if (!(forward_ > 0.0))
        throw Error(ErrorKind::invalid_parameter, "call curve: forward must be > 0");
    for (std::size_t i = 0; i + 1 < quotes_.size(); ++i)
        if (quotes_[i + 1].first <= quotes_[i].first)
            throw Error(ErrorKind::invalid_parameter,
                        "call curve: strikes must be strictly increasing");
}

void CallCurve::validate(double tol) const {
    if (quotes_.size() < 3)
        throw Error(ErrorKind::insufficient_data,
                    "call curve: need at least 3 strikes");
    double scale = 0.0;
    for (const auto& [k, c] : quotes_) scale = std::max(scale, std::abs(c));
    const double t = tol * (1.0 + scale);
    for (const auto& [k, c] : quotes_) {
        if (c < std::max(forward_ - k, 0.0) - t)
            throw Error(ErrorKind::arbitrage_violation,
                        "call price below intrinsic at strike " + std::to_string(k));
    }
    for (std::size_t i = 0; i + 1 < quotes_.size(); ++i) {
        if (quotes_[i + 1].second > quotes_[i].second + t)
            throw Error(ErrorKind::arbitrage_violation,
                        "call prices increasing at strike " +
                            std::to_string(quotes_[i + 1].first));
    }
    for (std::size_t i = 1; i + 1 < quotes_.size(); ++i) {
        const double dk0 = quotes_[i].first - quotes_[i - 1].first;
        const double dk1 = quotes_[i + 1].first - quotes_[i].first;
        const double s0 = (quotes_[i].second - quotes_[i - 1].second) / dk0;
        const double s1 = (quotes_[i + 1].second - quotes_[i].second) / dk1;
        if (s1 < s0 - tol * (1.0 + scale))
            throw Error(ErrorKind::arbitrage_violation,
                        "call prices not convex at strike " +
                            std::to_string(quotes_[i].first));
    }
}

CallCurve CallCurve::from_csv_file(const std::string& path, double forward) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("strike,price", 0) != 0)
        throw Error(ErrorKind::io, path + ": expected header 'strike,price'");
    std::vector<std::pair<double, double>> quotes;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
            throw Error(ErrorKind::io, path + ": bad row '" + line + "'");
        quotes.emplace_back(std::stod(a), std::stod(b));
    }
    return CallCurve(forward, std::move(quotes));
}

void CallCurve::to_csv_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, "cannot open " + path);
    out << "strike,price\n";
    char buf[64];
    for (const auto& [k, c] : quotes_) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", k, c);
        out << buf;
    }
}

QuantileMeasure from_call_curve(const CallCurve& curve) {
    curve.validate();
    const auto& q = curve.quotes();
    const double s0 = curve.forward();
    const std::size_t n = q.size();

    // work in P = S - S0 units
    std::vector<double> k(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        k[i] = q[i].first - s0;
        c[i] = q[i].second;
    }

    // slopes per panel, clamped to the no-arbitrage band [-1, 0]
    std::vector<double> slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        slope[i] = std::min(0.0, std::max(-1.0, (c[i + 1] - c[i]) / (k[i + 1] - k[i])));

    // butterfly masses at interior strikes; negatives are clipped
    std::vector<double> mass(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i)
        mass[i] = std::max(0.0, slope[i] - slope[i - 1]);
    double m_left = std::max(0.0, 1.0 + slope.front());
    double m_right = std::max(0.0, -slope.back());

    double total = m_left + m_right;
    for (std::size_t i = 1; i + 1 < n; ++i) total += mass[i];
    if (total <= 0.0)
        throw Error(ErrorKind::arbitrage_violation, "call curve carries no mass");
    m_left /= total;
    m_right /= total;
    for (auto& m : mass) m /= total;

    const double tiny = 1e-12;
    auto midpoint = [&](std::size_t i, std::size_t j) {
        return 0.5 * (k[i] + k[j]);
    };

    // classification: an interior strike is an atom when its butterfly
    // dwarfs both neighbours (isolated spike in the discrete density)
    std::vector<bool> is_atom(n, false);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (mass[i] <= tiny) continue;
        const double nb = std::max(i >= 2 ? mass[i - 1] : 0.0,
                                   i + 2 < n ? mass[i + 1] : 0.0);
        is_atom[i] = mass[i] >= 10.0 * std::max(nb, tiny);
    }

    // diffuse cell extents; support-edge refinement against the intrinsic
    struct Piece {
        double w;        // probability mass
        double lo, hi;   // support (lo == hi encodes an atom)
    };
    std::vector<Piece> pieces;
    if (m_left > tiny) {
        // tail mass below the lowest strike located at its conditional mean
        const double put0 = c.front() + k.front();
        const double x_l = k.front() - std::max(0.0, put0) / m_left;
        pieces.push_back({m_left, x_l, x_l});
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (mass[i] <= tiny) continue;
        if (is_atom[i]) {
            pieces.push_back({mass[i], k[i], k[i]});
            continue;
        }
        double lo = i >= 1 ? midpoint(i - 1, i) : k[i];
        double hi = i + 1 < n ? midpoint(i, i + 1) : k[i];
        // left support edge: no mass to the left of this cell
        const bool empty_left = m_left <= tiny && (i < 2 || mass[i - 1] <= tiny);
        if (empty_left) {
            const double put_i = c[i] + k[i];
            const double f = i + 2 < n && mass[i + 1] > tiny
                                 ? mass[i + 1] / (midpoint(i, i + 1) - midpoint(i - 1, i))
                                 : mass[i] / (hi - lo);
            if (put_i <= tiny) {
                lo = k[i];  // no mass below this strike at all
            } else if (f > 0.0) {
                const double e = k[i] - std::sqrt(2.0 * put_i / f);
                if (e > k[i - 1] && e < hi) lo = std::min(e, k[i]);
            }
        }
        const bool empty_right = m_right <= tiny && (i + 2 >= n || mass[i + 1] <= tiny);
        if (empty_right) {
            const double f = i >= 2 && mass[i - 1] > tiny
                                 ? mass[i - 1] / (midpoint(i - 1, i) - midpoint(i - 2, i - 1))
                                 : mass[i] / (hi - lo);
            if (c[i] <= tiny) {
                hi = k[i];
            } else if (f > 0.0) {
                const double e = k[i] + std::sqrt(2.0 * c[i] / f);
                if (e < k[i + 1] && e > lo) hi = std::max(e, k[i]);
            }
        }
        pieces.push_back({mass[i], lo, hi});
    }
    if (m_right > tiny) {
        const double x_r = k.back() + c.back() / m_right;
        pieces.push_back({m_right, x_r, x_r});
    }

    // assemble a piecewise-linear quantile grid
    std::vector<QuantileMeasure::Node> nodes;
    double cum = 0.0;
    for (const auto& pc : pieces) {
        if (pc.lo == pc.hi) {
            nodes.push_back({cum, pc.lo});
            nodes.push_back({cum + pc.w, pc.lo});
        } else {
            nodes.push_back({cum, pc.lo});
            nodes.push_back({cum + pc.w, pc.hi});
        }
        cum += pc.w;
    }
    // drop duplicate consecutive nodes
    std::vector<QuantileMeasure::Node> dedup;
    for (const auto& nd : nodes) {
        if (!dedup.empty() && dedup.back().p == nd.p && dedup.back().x == nd.x)
            continue;
        dedup.push_back(nd);
    }

    auto m = QuantileMeasure::from_grid(std::move(dedup),
                                        QuantileMeasure::Interp::piecewise_linear);
    if (std::abs(m.mean()) > 1e-8)
        throw Error(ErrorKind::centering, "recovered law failed recentering");
    return m;
}

}  // namespace loctime
