#include "extraction/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "extraction/errors.hpp"
#include "extraction/quadrature.hpp"
#include "extraction/roots.hpp"

namespace extraction::boundary {

namespace {

constexpr double kTieTolerance = 1e-12;

// Root of (x - c) - psi^(k)/psi^(k+1) on (c, inf); increasing in x.
double solve_lambda_root(const ModelParams& p, const QuadratureSpec& q, int k) {
    auto f = [&](double x) {
        const auto e = specfun::psi(x, p, q);
        return (x - p.c) - e.ratio(k, k + 1);
    };
    const double step = 0.5 * p.sigma / std::sqrt(2.0 * p.b);
    const auto br = roots::expand_upward(f, p.c, step);
    roots::Tolerances tol;
    tol.x_tol = 1e-14 * std::max(1.0, std::abs(br.hi));
    return roots::solve_bracketed(f, br.lo, br.hi, br.f_lo, br.f_hi, tol).x;
}

}  // namespace

double find_x0(const ModelParams& p, const QuadratureSpec& q) {
    p.validate();
    if (p.brownian()) throw DomainError("find_x0: needs b > 0");
    return solve_lambda_root(p, q, 0);
}

double find_x_inf(const ModelParams& p, const QuadratureSpec& q) {
    p.validate();
    if (p.brownian()) throw DomainError("find_x_inf: needs b > 0");
    return solve_lambda_root(p, q, 1);
}

double x_bar(const ModelParams& p) { return (p.a + p.rho * p.c) / (p.rho + p.b); }

double x_star_bm(const ModelParams& p) {
    if (!p.brownian()) throw DomainError("x_star_bm: needs b == 0");
    return p.c + 1.0 / specfun::exponent_n(p);
}

CriticalPrices critical_prices(const ModelParams& p, const QuadratureSpec& q) {
    p.validate();
    q.validate();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    CriticalPrices out;
    if (p.brownian()) {
        out.branch = Branch::Brownian;
        out.n = specfun::exponent_n(p);
        out.x_star = p.c + 1.0 / out.n;
        out.x0 = out.x_inf = out.x_bar = nan;
        return out;
    }
    out.branch = Branch::OrnsteinUhlenbeck;
    out.n = out.x_star = nan;
    out.x0 = find_x0(p, q);
    out.x_inf = find_x_inf(p, q);
    out.x_bar = x_bar(p);
    if (!(p.c < out.x_inf && out.x_inf < out.x0 && out.x_bar < out.x0)) {
        std::ostringstream os;
        os.precision(17);
        os << "critical price ordering violated: c=" << p.c << " x_inf=" << out.x_inf
           << " x0=" << out.x0 << " x_bar=" << out.x_bar;
        throw NumericError(os.str());
    }
    return out;
}

double coefficient_at_price(const specfun::PsiEval& e, const ModelParams& p) {
    const auto& v = e.scaled;
    const double num = (e.x - p.c) * v[1] - v[0];
    const double den = p.alpha * (v[1] * v[1] - v[2] * v[0]);
    if (den == 0.0) throw NumericError("coefficient A: psi'^2 - psi'' psi vanished");
    return num / den * std::exp(-e.log_scale);
}

double coefficient_slope_at_price(const specfun::PsiEval& e, const ModelParams& p) {
    const auto& v = e.scaled;
    const double num = (e.x - p.c) * v[2] - v[1];
    const double den = v[2] * v[0] - v[1] * v[1];
    if (den == 0.0) throw NumericError("coefficient A': psi'' psi - psi'^2 vanished");
    return num / den * std::exp(-e.log_scale);
}

double boundary_integrand(const specfun::PsiEval& e, const ModelParams& p) {
    const auto& v = e.scaled;
    const double z = e.x;
    const double m_num = (z - p.c) * v[1] - v[0];
    const double n_num = (z - p.c) * v[2] - v[1];
    const double numer = (v[3] * m_num - v[2] * n_num) * v[0];
    const double denom = -p.alpha * (v[2] * v[0] - v[1] * v[1]) * n_num;
    return numer / denom;
}

double boundary_integrand(double z, const ModelParams& p, const QuadratureSpec& q, double x_inf) {
    if (!(z > x_inf)) {
        std::ostringstream os;
        os.precision(17);
        os << "boundary integrand: z = " << z << " must exceed x_inf = " << x_inf;
        throw DomainError(os.str());
    }
    return boundary_integrand(specfun::psi(z, p, q), p);
}

// ---------------------------------------------------------------------------

BoundaryTable::BoundaryTable(double x_inf, double x0, std::vector<double> nodes,
                             std::vector<double> f_values, std::vector<double> log_slopes)
    : x_inf_(x_inf), x0_(x0), nodes_(std::move(nodes)), f_(std::move(f_values)), m_(std::move(log_slopes)) {
    if (nodes_.size() < 2 || nodes_.size() != f_.size() || nodes_.size() != m_.size())
        throw DomainError("boundary table: nodes, values and slopes must have equal size >= 2");
    s_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > x_inf_)) throw DomainError("boundary table: node at or below x_inf");
        s_[i] = std::log(nodes_[i] - x_inf_);
    }
    const std::size_t cells = nodes_.size() - 1;
    m_left_.resize(cells);
    m_right_.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double h = s_[i + 1] - s_[i];
        const double delta = (f_[i + 1] - f_[i]) / h;
        double ml = m_[i];
        double mr = m_[i + 1];
        if (delta != 0.0) {
            const double a = ml / delta;
            const double b = mr / delta;
            if (a < 0.0) ml = 0.0;
            if (b < 0.0) mr = 0.0;
            const double r2 = std::max(a, 0.0) * std::max(a, 0.0) + std::max(b, 0.0) * std::max(b, 0.0);
            if (r2 > 9.0) {
                const double tau = 3.0 / std::sqrt(r2);
                ml = tau * std::max(a, 0.0) * delta;
                mr = tau * std::max(b, 0.0) * delta;
            }
        } else {
            ml = mr = 0.0;
        }
        m_left_[i] = ml;
        m_right_[i] = mr;
    }
}

std::size_t BoundaryTable::cell_for_s(double s) const {
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = static_cast<std::size_t>(std::distance(s_.begin(), it));
    if (i == 0) return 0;
    return std::min(i - 1, s_.size() - 2);
}

double BoundaryTable::eval_cell(std::size_t i, double s, double* dfds) const {
    const double h = s_[i + 1] - s_[i];
    const double t = (s - s_[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double f0 = f_[i], f1 = f_[i + 1];
    const double m0 = m_left_[i] * h, m1 = m_right_[i] * h;
    if (dfds) {
        *dfds = ((6.0 * t2 - 6.0 * t) * (f0 - f1) + (3.0 * t2 - 4.0 * t + 1.0) * m0 +
                 (3.0 * t2 - 2.0 * t) * m1) / h;
    }
    return (2.0 * t3 - 3.0 * t2 + 1.0) * f0 + (t3 - 2.0 * t2 + t) * m0 +
           (-2.0 * t3 + 3.0 * t2) * f1 + (t3 - t2) * m1;
}

double BoundaryTable::F(double x) const {
    if (x >= x0_) {
        if (x <= x0_ + kTieTolerance * std::max(1.0, std::abs(x0_))) return 0.0;
        std::ostringstream os;
        os.precision(17);
        os << "F: x = " << x << " beyond x0 = " << x0_;
        throw DomainError(os.str());
    }
    if (!(x > x_inf_)) {
        std::ostringstream os;
        os.precision(17);
        os << "F: x = " << x << " at or below x_inf = " << x_inf_;
        throw DomainError(os.str());
    }
    const double s = std::log(x - x_inf_);
    if (s < s_.front()) return f_.front() + tail_coefficient() * (s_.front() - s);
    return eval_cell(cell_for_s(s), s, nullptr);
}

double BoundaryTable::derivative(double x) const {
    if (!(x > x_inf_) || x > x0_ + kTieTolerance * std::max(1.0, std::abs(x0_)))
        throw DomainError("F': argument outside (x_inf, x0]");
    const double off = x - x_inf_;
    const double s = std::log(off);
    if (s < s_.front()) return -tail_coefficient() / off;
    double dfds = 0.0;
    eval_cell(cell_for_s(std::min(s, s_.back())), std::min(s, s_.back()), &dfds);
    return dfds / off;
}

double BoundaryTable::inverse(double y) const {
    if (!(y >= 0.0)) throw DomainError("F inverse: reserve level must be >= 0");
    if (y == 0.0) return x0_;
    if (y >= f_.front()) {
        const double s = s_.front() - (y - f_.front()) / tail_coefficient();
        return std::max(x_inf_ + std::exp(s), std::nextafter(x_inf_, x0_));
    }
    // f_ is decreasing: first index with f_[i] < y, cell is [i-1, i].
    auto it = std::lower_bound(f_.begin(), f_.end(), y, [](double fv, double yy) { return fv > yy; });
    std::size_t hi_idx = static_cast<std::size_t>(std::distance(f_.begin(), it));
    hi_idx = std::clamp<std::size_t>(hi_idx, 1, f_.size() - 1);
    const std::size_t i = hi_idx - 1;

    // Safeguarded Newton on the (decreasing) Hermite cubic.
    double lo = s_[i], hi = s_[i + 1];
    double s = lo + (hi - lo) * (f_[i] - y) / (f_[i] - f_[i + 1]);
    for (int it_count = 0; it_count < 100; ++it_count) {
        double d = 0.0;
        const double r = eval_cell(i, s, &d) - y;
        if (r == 0.0) break;
        if (r > 0.0) lo = s; else hi = s;
        double next = (d < 0.0) ? s - r / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) <= 1e-16 * std::max(1.0, std::abs(s)) || hi - lo <= 0.0) {
            s = next;
            break;
        }
        s = next;
    }
    return std::min(x_inf_ + std::exp(s), x0_);
}

void BoundaryTable::check_invariants() const {
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        if (!(nodes_[i] < nodes_[i + 1])) throw NumericError("boundary table: nodes not increasing");
        if (!(f_[i] > f_[i + 1])) {
            std::ostringstream os;
            os.precision(17);
            os << "boundary table: F not strictly decreasing at node " << i << " (x = " << nodes_[i] << ")";
            throw NumericError(os.str());
        }
    }
    if (f_.back() != 0.0 || nodes_.back() != x0_) throw NumericError("boundary table: F(x0) != 0");
    for (double m : m_)
        if (!(m < 0.0)) throw NumericError("boundary table: non-negative slope at a node");
}

// ---------------------------------------------------------------------------

BoundaryTable rebuild_from_nodes(const ModelParams& p, const QuadratureSpec& q, double x_inf, double x0,
                                 std::vector<double> nodes, std::vector<double> f_values) {
    std::vector<double> slopes(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        slopes[i] = -boundary_integrand(nodes[i], p, q, x_inf) * (nodes[i] - x_inf);
    BoundaryTable t(x_inf, x0, std::move(nodes), std::move(f_values), std::move(slopes));
    t.check_invariants();
    return t;
}

BoundaryTable build_F(const ModelParams& p, const QuadratureSpec& q, const CriticalPrices& prices,
                      const Grading& grading) {
    if (prices.branch != Branch::OrnsteinUhlenbeck) throw DomainError("build_F: needs the OU branch");
    if (grading.nodes_per_octave < 1 || !(grading.min_offset > 0.0 && grading.min_offset < 1.0))
        throw DomainError("build_F: invalid grading");
    const double x_inf = prices.x_inf;
    const double x0 = prices.x0;
    const double width = x0 - x_inf;
    const int octaves = static_cast<int>(std::ceil(std::log2(1.0 / grading.min_offset)));
    const int cells = octaves * grading.nodes_per_octave;
    const double ds = std::numbers::ln2 / grading.nodes_per_octave;
    const double s_top = std::log(width);

    std::vector<double> nodes(static_cast<std::size_t>(cells) + 1);
    std::vector<double> s(nodes.size());
    for (int i = 0; i <= cells; ++i) {
        s[static_cast<std::size_t>(i)] = s_top - (cells - i) * ds;
        nodes[static_cast<std::size_t>(i)] = x_inf + std::exp(s[static_cast<std::size_t>(i)]);
    }
    nodes.back() = x0;
    s.back() = std::log(x0 - x_inf);

    auto integrand = [&](double sv) {
        const double off = std::exp(sv);
        return boundary_integrand(x_inf + off, p, q, x_inf) * off;
    };

    std::vector<double> f(nodes.size(), 0.0);
    std::vector<double> slopes(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        slopes[i] = -boundary_integrand(nodes[i], p, q, x_inf) * (nodes[i] - x_inf);

    // Near x_inf the factor (z-c)psi'' - psi' of Theta cancels; the per-cell
    // tolerance is floored at the resulting rounding level.
    auto cancellation = [&](double z) {
        const auto e = specfun::psi(z, p, q);
        const double terms = std::abs((z - p.c) * e.scaled[2]) + std::abs(e.scaled[1]);
        return terms / std::abs((z - p.c) * e.scaled[2] - e.scaled[1]);
    };
    for (std::size_t i = nodes.size() - 1; i-- > 0;) {
        const double tol = std::max(grading.rel_tol,
                                    64.0 * std::numeric_limits<double>::epsilon() * cancellation(nodes[i]));
        const auto r = quadrature::integrate(integrand, s[i], s[i + 1], tol, 1e-15, 200);
        if (!r.converged) {
            std::ostringstream os;
            os.precision(17);
            os << "build_F: quadrature failed on cell starting at node " << i << " (x = " << nodes[i] << ")";
            throw NumericError(os.str(), f[i + 1] + r.value[0]);
        }
        f[i] = f[i + 1] + r.value[0];
    }
    BoundaryTable t(x_inf, x0, std::move(nodes), std::move(f), std::move(slopes));
    t.check_invariants();
    return t;
}

double F_inverse(double y, const BoundaryTable& table) { return table.inverse(y); }

double solve_push(double x, double y, double alpha, const BoundaryTable& table, double shift,
                  std::optional<double> guess) {
    if (!(y > 0.0)) throw DomainError("solve_push: reserve must be positive");
    const double xs = x - shift;
    auto r = [&](double u) { return y - (xs - u) / alpha - table.F(u); };

    double hi = std::min(xs, table.x0());
    const double r_hi = r(hi);
    if (r_hi < 0.0) {
        std::ostringstream os;
        os.precision(17);
        os << "solve_push: (" << x << ", " << y << ") lies in the waiting region";
        throw DomainError(os.str());
    }
    if (r_hi == 0.0) return (xs - hi) / alpha;
    double lo = std::max(table.inverse(y + 1.0), xs - alpha * y);
    if (!(lo < hi)) return (xs - hi) / alpha;
    if (r(lo) >= 0.0) return (xs - lo) / alpha;

    double u = guess ? std::clamp(*guess, lo, hi) : hi;
    const double ftol = 1e-14 * (1.0 + y);
    for (int it = 0; it < 200; ++it) {
        const double ru = r(u);
        if (std::abs(ru) <= ftol) break;
        if (ru < 0.0) lo = u; else hi = u;
        const double d = 1.0 / alpha - table.derivative(u);
        double next = u - ru / d;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == u || !(hi - lo > 2.0 * std::numeric_limits<double>::epsilon() * std::abs(u))) {
            u = next;
            break;
        }
        u = next;
    }
    return (xs - u) / alpha;
}

const char* to_string(Region r) {
    switch (r) {
        case Region::Waiting: return "W";
        case Region::Sell1: return "S1";
        case Region::Sell2: return "S2";
        case Region::Boundary: return "B";
    }
    return "?";
}

double Solution::boundary_price(double y) const {
    if (brownian()) return prices.x_star;
    return table->inverse(y);
}

Solution solve(const ModelParams& p, const QuadratureSpec& q, const Grading& grading) {
    Solution sol;
    sol.params = p;
    sol.quad = q;
    sol.prices = critical_prices(p, q);
    if (!sol.brownian()) sol.table = build_F(p, q, sol.prices, grading);
    return sol;
}

Region classify(double x, double y, const Solution& sol) {
    if (!(y >= 0.0)) throw DomainError("classify: reserve must be >= 0");
    if (y == 0.0) return Region::Waiting;
    const double g = sol.boundary_price(y);
    if (std::abs(x - g) <= kTieTolerance * std::max(1.0, std::abs(g))) return Region::Boundary;
    if (x < g) return Region::Waiting;
    return y <= (x - sol.prices.depletion_price()) / sol.params.alpha ? Region::Sell1 : Region::Sell2;
}

double solve_z(double x, double y, const Solution& sol) {
    if (sol.brownian()) throw DomainError("solve_z: OU branch only");
    const double x0 = sol.prices.x0;
    const double alpha = sol.params.alpha;
    const Region r = classify(x, y, sol);
    if (r == Region::Boundary) return 0.0;
    const double depletion_gap = (x - x0) / alpha;
    if (r == Region::Sell1 && std::abs(y - depletion_gap) <= kTieTolerance * std::max(1.0, y))
        return depletion_gap;
    if (r != Region::Sell2) {
        std::ostringstream os;
        os.precision(17);
        os << "solve_z: (" << x << ", " << y << ") is not in S2 (region " << to_string(r) << ")";
        throw DomainError(os.str());
    }
    return solve_push(x, y, alpha, *sol.table);
}

}  // namespace extraction::boundary
