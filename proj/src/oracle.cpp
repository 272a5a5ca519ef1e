#include "extraction/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "extraction/errors.hpp"
#include "extraction/value.hpp"

namespace extraction::oracle {

namespace {

struct Stencil {
    std::vector<double> lower, diag, upper;
};

Stencil build_stencil(const std::vector<double>& x, const ModelParams& p, double dx) {
    const std::size_t n = x.size();
    Stencil s{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
    const double diff = 0.5 * p.sigma * p.sigma / (dx * dx);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double mu = p.a - p.b * x[i];
        s.lower[i] = -diff - std::max(-mu, 0.0) / dx;
        s.upper[i] = -diff - std::max(mu, 0.0) / dx;
        s.diag[i] = p.rho + 2.0 * diff + std::abs(mu) / dx;
    }
    return s;
}

bool stencil_is_monotone(const Stencil& s) {
    for (std::size_t i = 1; i + 1 < s.diag.size(); ++i) {
        if (s.lower[i] > 0.0 || s.upper[i] > 0.0) return false;
        if (!(s.diag[i] > -s.lower[i] - s.upper[i])) return false;
    }
    return true;
}

// (rho - L_h) w at interior node i.
double apply(const Stencil& s, const std::vector<double>& w, std::size_t i) {
    return s.lower[i] * w[i - 1] + s.diag[i] * w[i] + s.upper[i] * w[i + 1];
}

// Obstacle of row j from the finished row j - 1.
std::vector<double> obstacle(const QVIGrid& g, int j, const Solution& sol) {
    const auto& p = sol.params;
    const std::size_t nx = g.x.size();
    const double dy = g.spec.dy();
    const double dx = g.spec.dx();
    const double* prev = g.w.data() + static_cast<std::size_t>(j - 1) * nx;
    std::vector<double> e(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        const double xs = g.x[i] - p.alpha * dy;
        double wp;
        if (xs < g.spec.x_lo) {
            wp = value::evaluate(xs, g.y[j - 1], sol).w;
        } else {
            const double s = (xs - g.spec.x_lo) / dx;
            const std::size_t k = std::min(static_cast<std::size_t>(s), nx - 2);
            const double t = s - static_cast<double>(k);
            wp = (1.0 - t) * prev[k] + t * prev[k + 1];
        }
        e[i] = wp + (g.x[i] - p.c) * dy - 0.5 * p.alpha * dy * dy;
    }
    return e;
}

// Thomas algorithm; rows flagged `fixed` are identity rows.
void solve_tridiagonal(const Stencil& s, const std::vector<std::uint8_t>& fixed, const std::vector<double>& rhs,
                       std::vector<double>& out) {
    const std::size_t n = rhs.size();
    std::vector<double> c(n, 0.0), d(n, 0.0);
    auto row = [&](std::size_t i, double& a, double& b, double& cc) {
        if (fixed[i]) {
            a = 0.0;
            b = 1.0;
            cc = 0.0;
        } else {
            a = s.lower[i];
            b = s.diag[i];
            cc = s.upper[i];
        }
    };
    double a, b, cc;
    row(0, a, b, cc);
    c[0] = cc / b;
    d[0] = rhs[0] / b;
    for (std::size_t i = 1; i < n; ++i) {
        row(i, a, b, cc);
        const double m = b - a * c[i - 1];
        c[i] = cc / m;
        d[i] = (rhs[i] - a * d[i - 1]) / m;
    }
    out[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) out[i] = d[i] - c[i] * out[i + 1];
}

double rel(double a, double ref) { return std::abs(a - ref) / (1.0 + std::abs(ref)); }

// Lower edge of the active set in row j: zero of the switching margin,
// interpolated between the last waiting node and the first active node.
// NaN if the row has no active interior node.
double active_edge(const QVIGrid& g, int j) {
    const int nx = static_cast<int>(g.x.size());
    for (int i = 1; i < nx - 1; ++i) {
        if (!g.is_active(i, j)) continue;
        const double m_in = g.margin_at(i, j);
        const double m_out = g.margin_at(i - 1, j);
        if (i == 1 || g.is_active(i - 1, j) || !(m_out > 0.0) || !(m_in < 0.0)) return g.x[i];
        return g.x[i - 1] + (g.x[i] - g.x[i - 1]) * m_out / (m_out - m_in);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void GridSpec::validate(const Solution& sol) const {
    if (nx < 3 || ny < 2) throw ConfigError("grid: need nx >= 3 and ny >= 2");
    if (!(y_max > 0.0)) throw ConfigError("grid: y_max must be positive");
    if (!(tol > 0.0) || max_sweeps < 1) throw ConfigError("grid: tol > 0 and max_sweeps >= 1 required");
    const double g_lo = sol.brownian() ? sol.prices.x_star : sol.prices.x_inf;
    const double g_hi = sol.prices.depletion_price();
    if (!(x_lo < g_lo - 1.0 && g_hi + 1.0 < x_hi)) {
        std::ostringstream os;
        os << "grid: x-range [" << x_lo << ", " << x_hi << "] must contain [" << g_lo - 1.0 << ", " << g_hi + 1.0
           << "] strictly";
        throw ConfigError(os.str());
    }
    if (sol.params.alpha * dy() < dx())
        throw ConfigError("grid: alpha * dy must be at least one x-cell; raise nx or lower ny");
}

GridSpec default_grid(const Solution& sol, int nx, int ny) {
    GridSpec g;
    const double g_lo = sol.brownian() ? sol.prices.x_star : sol.prices.x_inf;
    g.x_lo = g_lo - (sol.brownian() ? 1.4 : 1.1);
    g.x_hi = sol.prices.depletion_price() + (sol.brownian() ? 1.4 : 1.1);
    g.nx = nx;
    g.ny = ny;
    g.y_max = 3.0;
    return g;
}

QVIGrid solve_qvi(const Solution& sol, const GridSpec& spec) {
    spec.validate(sol);
    const auto& p = sol.params;
    QVIGrid g;
    g.spec = spec;
    const std::size_t nx = static_cast<std::size_t>(spec.nx);
    g.x.resize(nx);
    g.y.resize(static_cast<std::size_t>(spec.ny));
    for (std::size_t i = 0; i < nx; ++i) g.x[i] = spec.x_lo + spec.dx() * static_cast<double>(i);
    g.x.back() = spec.x_hi;
    for (int j = 0; j < spec.ny; ++j) g.y[j] = spec.dy() * j;
    g.y.back() = spec.y_max;
    g.w.assign(nx * g.y.size(), 0.0);
    g.active.assign(nx * g.y.size(), 0);
    g.margin.assign(nx * g.y.size(), 0.0);

    const Stencil st = build_stencil(g.x, p, spec.dx());
    g.monotone_stencil = stencil_is_monotone(st);

    std::vector<double> w(nx), rhs(nx), next(nx);
    std::vector<std::uint8_t> act(nx), fixed(nx);
    for (int j = 1; j < spec.ny; ++j) {
        const auto e = obstacle(g, j, sol);
        const auto left = value::evaluate(g.x.front(), g.y[j], sol);
        const auto right = value::evaluate(g.x.back(), g.y[j], sol);
        // Warm start from the row below.
        if (j == 1) std::fill(act.begin(), act.end(), 0);
        int it = 0;
        double update = 0.0;
        for (;; ++it) {
            if (it >= spec.max_sweeps) {
                std::ostringstream os;
                os << "qvi: row " << j << " did not converge in " << spec.max_sweeps
                   << " policy iterations (last update " << update << ")";
                throw NumericError(os.str(), update);
            }
            for (std::size_t i = 0; i < nx; ++i) {
                fixed[i] = (i == 0 || i + 1 == nx || act[i]) ? 1 : 0;
                rhs[i] = act[i] ? e[i] : 0.0;
            }
            rhs.front() = left.w;
            rhs.back() = right.w;
            solve_tridiagonal(st, fixed, rhs, next);
            update = 0.0;
            for (std::size_t i = 0; i < nx; ++i) update = std::max(update, std::abs(next[i] - w[i]));
            w = next;
            bool changed = false;
            for (std::size_t i = 1; i + 1 < nx; ++i) {
                const std::uint8_t a = (w[i] - e[i]) < apply(st, w, i) ? 1 : 0;
                if (a != act[i]) changed = true;
                act[i] = a;
            }
            if (!changed || (it > 0 && update < spec.tol)) break;
        }
        g.max_iterations = std::max(g.max_iterations, it + 1);
        act.front() = left.region == boundary::Region::Waiting ? 0 : 1;
        act.back() = right.region == boundary::Region::Waiting ? 0 : 1;
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            const double gen = apply(st, w, i);
            g.max_residual = std::max(g.max_residual, std::abs(std::min(gen, w[i] - e[i])));
            g.margin[j * nx + i] = (w[i] - e[i]) - gen;
        }
        std::copy(w.begin(), w.end(), g.w.begin() + static_cast<std::ptrdiff_t>(j * nx));
        std::copy(act.begin(), act.end(), g.active.begin() + static_cast<std::ptrdiff_t>(j * nx));
    }
    return g;
}

Discrepancy compare(const QVIGrid& g, const Solution& sol) {
    Discrepancy d;
    const int nx = static_cast<int>(g.x.size());
    const int ny = static_cast<int>(g.y.size());
    double sum = 0.0;
    for (int j = 1; j < ny; ++j) {
        for (int i = 1; i < nx - 1; ++i) {
            const auto v = value::evaluate(g.x[i], g.y[j], sol);
            const double r = rel(g.at(i, j), v.w);
            d.sup_norm = std::max(d.sup_norm, r);
            switch (v.region) {
                case boundary::Region::Waiting:
                case boundary::Region::Boundary: d.sup_waiting = std::max(d.sup_waiting, r); break;
                case boundary::Region::Sell1: d.sup_sell1 = std::max(d.sup_sell1, r); break;
                case boundary::Region::Sell2: d.sup_sell2 = std::max(d.sup_sell2, r); break;
            }
            sum += r;
            ++d.interior_nodes;
        }
    }
    d.mean_abs = d.interior_nodes ? sum / static_cast<double>(d.interior_nodes) : 0.0;
    double cells_sum = 0.0;
    int rows = 0;
    for (int j = 1; j < ny; ++j) {
        const double edge = active_edge(g, j);
        const double cells = std::isnan(edge) ? static_cast<double>(nx)
                                              : std::abs(edge - sol.boundary_price(g.y[j])) / g.spec.dx();
        d.max_boundary_cells = std::max(d.max_boundary_cells, cells);
        cells_sum += cells;
        ++rows;
    }
    d.mean_boundary_cells = rows ? cells_sum / rows : 0.0;
    return d;
}

Discrepancy compare(const QVIGrid& a, const QVIGrid& b) {
    if (a.x.size() != b.x.size() || a.y.size() != b.y.size())
        throw DomainError("compare: grids of different shape");
    Discrepancy d;
    const int nx = static_cast<int>(a.x.size());
    const int ny = static_cast<int>(a.y.size());
    double sum = 0.0;
    for (int j = 1; j < ny; ++j) {
        for (int i = 1; i < nx - 1; ++i) {
            const double r = rel(a.at(i, j), b.at(i, j));
            d.sup_norm = std::max(d.sup_norm, r);
            sum += r;
            ++d.interior_nodes;
        }
        const double ea = active_edge(a, j), eb = active_edge(b, j);
        double cells = 0.0;
        if (std::isnan(ea) != std::isnan(eb)) cells = static_cast<double>(nx);
        else if (!std::isnan(ea)) cells = std::abs(ea - eb) / a.spec.dx();
        d.max_boundary_cells = std::max(d.max_boundary_cells, cells);
        d.mean_boundary_cells += cells / (ny - 1);
    }
    d.mean_abs = d.interior_nodes ? sum / static_cast<double>(d.interior_nodes) : 0.0;
    return d;
}

GridInvariants check_invariants(const QVIGrid& g, const Solution& sol, double tol) {
    GridInvariants inv;
    const std::size_t nx = g.x.size();
    const Stencil st = build_stencil(g.x, sol.params, g.spec.dx());
    inv.monotone_stencil = stencil_is_monotone(st);
    for (double v : g.w)
        if (v < -tol) inv.nonnegative = false;
    for (int j = 1; j < static_cast<int>(g.y.size()); ++j) {
        std::vector<double> row(g.w.begin() + static_cast<std::ptrdiff_t>(j * nx),
                                g.w.begin() + static_cast<std::ptrdiff_t>((j + 1) * nx));
        const auto e = obstacle(g, j, sol);
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            const double scale = tol * (1.0 + std::abs(row[i]));
            if (row[i] < g.at(static_cast<int>(i), j - 1) - scale) inv.monotone_in_y = false;
            const double gen = apply(st, row, i);
            const double obs = row[i] - e[i];
            if (gen < -scale || obs < -scale || std::abs(std::min(gen, obs)) > scale) inv.hjb_signs = false;
        }
    }
    return inv;
}

void write_grid_csv(std::ostream& out, const QVIGrid& g) {
    out << "# qvi-grid v1 nx=" << g.spec.nx << " ny=" << g.spec.ny << " x_lo=" << g.spec.x_lo
        << " x_hi=" << g.spec.x_hi << " y_max=" << g.spec.y_max << '\n';
    out << "x,y,value,active\n";
    out.precision(17);
    for (std::size_t j = 0; j < g.y.size(); ++j)
        for (std::size_t i = 0; i < g.x.size(); ++i)
            out << g.x[i] << ',' << g.y[j] << ',' << g.w[j * g.x.size() + i] << ','
                << static_cast<int>(g.active[j * g.x.size() + i]) << '\n';
}

}  // namespace extraction::oracle
