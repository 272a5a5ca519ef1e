#include "extraction/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "extraction/errors.hpp"

namespace extraction::io {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// NaN fields (other branch) serialize as null.
ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

}  // namespace

void write_boundary_csv(std::ostream& out, const boundary::Solution& sol) {
    if (!sol.table) throw DomainError("write_boundary_csv: no boundary table on the Brownian branch");
    const auto& t = *sol.table;
    const auto& p = sol.params;
    out << "# boundary-table v1\n";
    out << "# interpolation=" << boundary::BoundaryTable::interpolation()
        << " tail=" << boundary::BoundaryTable::tail_model() << '\n';
    out << "# x_inf=" << fmt17(t.x_inf()) << " x0=" << fmt17(t.x0()) << '\n';
    out << "# a=" << fmt17(p.a) << " b=" << fmt17(p.b) << " sigma=" << fmt17(p.sigma) << " rho=" << fmt17(p.rho)
        << " c=" << fmt17(p.c) << " alpha=" << fmt17(p.alpha) << '\n';
    out << "x,F\n";
    const auto nodes = t.nodes();
    const auto f = t.f_values();
    for (std::size_t i = 0; i < nodes.size(); ++i) out << fmt17(nodes[i]) << ',' << fmt17(f[i]) << '\n';
}

boundary::BoundaryTable read_boundary_csv(std::istream& in, const ModelParams& p, const QuadratureSpec& q) {
    std::string line;
    if (!std::getline(in, line) || line != "# boundary-table v1")
        throw ConfigError("boundary csv: missing '# boundary-table v1' header");
    double x_inf = NAN, x0 = NAN;
    bool header_seen = false;
    std::vector<double> xs, fs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# x_inf=", 0) == 0 &&
                std::sscanf(line.c_str(), "# x_inf=%lf x0=%lf", &x_inf, &x0) != 2)
                throw ConfigError("boundary csv: malformed x_inf/x0 line");
            continue;
        }
        if (!header_seen) {
            if (line != "x,F") throw ConfigError("boundary csv: expected column header 'x,F'");
            header_seen = true;
            continue;
        }
        double x = 0.0, f = 0.0;
        char tail = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf%c", &x, &f, &tail) != 2)
            throw ConfigError("boundary csv: malformed row '" + line + "'");
        xs.push_back(x);
        fs.push_back(f);
    }
    if (!std::isfinite(x_inf) || !std::isfinite(x0)) throw ConfigError("boundary csv: missing x_inf/x0");
    if (xs.size() < 2) throw ConfigError("boundary csv: fewer than two rows");
    try {
        return boundary::rebuild_from_nodes(p, q, x_inf, x0, std::move(xs), std::move(fs));
    } catch (const NumericError& e) {
        throw ConfigError(std::string("boundary csv: ") + e.what());
    }
}

void write_value_surface(std::ostream& out, const boundary::Solution& sol, double x_lo, double x_hi, int nx,
                         double y_max, int ny) {
    if (nx < 2 || ny < 2 || !(x_hi > x_lo) || !(y_max > 0.0)) throw DomainError("write_value_surface: bad grid");
    out << "# value-surface v1\n";
    out << "x,y,w,w_x,w_xx,w_y,region\n";
    for (int j = 0; j < ny; ++j) {
        const double y = y_max * j / (ny - 1);
        for (int i = 0; i < nx; ++i) {
            const double x = x_lo + (x_hi - x_lo) * i / (nx - 1);
            const auto v = value::evaluate(x, y, sol);
            out << fmt17(x) << ',' << fmt17(y) << ',' << fmt17(v.w) << ',' << fmt17(v.w_x) << ','
                << fmt17(v.w_xx) << ',' << fmt17(v.w_y) << ',' << boundary::to_string(v.region) << '\n';
        }
    }
}

ordered_json to_json(const ModelParams& p) {
    return {{"a", p.a}, {"b", p.b}, {"sigma", p.sigma}, {"rho", p.rho}, {"c", p.c}, {"alpha", p.alpha}};
}

ordered_json to_json(const QuadratureSpec& q) {
    return {{"rel_tol", q.rel_tol},
            {"abs_tol", q.abs_tol},
            {"max_subdivisions", q.max_subdivisions},
            {"split_point", q.split_point}};
}

ordered_json to_json(const boundary::CriticalPrices& c) {
    if (c.branch == boundary::Branch::Brownian)
        return {{"branch", "brownian"}, {"n", num(c.n)}, {"x_star", num(c.x_star)}};
    return {{"branch", "ornstein-uhlenbeck"}, {"x0", num(c.x0)}, {"x_inf", num(c.x_inf)}, {"x_bar", num(c.x_bar)}};
}

ordered_json to_json(const sim::SimResult& r) {
    return {{"policy", r.policy},
            {"mean", num(r.mean)},
            {"std_error", num(r.std_error)},
            {"n_paths", r.n_paths},
            {"initial_jump", num(r.initial_jump)},
            {"depleted_fraction", num(r.depleted_fraction)},
            {"tail_bound", num(r.tail_bound)},
            {"horizon", num(r.horizon)},
            {"h", num(r.h)},
            {"base_seed", r.base_seed}};
}

ordered_json to_json(const sim::DominanceReport& r) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"policy", row.policy},
                        {"shift", num(row.shift)},
                        {"mean", num(row.mean)},
                        {"paired_diff", num(row.paired_diff)},
                        {"paired_se", num(row.paired_se)},
                        {"pass", row.pass}});
    return {{"x", r.x}, {"y", r.y}, {"optimal", to_json(r.optimal)}, {"rows", rows}, {"passed", r.passed()}};
}

ordered_json to_json(const oracle::Discrepancy& d) {
    return {{"interior_nodes", d.interior_nodes},
            {"sup_norm", num(d.sup_norm)},
            {"sup_waiting", num(d.sup_waiting)},
            {"sup_sell1", num(d.sup_sell1)},
            {"sup_sell2", num(d.sup_sell2)},
            {"mean_abs", num(d.mean_abs)},
            {"max_boundary_cells", num(d.max_boundary_cells)},
            {"mean_boundary_cells", num(d.mean_boundary_cells)}};
}

ordered_json to_json(const value::HJBReport& r) {
    return {{"samples", r.samples.size()},
            {"waiting", r.n_waiting},
            {"selling", r.n_selling},
            {"failures", r.failures},
            {"max_waiting_residual", num(r.max_waiting_residual)},
            {"max_waiting_slack", num(r.max_waiting_slack)},
            {"max_selling_constraint", num(r.max_selling_constraint)},
            {"max_selling_generator", num(r.max_selling_generator)},
            {"passed", r.passed()}};
}

ordered_json to_json(const value::SmoothFitReport& r) {
    return {{"points", r.samples.size()}, {"worst_gap", num(r.worst_gap)}, {"passed", r.passed()}};
}

void write_json(std::ostream& out, const ordered_json& doc) { out << doc.dump(2) << '\n'; }

std::ofstream open_output(const std::string& dir, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("output: cannot create directory '" + dir + "': " + ec.message());
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path);
    if (!out) throw ConfigError("output: cannot open '" + path.string() + "'");
    return out;
}

}  // namespace extraction::io
