// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "extraction/boundary.hpp"
#include "extraction/oracle.hpp"
#include "extraction/sim.hpp"
#include "extraction/specfun.hpp"
#include "extraction/value.hpp"

using namespace extraction;
using boundary::Region;

namespace {

const ModelParams kOU{0.4, 1.0, 0.8, 0.375, 0.3, 0.25};
const ModelParams kBM{0.4, 0.0, 0.8, 0.375, 0.3, 0.25};

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += "FAILED " + what;
        }
    }
    void note(const std::string& s) {
        if (!detail.empty()) detail += "; ";
        detail += s;
    }
};

std::string f(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Outcome&)>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", id, title, secs, o.detail.c_str());
    std::fflush(stdout);
}

struct MCState {
    double x, y;
};
const std::vector<MCState> kOUStates{{0.5, 1.0}, {0.3, 3.0}, {1.8, 0.5}, {1.2, 2.0}, {1.0, 4.0}};
const std::vector<MCState> kBMStates{{1.0, 5.0}, {1.5, 1.0}, {2.5, 1.0}, {2.2, 3.0}, {2.0, 5.0}};
const std::vector<MCState> kStoppingStates{{0.5, 1.0}, {0.3, 3.0}, {0.8, 0.5}, {-0.5, 2.0}, {1.2, 2.0}};

sim::SimConfig mc_config(const boundary::Solution& sol) {
    sim::SimConfig c;
    c.h = 1e-3;
    c.horizon = 10.0 / sol.params.rho;
    c.n_paths = 100000;
    c.policy = sim::Policy::optimal(sol);
    c.threads = std::max(1u, std::thread::hardware_concurrency());
    return c;
}

}  // namespace

int main() {
    const auto ou = boundary::solve(kOU);
    const auto bm = boundary::solve(kBM);
    const auto& t = *ou.table;
    const double x0 = ou.prices.x0;
    const double x_inf = ou.prices.x_inf;

    criterion(1, "Brownian closed forms", [&](Outcome& o) {
        const double n = specfun::exponent_n(kBM);
        o.require(std::abs(n - 0.625) <= 1e-12, "n = 0.625");
        o.require(std::abs(bm.prices.x_star - 1.9) <= 1e-12, "x_star = 1.9");
        o.note("n = " + f("%.17g", n) + ", x_star = " + f("%.17g", bm.prices.x_star));
    });

    criterion(2, "psi ODE residuals", [&](Outcome& o) {
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double x = -2.0 + (x0 + 3.0) * i / 199.0;
            const auto e = specfun::psi(x, kOU);
            const auto& s = e.scaled;
            for (int k = 0; k < 2; ++k) {
                const double r = 0.5 * kOU.sigma * kOU.sigma * s[k + 2] + (kOU.a - kOU.b * x) * s[k + 1] -
                                 (kOU.rho + k * kOU.b) * s[k];
                worst = std::max(worst, std::abs(r) / s[k]);
            }
        }
        o.require(worst <= 1e-8, "relative residual <= 1e-8");
        o.note("worst relative residual " + f("%.2e", worst) + " on 200 points, k = 0, 1");
    });

    criterion(3, "log-convexity and price ordering", [&](Outcome& o) {
        double worst = 1e300;
        for (int i = 0; i < 200; ++i) {
            const double x = -2.0 + (x0 + 3.0) * i / 199.0;
            const auto& s = specfun::psi(x, kOU).scaled;
            for (int k = 0; k < 2; ++k) worst = std::min(worst, (s[k + 2] * s[k] - s[k + 1] * s[k + 1]) / (s[k] * s[k]));
        }
        o.require(worst > 0.0, "psi^(k+2) psi^(k) - psi^(k+1)^2 > 0");
        o.require(kOU.c < x_inf && x_inf < x0, "c < x_inf < x0");
        o.require(std::abs(ou.prices.x_bar - 0.41 / 1.1) <= 1e-15 && ou.prices.x_bar < x0, "x_bar < x0");
        o.note("min normalized determinant " + f("%.3e", worst) + ", x_inf = " + f("%.12f", x_inf) +
               ", x0 = " + f("%.12f", x0) + ", x_bar = " + f("%.12f", ou.prices.x_bar));
    });

    criterion(4, "free-boundary properties", [&](Outcome& o) {
        o.require(t.F(x0) == 0.0, "F(x0) = 0");
        const auto f_vals = t.f_values();
        bool decreasing = true;
        for (std::size_t i = 1; i < f_vals.size(); ++i) decreasing = decreasing && f_vals[i] < f_vals[i - 1];
        o.require(decreasing, "strict decrease over nodes");
        const double width = x0 - x_inf;
        const double near = t.F(x_inf + 1e-3 * width), mid = t.F(x_inf + 0.5 * width);
        o.require(near > 10.0 * mid, "F(x_inf + 1e-3 delta) > 10 F(mid)");
        double rt = 0.0;
        for (int i = 0; i <= 60; ++i) {
            const double y = 1e-4 * std::pow(5e5, i / 60.0);
            rt = std::max(rt, std::abs(t.F(t.inverse(y)) - y));
        }
        o.require(rt <= 1e-8, "round trip <= 1e-8");
        o.note(std::to_string(f_vals.size()) + " nodes, divergence ratio " + f("%.2f", near / mid) +
               ", round trip " + f("%.2e", rt) + " on y in [1e-4, 50]");
    });

    criterion(5, "push equation", [&](Outcome& o) {
        const auto states = value::sample_states(Region::Sell2, 1000, ou, 5);
        double worst = 0.0;
        for (const auto& [x, y] : states) {
            const double z = boundary::solve_z(x, y, ou);
            worst = std::max(worst, std::abs((y - z) - t.F(x - kOU.alpha * z)));
        }
        o.require(worst <= 1e-9, "residual <= 1e-9");
        double edge = 0.0;
        std::mt19937_64 rng(55);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < 200; ++i) {
            const double xb = x_inf + (0.001 + 0.999 * u(rng)) * (x0 - x_inf);
            edge = std::max(edge, std::abs(boundary::solve_z(xb, t.F(xb), ou)));
            const double xs = x0 + 3.0 * u(rng) + 1e-3;
            const double ys = (xs - x0) / kOU.alpha;
            edge = std::max(edge, std::abs(boundary::solve_z(xs, ys, ou) - ys));
        }
        o.require(edge <= 1e-8, "edge cases within 1e-8");
        o.note("worst residual " + f("%.2e", worst) + " on 1000 states, edge error " + f("%.2e", edge));
    });

    criterion(6, "smooth fit", [&](Outcome& o) {
        std::vector<double> ys;
        for (int i = 0; i < 50; ++i) ys.push_back(0.01 * std::pow(1000.0, i / 49.0));
        const auto a = value::smooth_fit(ys, ou);
        const auto b = value::smooth_fit(ys, bm);
        o.require(a.samples.size() == 50 && a.passed(1e-4), "OU gap <= 1e-4");
        o.require(b.samples.size() == 50 && b.passed(1e-4), "Brownian gap <= 1e-4");
        o.note("worst relative gap OU " + f("%.2e", a.worst_gap) + ", Brownian " + f("%.2e", b.worst_gap));
    });

    criterion(7, "HJB suite", [&](Outcome& o) {
        for (const auto* sol : {&ou, &bm}) {
            std::vector<value::State> states;
            for (auto r : {Region::Waiting, Region::Sell1, Region::Sell2}) {
                const auto s = value::sample_states(r, 2000, *sol, 100 + static_cast<int>(r));
                states.insert(states.end(), s.begin(), s.end());
            }
            const auto rep = value::hjb_residuals(states, *sol);
            const char* name = sol == &ou ? "OU" : "Brownian";
            o.require(rep.passed(), std::string(name) + " HJB");
            o.note(std::string(name) + ": " + std::to_string(rep.failures) + " failures, W residual " +
                   f("%.1e", rep.max_waiting_residual) + ", W slack " + f("%.1e", rep.max_waiting_slack) +
                   ", S constraint " + f("%.1e", rep.max_selling_constraint) + ", S generator " +
                   f("%.1e", rep.max_selling_generator));
        }
    });

    // Optimal per-path payoffs, reused by the dominance criterion.
    std::vector<std::vector<double>> ou_paths(kOUStates.size()), bm_paths(kBMStates.size());

    criterion(8, "Monte Carlo vs analytic", [&](Outcome& o) {
        auto run = [&](const boundary::Solution& sol, const std::vector<MCState>& states,
                       std::vector<std::vector<double>>& keep, const char* name) {
            const auto cfg = mc_config(sol);
            for (std::size_t i = 0; i < states.size(); ++i) {
                const auto [x, y] = states[i];
                const auto r = sim::simulate_payoff(x, y, sol, cfg, &keep[i]);
                const auto v = value::evaluate(x, y, sol);
                const double band = std::max(2.0 * r.std_error, 0.02 * v.w);
                const bool ok = std::abs(r.mean - v.w) <= band;
                o.require(ok, std::string(name) + " (" + f("%g", x) + ", " + f("%g", y) + ")");
                std::printf("    %s (%g, %g) %s: mean %.6f se %.6f w %.6f diff %+.6f band %.6f\n", name, x, y,
                            boundary::to_string(v.region), r.mean, r.std_error, v.w, r.mean - v.w, band);
                std::fflush(stdout);
            }
        };
        run(ou, kOUStates, ou_paths, "OU");
        run(bm, kBMStates, bm_paths, "BM");
        o.note("10 states, n = 1e5, h = 1e-3, T = 10/rho");
    });

    criterion(9, "policy dominance", [&](Outcome& o) {
        auto run = [&](const boundary::Solution& sol, const std::vector<MCState>& states,
                       const std::vector<std::vector<double>>& keep, double range, const char* name) {
            const auto cfg = mc_config(sol);
            const std::vector<double> shifts{0.05 * range, -0.05 * range};
            for (std::size_t i = 0; i < states.size(); ++i) {
                const auto [x, y] = states[i];
                const auto rep = sim::dominance_test(x, y, sol, cfg, shifts, &keep[i]);
                for (const auto& row : rep.rows) {
                    o.require(row.pass, std::string(name) + " (" + f("%g", x) + ", " + f("%g", y) + ") " + row.policy);
                    std::printf("    %s (%g, %g) %-28s diff %+.6f paired se %.6f\n", name, x, y, row.policy.c_str(),
                                row.paired_diff, row.paired_se);
                }
                std::fflush(stdout);
            }
        };
        run(ou, kOUStates, ou_paths, x0 - x_inf, "OU");
        run(bm, kBMStates, bm_paths, bm.prices.x_star - kBM.c, "BM");
        o.note("+-5% shifts and immediate depletion at 10 states");
    });

    criterion(10, "QVI oracle", [&](Outcome& o) {
        for (const auto* sol : {&ou, &bm}) {
            const char* name = sol == &ou ? "OU" : "Brownian";
            const double tol = sol == &ou ? 0.03 : 0.02;
            std::vector<double> sups;
            oracle::Discrepancy last;
            bool invariants = true;
            for (auto [nx, ny] : {std::pair{100, 15}, std::pair{200, 30}, std::pair{400, 60}}) {
                const auto g = oracle::solve_qvi(*sol, oracle::default_grid(*sol, nx, ny));
                last = oracle::compare(g, *sol);
                sups.push_back(last.sup_norm);
                invariants = invariants && oracle::check_invariants(g, *sol).ok();
            }
            o.require(last.sup_norm <= tol, std::string(name) + " sup discrepancy");
            o.require(last.max_boundary_cells <= 2.0, std::string(name) + " exercise envelope");
            o.require(sups[1] < sups[0] && sups[2] < sups[1], std::string(name) + " refinement trend");
            o.require(invariants, std::string(name) + " discrete invariants");
            o.note(std::string(name) + ": sup " + f("%.2e", sups[0]) + " > " + f("%.2e", sups[1]) + " > " +
                   f("%.2e", sups[2]) + ", envelope " + f("%.2f", last.max_boundary_cells) + " cells");
        }
    });

    criterion(11, "comparative statics", [&](Outcome& o) {
        auto check_sweep = [&](const char* name, std::vector<ModelParams> ps) {
            std::vector<boundary::Solution> sols;
            for (const auto& p : ps) sols.push_back(boundary::solve(p));
            for (std::size_t i = 1; i < sols.size(); ++i) {
                const auto& a = sols[i - 1];
                const auto& b = sols[i];
                o.require(b.prices.x0 > a.prices.x0 && b.prices.x_inf > a.prices.x_inf,
                          std::string(name) + " x0/x_inf increasing");
                const double lo = std::max(a.prices.x_inf, b.prices.x_inf);
                const double hi = std::min(a.prices.x0, b.prices.x0);
                double gap = 1e300;
                for (int k = 0; hi > lo && k < 200; ++k) {
                    const double x = lo + (hi - lo) * (k + 0.5) / 200.0;
                    gap = std::min(gap, b.table->F(x) - a.table->F(x));
                }
                o.require(gap > 0.0, std::string(name) + " pointwise F ordering");
            }
            return sols;
        };
        std::vector<ModelParams> a_sweep, s_sweep, b_sweep;
        for (double a : {0.4, 0.5, 0.6, 0.7}) a_sweep.push_back({a, 1.0, 0.8, 0.375, 0.3, 0.25});
        for (double s : {0.8, 0.9, 1.0, 1.1}) s_sweep.push_back({0.4, 1.0, s, 0.375, 0.3, 0.25});
        for (double b : {1.0, 0.25, 0.125, 0.05}) b_sweep.push_back({0.4, b, 0.8, 0.375, 0.3, 0.25});
        check_sweep("a", a_sweep);
        check_sweep("sigma", s_sweep);
        double prev_star = 0.0;
        for (const auto& ps : {a_sweep, s_sweep}) {
            prev_star = 0.0;
            for (auto p : ps) {
                p.b = 0.0;
                const double xs = boundary::x_star_bm(p);
                o.require(xs > prev_star, "x_star increasing");
                prev_star = xs;
            }
        }
        const auto bs = check_sweep("b", b_sweep);
        double prev = 1e300;
        std::string dist;
        for (const auto& sol : bs) {
            double sup = 0.0;
            for (int k = 0; k <= 200; ++k) sup = std::max(sup, std::abs(sol.boundary_price(10.0 * k / 200.0) - 1.9));
            o.require(sup < prev, "sup distance to x_star decreasing");
            dist += (dist.empty() ? "" : " > ") + f("%.4f", sup);
            prev = sup;
        }
        o.note("b-sweep sup |G - x_star| on y in [0, 10]: " + dist);
    });

    criterion(12, "stopping representation", [&](Outcome& o) {
        double spread = 0.0;
        for (int i = 0; i < 80; ++i) {
            const double x = -1.0 + 4.0 * i / 79.0;
            const double ref = value::stopping_value(x, 1.0, bm);
            for (double y : {0.01, 0.3, 2.0, 7.0, 20.0})
                spread = std::max(spread, std::abs(value::stopping_value(x, y, bm) - ref));
        }
        o.require(spread <= 1e-10, "Brownian u independent of y");
        o.note("Brownian spread " + f("%.1e", spread));
        const auto cfg = mc_config(ou);
        for (const auto& [x, y] : kStoppingStates) {
            const auto r = sim::simulate_stopping(x, y, ou, cfg);
            const double u = value::stopping_value(x, y, ou);
            const double diff = r.mean - u;
            o.require(std::abs(diff) <= 2.0 * r.std_error + 1e-12 * std::max(1.0, std::abs(u)),
                      "(" + f("%g", x) + ", " + f("%g", y) + ") within 2 SE");
            std::printf("    stopping (%g, %g): mean %.6f se %.6f u %.6f diff %+.2e\n", x, y, r.mean, r.std_error, u,
                        diff);
            std::fflush(stdout);
        }
    });

    std::printf("%s: %d of 12 criteria failed\n", failures ? "FAILED" : "PASSED", failures);
    return failures ? 1 : 0;
}
