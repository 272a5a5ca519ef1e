#include "extraction/value.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "extraction/errors.hpp"

namespace extraction::value {

namespace {

// psi^(k) at x for either branch, in the scaled form of PsiEval.
specfun::PsiEval psi_eval(double x, const Solution& sol) {
    if (!sol.brownian()) return specfun::psi(x, sol.params, sol.quad);
    const double n = sol.prices.n;
    specfun::PsiEval e;
    e.x = x;
    e.log_scale = n * x;
    e.scaled = {1.0, n, n * n, n * n * n};
    return e;
}

// A(y) = a * exp(log_scale), A'(y) = ap * exp(log_scale).
struct Coefficients {
    double a = 0.0;
    double ap = 0.0;
    double log_scale = 0.0;
};

Coefficients coefficients(double y, const Solution& sol) {
    if (!(y >= 0.0)) throw DomainError("value: reserve must be >= 0");
    const auto& p = sol.params;
    Coefficients out;
    if (sol.brownian()) {
        const double n = sol.prices.n;
        out.a = -std::expm1(-p.alpha * n * y) / (p.alpha * n * n);
        out.ap = std::exp(-p.alpha * n * y) / n;
        out.log_scale = -p.c * n - 1.0;
        return out;
    }
    const auto e = specfun::psi(sol.boundary_price(y), p, sol.quad);
    const auto& v = e.scaled;
    const double m_num = (e.x - p.c) * v[1] - v[0];
    const double m_den = p.alpha * (v[1] * v[1] - v[2] * v[0]);
    const double n_num = (e.x - p.c) * v[2] - v[1];
    const double n_den = v[2] * v[0] - v[1] * v[1];
    if (m_den == 0.0 || n_den == 0.0) throw NumericError("coefficient A: psi'' psi - psi'^2 vanished");
    out.a = y == 0.0 ? 0.0 : m_num / m_den;
    out.ap = n_num / n_den;
    out.log_scale = -e.log_scale;
    return out;
}

ValuePoint waiting_point(double x, double y, Region region, const Solution& sol) {
    const auto k = coefficients(y, sol);
    const auto e = psi_eval(x, sol);
    const double f = std::exp(k.log_scale + e.log_scale);
    ValuePoint v;
    v.x = x;
    v.y = y;
    v.region = region;
    v.w = k.a * e.scaled[0] * f;
    v.w_x = k.a * e.scaled[1] * f;
    v.w_xx = k.a * e.scaled[2] * f;
    v.w_y = k.ap * e.scaled[0] * f;
    if (y == 0.0 && x >= sol.prices.depletion_price()) v.w_y = x - sol.params.c;
    return v;
}

ValuePoint sell1_point(double x, double y, const ModelParams& p) {
    ValuePoint v;
    v.x = x;
    v.y = y;
    v.region = Region::Sell1;
    v.w = (x - p.c) * y - 0.5 * p.alpha * y * y;
    v.w_x = y;
    v.w_xx = 0.0;
    v.w_y = x - p.c - p.alpha * y;
    return v;
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
    return std::exp(d(rng));
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

double relative_gap(double l, double r) {
    const double scale = std::max({std::abs(l), std::abs(r), 1e-8});
    return std::abs(l - r) / scale;
}

}  // namespace

double coeff_A(double y, const Solution& sol) {
    const auto k = coefficients(y, sol);
    return k.a * std::exp(k.log_scale);
}

double coeff_A_prime(double y, const Solution& sol) {
    const auto k = coefficients(y, sol);
    return k.ap * std::exp(k.log_scale);
}

double coeff_A_bound(const Solution& sol) {
    if (sol.brownian()) return std::exp(-sol.params.c * sol.prices.n - 1.0) /
                               (sol.params.alpha * sol.prices.n * sol.prices.n);
    return boundary::coefficient_at_price(specfun::psi(sol.prices.x_inf, sol.params, sol.quad), sol.params);
}

ValuePoint value_ou(double x, double y, const Solution& sol) {
    if (sol.brownian()) throw DomainError("value_ou: needs b > 0");
    const auto& p = sol.params;
    const Region region = boundary::classify(x, y, sol);
    if (region == Region::Waiting || region == Region::Boundary) return waiting_point(x, y, region, sol);
    if (region == Region::Sell1) return sell1_point(x, y, p);

    const double z = boundary::solve_push(x, y, p.alpha, *sol.table);
    const double u = x - p.alpha * z;
    const auto e = specfun::psi(u, p, sol.quad);
    const double m = boundary::coefficient_at_price(e, p) * std::exp(e.log_scale);
    const double n = boundary::coefficient_slope_at_price(e, p) * std::exp(e.log_scale);
    ValuePoint v;
    v.x = x;
    v.y = y;
    v.region = region;
    v.w = m * e.scaled[0] + (x - p.c) * z - 0.5 * p.alpha * z * z;
    v.w_x = m * e.scaled[1] + z;
    v.w_xx = m * e.scaled[2];
    v.w_y = n * e.scaled[0];
    return v;
}

ValuePoint value_bm(double x, double y, const ModelParams& p) {
    if (!p.brownian()) throw DomainError("value_bm: needs b == 0");
    if (!(y >= 0.0)) throw DomainError("value_bm: reserve must be >= 0");
    const double n = specfun::exponent_n(p);
    const double xs = p.c + 1.0 / n;
    const double alpha = p.alpha;
    ValuePoint v;
    v.x = x;
    v.y = y;
    if (y == 0.0) {
        v.region = Region::Waiting;
        v.w_y = x < xs ? std::exp((x - p.c) * n - 1.0) / n : x - p.c;
        return v;
    }
    const bool tie = std::abs(x - xs) <= 1e-12 * std::max(1.0, std::abs(xs));
    if (tie || x < xs) {
        const double g = std::exp((x - p.c) * n - 1.0);
        const double h = -std::expm1(-alpha * n * y);
        v.region = tie ? Region::Boundary : Region::Waiting;
        v.w = g * h / (alpha * n * n);
        v.w_x = g * h / (alpha * n);
        v.w_xx = g * h / alpha;
        v.w_y = g * std::exp(-alpha * n * y) / n;
        return v;
    }
    const double gap = (x - xs) / alpha;
    if (y <= gap) return sell1_point(x, y, p);
    const double e = std::exp(-alpha * n * (y - gap));
    v.region = Region::Sell2;
    v.w = -std::expm1(-alpha * n * (y - gap)) / (alpha * n * n) + (x - p.c) * gap - 0.5 * alpha * gap * gap;
    v.w_x = -e / (alpha * n) + (x - p.c) / alpha;
    v.w_xx = (1.0 - e) / alpha;
    v.w_y = e / n;
    return v;
}

ValuePoint evaluate(double x, double y, const Solution& sol) {
    return sol.brownian() ? value_bm(x, y, sol.params) : value_ou(x, y, sol);
}

double generator(const ValuePoint& v, const ModelParams& p) {
    return 0.5 * p.sigma * p.sigma * v.w_xx + (p.a - p.b * v.x) * v.w_x - p.rho * v.w;
}

double constraint(const ValuePoint& v, const ModelParams& p) {
    return -p.alpha * v.w_x - v.w_y + v.x - p.c;
}

HJBReport hjb_residuals(std::span<const State> states, const Solution& sol, const HJBTolerances& tol) {
    HJBReport rep;
    rep.samples.reserve(states.size());
    for (const auto& [x, y] : states) {
        const auto v = evaluate(x, y, sol);
        HJBSample s;
        s.x = x;
        s.y = y;
        s.region = v.region;
        s.w = v.w;
        s.generator = generator(v, sol.params);
        s.constraint = constraint(v, sol.params);
        if (v.region == Region::Waiting || v.region == Region::Boundary) {
            ++rep.n_waiting;
            const double r = std::abs(s.generator) / (1.0 + std::abs(v.w));
            rep.max_waiting_residual = std::max(rep.max_waiting_residual, r);
            if (v.region == Region::Waiting) {
                rep.max_waiting_slack = std::max(rep.max_waiting_slack, s.constraint);
                s.pass = r <= tol.waiting && s.constraint < 0.0;
            } else {
                s.pass = r <= tol.waiting && std::abs(s.constraint) <= tol.selling_constraint;
            }
        } else {
            ++rep.n_selling;
            rep.max_selling_constraint = std::max(rep.max_selling_constraint, std::abs(s.constraint));
            rep.max_selling_generator = std::max(rep.max_selling_generator, s.generator);
            s.pass = std::abs(s.constraint) <= tol.selling_constraint && s.generator <= tol.selling_generator;
        }
        if (!s.pass) ++rep.failures;
        rep.samples.push_back(s);
    }
    return rep;
}

std::vector<State> sample_states(Region region, std::size_t count, const Solution& sol, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double alpha = sol.params.alpha;
    const double xd = sol.prices.depletion_price();
    std::vector<State> out;
    out.reserve(count);
    while (out.size() < count) {
        switch (region) {
            case Region::Waiting:
            case Region::Boundary: {
                const double y = log_uniform(rng, 1e-2, 10.0);
                const double g = sol.boundary_price(y);
                out.emplace_back(region == Region::Boundary ? g : g - uniform(rng, 0.01, 3.0), y);
                break;
            }
            case Region::Sell1: {
                const double x = xd + uniform(rng, 0.01, 3.0);
                out.emplace_back(x, uniform(rng, 0.01, 1.0) * (x - xd) / alpha);
                break;
            }
            case Region::Sell2: {
                const double y = log_uniform(rng, 1e-2, 10.0);
                const double g = sol.boundary_price(y);
                const double x_max = std::min(g + 3.0, xd + alpha * y);
                out.emplace_back(g + uniform(rng, 0.005, 0.995) * (x_max - g), y);
                break;
            }
        }
    }
    return out;
}

SmoothFitReport smooth_fit(std::span<const double> reserves, const Solution& sol, double h) {
    SmoothFitReport rep;
    auto w = [&](double x, double y) { return evaluate(x, y, sol).w; };
    auto wx = [&](double x, double y) { return evaluate(x, y, sol).w_x; };
    for (double y : reserves) {
        if (!(y > 2.0 * h)) throw DomainError("smooth_fit: reserve must exceed 2h");
        const double x = sol.boundary_price(y);
        SmoothFitSample s;
        s.x = x;
        s.y = y;
        const double w0 = w(x, y);
        s.waiting[0] = (3.0 * w0 - 4.0 * w(x - h, y) + w(x - 2.0 * h, y)) / (2.0 * h);
        s.selling[0] = (-3.0 * w0 + 4.0 * w(x + h, y) - w(x + 2.0 * h, y)) / (2.0 * h);
        const double d0 = wx(x, y);
        s.waiting[1] = (3.0 * d0 - 4.0 * wx(x - h, y) + wx(x - 2.0 * h, y)) / (2.0 * h);
        s.selling[1] = (-3.0 * d0 + 4.0 * wx(x + h, y) - wx(x + 2.0 * h, y)) / (2.0 * h);
        if (sol.brownian()) {
            // Vertical boundary: central differences in y, extrapolated to x_star from each side.
            auto dy = [&](double xx) { return (w(xx, y + h) - w(xx, y - h)) / (2.0 * h); };
            s.waiting[2] = 2.0 * dy(x - h) - dy(x - 2.0 * h);
            s.selling[2] = 2.0 * dy(x + h) - dy(x + 2.0 * h);
        } else {
            s.waiting[2] = (3.0 * w0 - 4.0 * w(x, y - h) + w(x, y - 2.0 * h)) / (2.0 * h);
            s.selling[2] = (-3.0 * w0 + 4.0 * w(x, y + h) - w(x, y + 2.0 * h)) / (2.0 * h);
        }
        for (int k = 0; k < 3; ++k)
            s.worst_gap = std::max(s.worst_gap, relative_gap(s.waiting[k], s.selling[k]));
        rep.worst_gap = std::max(rep.worst_gap, s.worst_gap);
        rep.samples.push_back(s);
    }
    return rep;
}

double stopping_value(double x, double y, const Solution& sol) {
    const auto v = evaluate(x, y, sol);
    return sol.params.alpha * v.w_x + v.w_y;
}

StoppingReport stopping_hjb(std::span<const State> states, const Solution& sol, double tol) {
    const auto& p = sol.params;
    StoppingReport rep;
    for (const auto& [x, y] : states) {
        StoppingSample s;
        s.x = x;
        s.y = y;
        s.region = boundary::classify(x, y, sol);
        const auto k = coefficients(y, sol);
        const auto e = psi_eval(x, sol);
        const double f = std::exp(k.log_scale + e.log_scale);
        const double running = p.alpha * p.b * k.a * e.scaled[1] * f;
        double u, u_x, u_xx;
        if (s.region == Region::Waiting || s.region == Region::Boundary) {
            u = (p.alpha * k.a * e.scaled[1] + k.ap * e.scaled[0]) * f;
            u_x = (p.alpha * k.a * e.scaled[2] + k.ap * e.scaled[1]) * f;
            u_xx = (p.alpha * k.a * e.scaled[3] + k.ap * e.scaled[2]) * f;
        } else {
            u = x - p.c;
            u_x = 1.0;
            u_xx = 0.0;
        }
        s.u = u;
        s.generator = 0.5 * p.sigma * p.sigma * u_xx + (p.a - p.b * x) * u_x - p.rho * u - running;
        s.obstacle = x - p.c - u;
        const double scale = 1.0 + std::abs(u);
        if (s.region == Region::Waiting) {
            s.pass = std::abs(s.generator) <= tol * scale && s.obstacle <= tol * scale;
            rep.worst_generator = std::max(rep.worst_generator, std::abs(s.generator) / scale);
        } else if (s.region == Region::Boundary) {
            s.pass = std::abs(s.generator) <= tol * scale && std::abs(s.obstacle) <= tol * scale;
        } else {
            s.pass = s.generator <= tol * scale && std::abs(s.obstacle) <= tol * scale;
        }
        if (!s.pass) ++rep.failures;
        rep.samples.push_back(s);
    }
    return rep;
}

double growth_constant(const Solution& sol) {
    const double x_hi = sol.prices.depletion_price() + 3.0;
    const double x_lo = sol.boundary_price(20.0) - 3.0;
    double k = 0.0;
    for (int j = 0; j < 40; ++j) {
        const double y = 1e-3 * std::pow(2e4, j / 39.0);
        for (int i = 0; i <= 60; ++i) {
            const double x = x_lo + (x_hi - x_lo) * i / 60.0;
            const double w = evaluate(x, y, sol).w;
            k = std::max(k, w / (y * (1.0 + y) * (1.0 + std::abs(x))));
        }
    }
    return k;
}

double growth_ratio(std::span<const State> states, const Solution& sol) {
    double k = 0.0;
    for (const auto& [x, y] : states) {
        if (y == 0.0) continue;
        k = std::max(k, evaluate(x, y, sol).w / (y * (1.0 + y) * (1.0 + std::abs(x))));
    }
    return k;
}

double chi(double u, const Solution& sol) {
    if (sol.brownian()) throw DomainError("chi: OU branch only");
    const auto& p = sol.params;
    const double x_hat = (p.a + (p.rho + p.b) * p.c) / (p.rho + 2.0 * p.b);
    const auto e = specfun::psi(u, p, sol.quad);
    const auto& v = e.scaled;
    const double n_ratio = ((u - p.c) * v[2] - v[1]) / (v[2] * v[0] - v[1] * v[1]);
    return (p.rho + 2.0 * p.b) * (x_hat - u) + p.b * v[0] * n_ratio;
}

ChiDiagnostic chi_diagnostic(const Solution& sol, int points) {
    ChiDiagnostic d;
    const double x_inf = sol.prices.x_inf;
    const double width = sol.prices.x0 - x_inf;
    d.all_negative = true;
    for (int i = 0; i < points; ++i) {
        const double offset = width * std::pow(10.0, -6.0 + 6.0 * i / std::max(1, points - 1));
        const double u = x_inf + offset;
        const double v = chi(u, sol);
        d.samples.emplace_back(u, v);
        d.max_value = std::max(d.max_value, v);
        if (!(v < 0.0)) d.all_negative = false;
    }
    return d;
}

}  // namespace extraction::value
