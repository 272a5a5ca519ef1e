#include "extraction/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <thread>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "extraction/errors.hpp"
#include "extraction/value.hpp"

namespace extraction::sim {

namespace {

struct PathOutcome {
    double payoff = 0.0;
    bool depleted = false;
    double x_T = 0.0;
    double y_T = 0.0;
};

struct TracePoint {
    double t, x, y, xi;
};
using Trace = std::vector<TracePoint>;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

template <class Fn>
std::vector<PathOutcome> run_paths(std::size_t n, unsigned threads, Fn&& fn) {
    std::vector<PathOutcome> out(n);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) out[i] = fn(i);
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

// Mean and standard error, summed in path order.
std::pair<double, double> moments(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    if (v.empty()) return {0.0, 0.0};
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / n;
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

void check_policy(const Policy& policy, const Solution& sol) {
    if (policy.kind == PolicyKind::OptimalOU && sol.brownian())
        throw ConfigError("policy OptimalOU needs b > 0");
    if (policy.kind == PolicyKind::OptimalBM && !sol.brownian())
        throw ConfigError("policy OptimalBM needs b == 0");
    if (policy.kind == PolicyKind::ShiftedBoundary && !std::isfinite(policy.shift))
        throw ConfigError("boundary shift must be finite");
}

// One controlled path under a reflecting policy (optimal or shifted).
class ControlEngine {
public:
    ControlEngine(double x, double y, const Solution& sol, const SimConfig& cfg)
        : x_(x), y_(y), sol_(sol), cfg_(cfg), p_(sol.params) {
        shift_ = cfg.policy.kind == PolicyKind::ShiftedBoundary ? cfg.policy.shift : 0.0;
        steps_ = static_cast<std::size_t>(std::llround(cfg.resolved_horizon(p_.rho) / cfg.h));
        sqh_ = std::sqrt(cfg.h);
        dstep_ = std::exp(-p_.rho * cfg.h);
        level_ = sol.prices.depletion_price() + shift_;
        offset_ = cfg.reflection_correction ? reflection_offset(p_.sigma, cfg.h) : 0.0;
    }

    std::size_t steps() const { return steps_; }

    PathOutcome run(std::size_t index, Trace* trace) const {
        return sol_.brownian() ? run_bm(index, trace) : run_ou(index, trace);
    }

private:
    PathOutcome run_ou(std::size_t index, Trace* trace) const {
        std::mt19937_64 rng(path_seed(cfg_.base_seed, index));
        boost::random::normal_distribution<double> normal;
        const double alpha = p_.alpha, c = p_.c;
        double X = x_, Y = y_, xi = 0.0, disc = 1.0, pay = 0.0;

        const double d0 = push_amount(X, Y, sol_, shift_);
        pay += (X - c) * d0 - 0.5 * alpha * d0 * d0;
        X -= alpha * d0;
        Y = d0 >= Y ? 0.0 : Y - d0;
        xi = d0;
        if (trace) trace->push_back({0.0, X, Y, xi});
        // Pushes after t = 0 target the boundary lowered by offset_.
        const double step_shift = shift_ - offset_;
        double thr = Y > 0.0 ? (d0 > 0.0 ? X : sol_.boundary_price(Y) + shift_) - offset_ : 0.0;

        for (std::size_t k = 1; k <= steps_ && Y > 0.0; ++k) {
            X += (p_.a - p_.b * X) * cfg_.h + p_.sigma * sqh_ * normal(rng);
            disc *= dstep_;
            if (X > thr) {
                double d;
                if ((X - level_ + offset_) / alpha >= Y) {
                    d = Y;
                } else {
                    d = boundary::solve_push(X, Y, alpha, *sol_.table, step_shift, thr - step_shift);
                    d = std::min(d, Y);
                }
                pay += disc * ((X - c) * d - 0.5 * alpha * d * d);
                X -= alpha * d;
                Y = d >= Y ? 0.0 : Y - d;
                xi += d;
                thr = X;
            }
            if (trace) trace->push_back({k * cfg_.h, X, Y, xi});
        }
        return {pay, Y <= 0.0, X, Y};
    }

    PathOutcome run_bm(std::size_t index, Trace* trace) const {
        std::mt19937_64 rng(path_seed(cfg_.base_seed, index));
        boost::random::normal_distribution<double> normal;
        const double alpha = p_.alpha, c = p_.c;
        double S = x_, M = x_, disc = 1.0;
        double xi = std::min(y_, std::max(0.0, (x_ - level_) / alpha));
        double pay = (x_ - c) * xi - 0.5 * alpha * xi * xi;
        if (trace) trace->push_back({0.0, S - alpha * xi, y_ - xi, xi});
        for (std::size_t k = 1; k <= steps_ && xi < y_; ++k) {
            S += p_.a * cfg_.h + p_.sigma * sqh_ * normal(rng);
            disc *= dstep_;
            M = std::max(M, S);
            const double next = std::min(y_, (M - level_ + offset_) / alpha);
            if (next > xi) {
                const double d = next - xi;
                pay += disc * ((S - alpha * xi - c) * d - 0.5 * alpha * d * d);
                xi = next;
            }
            if (trace) trace->push_back({k * cfg_.h, S - alpha * xi, y_ - xi, xi});
        }
        return {pay, xi >= y_, S - alpha * xi, y_ - xi};
    }

    double x_, y_;
    const Solution& sol_;
    const SimConfig& cfg_;
    const ModelParams& p_;
    double shift_ = 0.0;
    std::size_t steps_ = 0;
    double sqh_ = 0.0;
    double dstep_ = 0.0;
    double level_ = 0.0;
    double offset_ = 0.0;
};

// Growth bound of the value used for the truncation estimate.
double value_bound(double x, double y, const Solution& sol, double waiting_cap) {
    if (y <= 0.0) return 0.0;
    return waiting_cap + std::max(0.0, x - sol.params.c) * y;
}

double waiting_cap(const Solution& sol) {
    if (sol.brownian()) return value::coeff_A_bound(sol) * std::exp(sol.prices.n * sol.prices.x_star);
    return value::coeff_A_bound(sol) * specfun::psi_k(sol.prices.x0, 0, sol.params, sol.quad);
}

// Cubic Hermite table of psi' on [lo, hi] with psi'' slopes.
class PsiPrimeTable {
public:
    PsiPrimeTable(double lo, double hi, const ModelParams& p, const QuadratureSpec& q) : p_(p), q_(q) {
        const int cells = std::max(8, static_cast<int>(std::ceil((hi - lo) / 0.01)));
        lo_ = lo;
        dx_ = (hi - lo) / cells;
        f_.resize(cells + 1);
        d_.resize(cells + 1);
        for (int i = 0; i <= cells; ++i) {
            const auto e = specfun::psi(lo + i * dx_, p, q);
            f_[i] = e.value(1);
            d_[i] = e.value(2);
        }
    }

    double operator()(double x) const {
        const double s = (x - lo_) / dx_;
        if (s < 0.0 || s > static_cast<double>(f_.size() - 1)) return specfun::psi_k(x, 1, p_, q_);
        const std::size_t i = std::min(static_cast<std::size_t>(s), f_.size() - 2);
        const double t = s - static_cast<double>(i);
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * f_[i] + (t3 - 2 * t2 + t) * dx_ * d_[i] + (-2 * t3 + 3 * t2) * f_[i + 1] +
               (t3 - t2) * dx_ * d_[i + 1];
    }

private:
    ModelParams p_;
    QuadratureSpec q_;
    double lo_ = 0.0, dx_ = 1.0;
    std::vector<double> f_, d_;
};

}  // namespace

double reflection_offset(double sigma, double h) {
    using boost::math::constants::two_pi;
    static const double beta = -boost::math::zeta(0.5) / std::sqrt(two_pi<double>());
    return beta * sigma * std::sqrt(h);
}

Policy Policy::optimal(const Solution& sol) {
    return {sol.brownian() ? PolicyKind::OptimalBM : PolicyKind::OptimalOU, 0.0};
}

std::string Policy::name() const {
    switch (kind) {
        case PolicyKind::OptimalOU: return "OptimalOU";
        case PolicyKind::OptimalBM: return "OptimalBM";
        case PolicyKind::ShiftedBoundary: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "ShiftedBoundary(%+.6g)", shift);
            return buf;
        }
        case PolicyKind::NoExtraction: return "NoExtraction";
        case PolicyKind::ImmediateDepletion: return "ImmediateDepletion";
    }
    return "?";
}

void SimConfig::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("sim.h must be positive");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw ConfigError("sim.horizon must be >= 0");
    if (n_paths < 1) throw ConfigError("sim.n_paths must be >= 1");
    if (threads < 1) throw ConfigError("sim.threads must be >= 1");
}

std::uint64_t path_seed(std::uint64_t base_seed, std::uint64_t path_index) {
    return splitmix64(splitmix64(base_seed) ^ path_index);
}

double push_amount(double x, double y, const Solution& sol, double shift) {
    if (!(y >= 0.0)) throw DomainError("push_amount: reserve must be >= 0");
    if (y == 0.0) return 0.0;
    const double alpha = sol.params.alpha;
    const double level = sol.prices.depletion_price() + shift;
    if (sol.brownian()) return std::min(y, std::max(0.0, (x - level) / alpha));
    if (x <= sol.boundary_price(y) + shift) return 0.0;
    if ((x - level) / alpha >= y) return y;
    return std::min(y, boundary::solve_push(x, y, alpha, *sol.table, shift));
}

double initial_jump(double x, double y, const Solution& sol) { return push_amount(x, y, sol, 0.0); }

SimResult simulate_payoff(double x, double y, const Solution& sol, const SimConfig& cfg,
                          std::vector<double>* per_path) {
    cfg.validate();
    check_policy(cfg.policy, sol);
    if (!(y >= 0.0)) throw DomainError("simulate_payoff: reserve must be >= 0");
    const auto& p = sol.params;
    SimResult res;
    res.policy = cfg.policy.name();
    res.n_paths = cfg.n_paths;
    res.horizon = cfg.resolved_horizon(p.rho);
    res.h = cfg.h;
    res.base_seed = cfg.base_seed;

    std::vector<double> payoffs(cfg.n_paths, 0.0);
    auto finish = [&] {
        std::tie(res.mean, res.std_error) = moments(payoffs);
        if (per_path) *per_path = std::move(payoffs);
        return res;
    };

    if (y == 0.0 || cfg.policy.kind == PolicyKind::NoExtraction) return finish();
    if (cfg.policy.kind == PolicyKind::ImmediateDepletion) {
        std::fill(payoffs.begin(), payoffs.end(), (x - p.c) * y - 0.5 * p.alpha * y * y);
        res.initial_jump = y;
        res.depleted_fraction = 1.0;
        return finish();
    }

    const double shift = cfg.policy.kind == PolicyKind::ShiftedBoundary ? cfg.policy.shift : 0.0;
    res.initial_jump = push_amount(x, y, sol, shift);
    ControlEngine engine(x, y, sol, cfg);
    const auto outcomes = run_paths(cfg.n_paths, cfg.threads, [&](std::size_t i) { return engine.run(i, nullptr); });

    const double cap = waiting_cap(sol);
    double depleted = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        payoffs[i] = outcomes[i].payoff;
        depleted += outcomes[i].depleted ? 1.0 : 0.0;
        tail += value_bound(outcomes[i].x_T, outcomes[i].y_T, sol, cap);
    }
    const double n = static_cast<double>(outcomes.size());
    res.depleted_fraction = depleted / n;
    res.tail_bound = std::exp(-p.rho * res.horizon) * tail / n;
    return finish();
}

std::vector<double> running_max_policy_bm(double x, double y, const ModelParams& p, double level,
                                          std::span<const double> dW, double h) {
    if (!p.brownian()) throw DomainError("running_max_policy_bm: needs b == 0");
    std::vector<double> xi(dW.size() + 1);
    double S = x, M = x;
    xi[0] = std::min(y, std::max(0.0, (x - level) / p.alpha));
    for (std::size_t k = 0; k < dW.size(); ++k) {
        S += p.a * h + p.sigma * dW[k];
        M = std::max(M, S);
        xi[k + 1] = std::min(y, std::max(0.0, (M - level) / p.alpha));
    }
    return xi;
}

bool DominanceReport::passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const DominanceRow& r) { return r.pass; });
}

DominanceReport dominance_test(double x, double y, const Solution& sol, const SimConfig& cfg,
                               std::span<const double> shifts, const std::vector<double>* optimal_payoffs) {
    DominanceReport rep;
    rep.x = x;
    rep.y = y;
    SimConfig base = cfg;
    base.policy = Policy::optimal(sol);
    std::vector<double> opt;
    if (optimal_payoffs && optimal_payoffs->size() == cfg.n_paths) {
        opt = *optimal_payoffs;
        std::tie(rep.optimal.mean, rep.optimal.std_error) = moments(opt);
        rep.optimal.policy = base.policy.name();
        rep.optimal.n_paths = opt.size();
    } else {
        rep.optimal = simulate_payoff(x, y, sol, base, &opt);
    }

    auto compare = [&](const Policy& alt, bool must_be_worse) {
        SimConfig c = base;
        c.policy = alt;
        std::vector<double> other;
        const auto r = simulate_payoff(x, y, sol, c, &other);
        std::vector<double> diff(opt.size());
        for (std::size_t i = 0; i < opt.size(); ++i) diff[i] = opt[i] - other[i];
        const auto [md, se] = moments(diff);
        DominanceRow row;
        row.policy = r.policy;
        row.shift = alt.shift;
        row.mean = r.mean;
        row.paired_diff = md;
        row.paired_se = se;
        row.pass = must_be_worse ? md > 2.0 * se : md >= -2.0 * se;
        rep.rows.push_back(row);
    };

    for (double s : shifts) {
        if (s == 0.0) throw DomainError("dominance_test: shifts must be nonzero");
        compare(Policy::shifted(s), false);
    }
    const bool waiting_start = y > 0.0 && boundary::classify(x, y, sol) == boundary::Region::Waiting;
    compare({PolicyKind::ImmediateDepletion, 0.0}, waiting_start);
    return rep;
}

SimResult simulate_stopping(double x, double y, const Solution& sol, const SimConfig& cfg) {
    cfg.validate();
    if (!(y >= 0.0)) throw DomainError("simulate_stopping: reserve must be >= 0");
    const auto& p = sol.params;
    SimResult res;
    res.policy = "FirstPassage";
    res.n_paths = cfg.n_paths;
    res.horizon = cfg.resolved_horizon(p.rho);
    res.h = cfg.h;
    res.base_seed = cfg.base_seed;

    const double G = sol.boundary_price(y);
    if (x >= G) {
        res.mean = x - p.c;
        return res;
    }
    const double k_run = p.alpha * p.b * value::coeff_A(y, sol);
    std::optional<PsiPrimeTable> table;
    if (!sol.brownian()) {
        const double lo = std::min(x, p.a / p.b - 8.0 * p.sigma / std::sqrt(2.0 * p.b)) - 0.1;
        table.emplace(lo, G, p, sol.quad);
    }
    auto psi1 = [&](double v) { return table ? (*table)(v) : 0.0; };

    const std::size_t steps = static_cast<std::size_t>(std::llround(res.horizon / cfg.h));
    const double sqh = std::sqrt(cfg.h);
    const double dstep = std::exp(-p.rho * cfg.h);
    const double var_h = p.sigma * p.sigma * cfg.h;

    auto path = [&](std::size_t index) {
        std::mt19937_64 rng(path_seed(cfg.base_seed, index));
        boost::random::normal_distribution<double> normal;
        boost::random::uniform_01<double> unif;
        double X = x, disc = 1.0, cost = 0.0, f_prev = psi1(x);
        for (std::size_t k = 1; k <= steps; ++k) {
            const double Xn = X + (p.a - p.b * X) * cfg.h + p.sigma * sqh * normal(rng);
            const double dn = disc * dstep;
            bool hit = Xn >= G;
            if (!hit && cfg.bridge_correction) {
                const double pr = std::exp(-2.0 * (G - X) * (G - Xn) / var_h);
                if (pr > 1e-12) hit = unif(rng) < pr;
            }
            if (hit) {
                cost += 0.5 * (disc * f_prev + dn * psi1(G)) * cfg.h;
                return PathOutcome{dn * (G - p.c) - k_run * cost, true, G, y};
            }
            const double fn = psi1(Xn);
            cost += 0.5 * (disc * f_prev + dn * fn) * cfg.h;
            X = Xn;
            disc = dn;
            f_prev = fn;
        }
        return PathOutcome{-k_run * cost, false, X, y};
    };
    const auto outcomes = run_paths(cfg.n_paths, cfg.threads, path);
    std::vector<double> payoffs(outcomes.size());
    double stopped = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        payoffs[i] = outcomes[i].payoff;
        stopped += outcomes[i].depleted ? 1.0 : 0.0;
    }
    std::tie(res.mean, res.std_error) = moments(payoffs);
    res.depleted_fraction = stopped / static_cast<double>(outcomes.size());
    // An unstopped path forgoes at most e^{-rho T} (G - c).
    res.tail_bound = std::exp(-p.rho * res.horizon) * std::max(0.0, G - p.c) * (1.0 - res.depleted_fraction);
    return res;
}

void write_trace(std::ostream& out, double x, double y, const Solution& sol, const SimConfig& cfg, int stride) {
    cfg.validate();
    check_policy(cfg.policy, sol);
    if (stride < 1) throw ConfigError("trace stride must be >= 1");
    if (cfg.policy.kind == PolicyKind::NoExtraction || cfg.policy.kind == PolicyKind::ImmediateDepletion)
        throw ConfigError("trace needs a reflecting policy");
    ControlEngine engine(x, y, sol, cfg);
    out << "# extraction-trace v1\npath,t,X,Y,xi\n";
    out.precision(17);
    const std::size_t n = std::min<std::size_t>(cfg.n_paths, 16);
    for (std::size_t i = 0; i < n; ++i) {
        Trace trace;
        trace.reserve(engine.steps() + 1);
        engine.run(i, &trace);
        for (std::size_t k = 0; k < trace.size(); ++k) {
            if (k % static_cast<std::size_t>(stride) != 0 && k + 1 != trace.size()) continue;
            const auto& tp = trace[k];
            out << i << ',' << tp.t << ',' << tp.x << ',' << tp.y << ',' << tp.xi << '\n';
        }
    }
}

}  // namespace extraction::sim
