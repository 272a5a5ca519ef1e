#include <doctest.h>

#include <cmath>

#include "../golden.hpp"
#include "extraction/errors.hpp"
#include "extraction/value.hpp"

using namespace extraction;
using boundary::Region;

namespace {
const boundary::Solution& ou() {
    static const auto sol = boundary::solve(golden::ou_params());
    return sol;
}
const boundary::Solution& bm() {
    static const auto sol = boundary::solve(golden::bm_params());
    return sol;
}
}  // namespace

TEST_CASE("OU value against the reference") {
    const auto w = value::evaluate(0.5, 1.0, ou());
    CHECK(w.region == Region::Waiting);
    CHECK(std::abs(w.w - golden::w_ou_05_1) <= 1e-7 * golden::w_ou_05_1);
    const auto s = value::evaluate(1.2, 2.0, ou());
    CHECK(s.region == Region::Sell2);
    CHECK(std::abs(s.w - golden::w_ou_12_2) <= 1e-7 * golden::w_ou_12_2);
    CHECK(std::abs(boundary::solve_z(1.2, 2.0, ou()) - golden::z_ou_12_2) < 1e-8);
}

TEST_CASE("Brownian closed form against the reference") {
    for (const auto& a : golden::bm_values) {
        INFO("(" << a.x << ", " << a.y << ")");
        CHECK(std::abs(value::value_bm(a.x, a.y, golden::bm_params()).w - a.w) <= 1e-12 * a.w);
    }
    CHECK_THROWS_AS(value::value_bm(1.0, 1.0, golden::ou_params()), DomainError);
}

TEST_CASE("zero reserve has zero value") {
    for (double x : {-1.0, 0.5, 1.5, 3.0}) {
        CHECK(value::evaluate(x, 0.0, ou()).w == 0.0);
        CHECK(value::evaluate(x, 0.0, bm()).w == 0.0);
    }
}

TEST_CASE("S1 closed form") {
    const auto p = golden::ou_params();
    const auto v = value::evaluate(1.8, 0.5, ou());
    CHECK(v.region == Region::Sell1);
    CHECK(v.w == doctest::Approx((1.8 - p.c) * 0.5 - 0.5 * p.alpha * 0.25));
    CHECK(v.w_x == 0.5);
    CHECK(v.w_y == doctest::Approx(1.8 - p.c - p.alpha * 0.5));
}

TEST_CASE("coefficient A is increasing, bounded, with A(0) = 0") {
    CHECK(value::coeff_A(0.0, ou()) == 0.0);
    const double bound = value::coeff_A_bound(ou());
    double prev = 0.0;
    for (double y : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 40.0}) {
        const double a = value::coeff_A(y, ou());
        CHECK(a > prev);
        CHECK(a < bound);
        CHECK(value::coeff_A_prime(y, ou()) > 0.0);
        prev = a;
    }
    const double h = 1e-5;
    for (double y : {0.3, 2.0}) {
        const double fd = (value::coeff_A(y + h, ou()) - value::coeff_A(y - h, ou())) / (2 * h);
        CHECK(value::coeff_A_prime(y, ou()) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("HJB residuals on sampled states") {
    for (const auto* sol : {&ou(), &bm()}) {
        std::vector<value::State> states;
        for (auto r : {Region::Waiting, Region::Sell1, Region::Sell2}) {
            const auto s = value::sample_states(r, 300, *sol, 5 + static_cast<int>(r));
            for (const auto& [x, y] : s) CHECK(boundary::classify(x, y, *sol) == r);
            states.insert(states.end(), s.begin(), s.end());
        }
        const auto rep = value::hjb_residuals(states, *sol);
        CHECK(rep.passed());
        CHECK(rep.n_waiting == 300);
        CHECK(rep.n_selling == 600);
        CHECK(rep.max_waiting_slack < 0.0);
        CHECK(rep.max_waiting_residual <= 1e-7);
        CHECK(rep.max_selling_constraint <= 1e-8);
        CHECK(rep.max_selling_generator <= 1e-8);
    }
}

TEST_CASE("sampling is deterministic in the seed") {
    const auto a = value::sample_states(Region::Sell2, 20, ou(), 3);
    const auto b = value::sample_states(Region::Sell2, 20, ou(), 3);
    const auto c = value::sample_states(Region::Sell2, 20, ou(), 4);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("analytic partials against finite differences") {
    const double h = 1e-5;
    for (const auto* sol : {&ou(), &bm()}) {
        for (auto [x, y] : {value::State{0.5, 1.0}, value::State{1.2, 2.0}, value::State{2.4, 0.4}}) {
            const auto v = value::evaluate(x, y, *sol);
            const double wx = (value::evaluate(x + h, y, *sol).w - value::evaluate(x - h, y, *sol).w) / (2 * h);
            const double wy = (value::evaluate(x, y + h, *sol).w - value::evaluate(x, y - h, *sol).w) / (2 * h);
            CHECK(v.w_x == doctest::Approx(wx).epsilon(1e-6));
            CHECK(v.w_y == doctest::Approx(wy).epsilon(1e-6));
        }
    }
}

TEST_CASE("smooth fit across the boundary") {
    std::vector<double> ys;
    for (int i = 0; i < 50; ++i) ys.push_back(0.01 * std::pow(1000.0, i / 49.0));
    const auto r_ou = value::smooth_fit(ys, ou());
    CHECK(r_ou.samples.size() == 50);
    CHECK(r_ou.passed(1e-4));
    const auto r_bm = value::smooth_fit(ys, bm());
    CHECK(r_bm.passed(1e-4));
}

TEST_CASE("value is monotone in reserve and continuous across the boundary") {
    for (double x : {0.2, 0.9, 1.3, 2.5}) {
        double prev = 0.0;
        for (double y : {0.1, 0.5, 1.0, 2.0, 5.0}) {
            const double w = value::evaluate(x, y, ou()).w;
            CHECK(w > prev);
            prev = w;
        }
    }
    for (double y : {0.3, 2.0}) {
        const double g = ou().boundary_price(y);
        CHECK(value::evaluate(g - 1e-9, y, ou()).w == doctest::Approx(value::evaluate(g + 1e-9, y, ou()).w).epsilon(1e-8));
    }
}

TEST_CASE("stopping representation") {
    std::vector<value::State> states;
    for (auto r : {Region::Waiting, Region::Sell1, Region::Sell2}) {
        const auto s = value::sample_states(r, 200, ou(), 21 + static_cast<int>(r));
        states.insert(states.end(), s.begin(), s.end());
    }
    CHECK(value::stopping_hjb(states, ou()).passed());
    // selling region: u = x - c
    const auto p = golden::ou_params();
    CHECK(value::stopping_value(1.2, 2.0, ou()) == doctest::Approx(1.2 - p.c));
}

TEST_CASE("Brownian stopping value does not depend on the reserve") {
    for (double x : {0.0, 1.0, 1.8, 1.95, 3.0}) {
        const double ref = value::stopping_value(x, 1.0, bm());
        for (double y : {0.05, 0.5, 4.0, 20.0}) CHECK(std::abs(value::stopping_value(x, y, bm()) - ref) <= 1e-10);
    }
}

TEST_CASE("growth constant bounds the samples") {
    const double k = value::growth_constant(ou());
    CHECK(k > 0.0);
    CHECK(std::isfinite(k));
    const auto s = value::sample_states(Region::Waiting, 200, ou(), 9);
    CHECK(value::growth_ratio(s, ou()) <= k);
}

TEST_CASE("chi diagnostic is negative on (x_inf, x0)") {
    const auto d = value::chi_diagnostic(ou(), 100);
    CHECK(d.samples.size() == 100);
    CHECK(d.all_negative);
    CHECK_THROWS_AS(value::chi(1.0, bm()), DomainError);
}
