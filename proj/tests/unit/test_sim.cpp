#include <doctest.h>

#include <cmath>
#include <sstream>
#include <tuple>

#include "../golden.hpp"
#include "extraction/errors.hpp"
#include "extraction/sim.hpp"
#include "extraction/value.hpp"

using namespace extraction;

namespace {
const boundary::Solution& ou() {
    static const auto sol = boundary::solve(golden::ou_params());
    return sol;
}
const boundary::Solution& bm() {
    static const auto sol = boundary::solve(golden::bm_params());
    return sol;
}
sim::SimConfig quick(const boundary::Solution& sol, std::size_t n = 2000) {
    sim::SimConfig c;
    c.h = 4e-3;
    c.n_paths = n;
    c.policy = sim::Policy::optimal(sol);
    return c;
}
}  // namespace

TEST_CASE("configuration validation") {
    sim::SimConfig c;
    CHECK_NOTHROW(c.validate());
    c.h = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.n_paths = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(sim::SimConfig{}.resolved_horizon(0.375) == doctest::Approx(10.0 / 0.375));
}

TEST_CASE("zero reserve pays nothing") {
    const auto r = sim::simulate_payoff(0.5, 0.0, ou(), quick(ou(), 50));
    CHECK(r.mean == 0.0);
    CHECK(r.std_error == 0.0);
}

TEST_CASE("policy must match the branch") {
    auto c = quick(ou(), 10);
    c.policy = {sim::PolicyKind::OptimalBM, 0.0};
    CHECK_THROWS_AS(sim::simulate_payoff(0.5, 1.0, ou(), c), ConfigError);
}

TEST_CASE("initial jump") {
    const auto p = golden::ou_params();
    CHECK(sim::initial_jump(0.5, 1.0, ou()) == 0.0);
    CHECK(sim::initial_jump(1.8, 0.5, ou()) == 0.5);
    CHECK(sim::initial_jump(1.2, 2.0, ou()) == doctest::Approx(golden::z_ou_12_2).epsilon(1e-9));
    CHECK(sim::initial_jump(2.5, 1.0, bm()) == 1.0);
    CHECK(sim::initial_jump(2.2, 3.0, bm()) == doctest::Approx((2.2 - 1.9) / p.alpha));
}

TEST_CASE("immediate depletion pays the lump sum") {
    auto c = quick(ou(), 10);
    c.policy = {sim::PolicyKind::ImmediateDepletion, 0.0};
    const auto r = sim::simulate_payoff(0.9, 2.0, ou(), c);
    CHECK(r.mean == doctest::Approx((0.9 - 0.3) * 2.0 - 0.125 * 4.0));
    CHECK(r.std_error == 0.0);
}

TEST_CASE("results do not depend on the thread count") {
    auto c = quick(ou(), 400);
    std::vector<double> a, b;
    const auto r1 = sim::simulate_payoff(1.2, 2.0, ou(), c, &a);
    c.threads = 3;
    const auto r3 = sim::simulate_payoff(1.2, 2.0, ou(), c, &b);
    CHECK(r1.mean == r3.mean);
    CHECK(r1.std_error == r3.std_error);
    CHECK(a == b);
    c.base_seed += 1;
    CHECK(sim::simulate_payoff(1.2, 2.0, ou(), c).mean != r1.mean);
}

TEST_CASE("path seeds are distinct") {
    CHECK(sim::path_seed(1, 0) != sim::path_seed(1, 1));
    CHECK(sim::path_seed(1, 0) != sim::path_seed(2, 0));
    CHECK(sim::path_seed(7, 5) == sim::path_seed(7, 5));
}

TEST_CASE("running maximum policy") {
    const auto p = golden::bm_params();
    const double h = 1e-3;
    // path drifting down: never reaches the level
    std::vector<double> down(200, -0.05);
    const auto xi0 = sim::running_max_policy_bm(1.0, 2.0, p, 1.9, down, h);
    CHECK(xi0.size() == 201);
    for (double v : xi0) CHECK(v == 0.0);

    const auto jump = sim::running_max_policy_bm(2.1, 5.0, p, 1.9, down, h);
    CHECK(jump[0] == doctest::Approx(0.2 / p.alpha));
    CHECK(sim::running_max_policy_bm(2.5, 1.0, p, 1.9, down, h)[0] == 1.0);

    std::vector<double> up(500, 0.02);
    const auto xi = sim::running_max_policy_bm(1.8, 1.0, p, 1.9, up, h);
    double w = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        if (k > 0) {
            CHECK(xi[k] >= xi[k - 1]);
            w += up[k - 1];
        }
        CHECK(xi[k] <= 1.0);
        const double x = 1.8 + p.a * k * h + p.sigma * w - p.alpha * xi[k];
        if (xi[k] < 1.0) CHECK(x <= 1.9 + 1e-12);
    }
}

TEST_CASE("reflection offset") {
    CHECK(sim::reflection_offset(0.8, 1e-3) == doctest::Approx(0.5825971579 * 0.8 * std::sqrt(1e-3)).epsilon(1e-8));
}

TEST_CASE("small Monte Carlo agrees with the value") {
    for (auto [sol, x, y] : {std::tuple{&ou(), 0.5, 1.0}, std::tuple{&ou(), 1.2, 2.0}, std::tuple{&bm(), 1.5, 1.0}}) {
        const auto r = sim::simulate_payoff(x, y, *sol, quick(*sol, 3000));
        const double w = value::evaluate(x, y, *sol).w;
        INFO("(" << x << ", " << y << ") mean " << r.mean << " se " << r.std_error << " w " << w);
        CHECK(std::abs(r.mean - w) <= std::max(3.0 * r.std_error, 0.03 * w));
        CHECK(r.tail_bound < 1e-3);
    }
}

TEST_CASE("dominance report structure") {
    const double shift = 0.05 * (ou().prices.x0 - ou().prices.x_inf);
    const std::vector<double> shifts{shift, -shift};
    const auto rep = sim::dominance_test(0.5, 1.0, ou(), quick(ou(), 500), shifts);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].shift == shift);
    CHECK(rep.rows[2].policy == "ImmediateDepletion");
    CHECK(rep.rows[2].pass);
    const std::vector<double> zero{0.0};
    CHECK_THROWS_AS(sim::dominance_test(0.5, 1.0, ou(), quick(ou(), 10), zero), DomainError);
}

TEST_CASE("trace output") {
    auto c = quick(ou(), 2);
    c.horizon = 0.1;
    std::ostringstream out;
    sim::write_trace(out, 1.2, 2.0, ou(), c, 5);
    const std::string s = out.str();
    CHECK(s.rfind("# extraction-trace v1\npath,t,X,Y,xi\n", 0) == 0);
    CHECK(s.find("\n1,") != std::string::npos);
}

TEST_CASE("stopping simulation is close to u") {
    auto c = quick(ou(), 3000);
    const auto r = sim::simulate_stopping(0.5, 1.0, ou(), c);
    const double u = value::stopping_value(0.5, 1.0, ou());
    CHECK(std::abs(r.mean - u) <= std::max(3.0 * r.std_error, 0.03 * std::abs(u)));
}
