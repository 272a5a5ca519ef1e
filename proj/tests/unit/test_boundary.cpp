#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "../golden.hpp"
#include "extraction/boundary.hpp"
#include "extraction/errors.hpp"
#include "extraction/io.hpp"

using namespace extraction;
using boundary::Region;

namespace {
const boundary::Solution& fig2() {
    static const auto sol = boundary::solve(golden::ou_params());
    return sol;
}
}  // namespace

TEST_CASE("critical prices against the reference roots") {
    const auto& pr = fig2().prices;
    CHECK(pr.branch == boundary::Branch::OrnsteinUhlenbeck);
    CHECK(std::abs(pr.x0 - golden::x0) < 1e-12);
    CHECK(std::abs(pr.x_inf - golden::x_inf) < 1e-12);
    // coarse bisection agrees at its own resolution
    CHECK(std::abs(pr.x0 - golden::x0_bisection) < 1e-8);
    CHECK(std::abs(pr.x_inf - golden::x_inf_bisection) < 1e-8);
    CHECK(std::abs(pr.x_bar - golden::x_bar) < 1e-15);
    CHECK(golden::ou_params().c < pr.x_inf);
    CHECK(pr.x_inf < pr.x0);
    CHECK(pr.x_bar < pr.x0);
    CHECK(pr.depletion_price() == pr.x0);
}

TEST_CASE("defining equations hold at the roots") {
    const auto p = golden::ou_params();
    const auto& pr = fig2().prices;
    const auto e0 = specfun::psi(pr.x0, p);
    CHECK(std::abs((pr.x0 - p.c) * e0.ratio(1, 0) - 1.0) < 1e-12);
    const auto ei = specfun::psi(pr.x_inf, p);
    CHECK(std::abs((pr.x_inf - p.c) * ei.ratio(2, 1) - 1.0) < 1e-12);
}

TEST_CASE("Brownian branch critical price") {
    const auto sol = boundary::solve(golden::bm_params());
    CHECK(sol.brownian());
    CHECK_FALSE(sol.table.has_value());
    CHECK(std::abs(sol.prices.n - 0.625) < 1e-12);
    CHECK(std::abs(sol.prices.x_star - 1.9) < 1e-12);
    CHECK(sol.boundary_price(0.0) == sol.prices.x_star);
    CHECK(sol.boundary_price(17.0) == sol.prices.x_star);
}

TEST_CASE("F matches tanh-sinh reference integrals") {
    const auto& t = *fig2().table;
    for (const auto& pt : golden::f_points) {
        INFO("x = " << pt.x);
        CHECK(std::abs(t.F(pt.x) - pt.F) <= 1e-9 * pt.F);
    }
    CHECK(std::abs(t.inverse(1.0) - golden::G_at_1) < 1e-10);
}

TEST_CASE("table invariants") {
    const auto& t = *fig2().table;
    CHECK_NOTHROW(t.check_invariants());
    CHECK(t.F(t.x0()) == 0.0);
    const auto f = t.f_values();
    const auto n = t.nodes();
    for (std::size_t i = 1; i < f.size(); ++i) {
        CHECK(n[i] > n[i - 1]);
        CHECK(f[i] < f[i - 1]);
    }
    const double width = t.x0() - t.x_inf();
    CHECK(t.F(t.x_inf() + 1e-3 * width) > 10.0 * t.F(t.x_inf() + 0.5 * width));
    CHECK(t.tail_coefficient() > 0.0);
    CHECK_THROWS_AS(t.F(t.x_inf()), DomainError);
    CHECK_THROWS_AS(t.F(t.x0() + 1e-9), DomainError);
}

TEST_CASE("F' equals minus the boundary integrand") {
    const auto p = golden::ou_params();
    const auto& t = *fig2().table;
    for (double frac : {0.02, 0.3, 0.77, 0.99}) {
        const double x = t.x_inf() + frac * (t.x0() - t.x_inf());
        CHECK(t.derivative(x) == doctest::Approx(-boundary::boundary_integrand(x, p, {}, t.x_inf())).epsilon(1e-6));
    }
    CHECK_THROWS_AS(boundary::boundary_integrand(t.x_inf(), p, {}, t.x_inf()), DomainError);
}

TEST_CASE("inverse round trip on a log-spaced set") {
    const auto& t = *fig2().table;
    double worst = 0.0;
    for (int i = 0; i <= 60; ++i) {
        const double y = 1e-4 * std::pow(5e5, i / 60.0);
        const double x = t.inverse(y);
        CHECK(x > t.x_inf());
        CHECK(x <= t.x0());
        worst = std::max(worst, std::abs(t.F(x) - y));
    }
    CHECK(worst <= 1e-8);
    CHECK(t.inverse(0.0) == t.x0());
    // deep in the tail the inverse stays strictly above x_inf
    CHECK(t.inverse(500.0) > t.x_inf());
}

TEST_CASE("push size solves the boundary equation") {
    const auto& sol = fig2();
    const auto p = sol.params;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uy(0.05, 6.0), ux(0.005, 0.995);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double y = uy(rng);
        const double g = sol.boundary_price(y);
        const double hi = std::min(g + 3.0, sol.prices.x0 + p.alpha * y);
        const double x = g + ux(rng) * (hi - g);
        REQUIRE(boundary::classify(x, y, sol) == Region::Sell2);
        const double z = boundary::solve_z(x, y, sol);
        CHECK(z > 0.0);
        CHECK(z < y);
        worst = std::max(worst, std::abs((y - z) - sol.table->F(x - p.alpha * z)));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("push size at the edges of S2") {
    const auto& sol = fig2();
    const auto p = sol.params;
    for (double y : {0.1, 1.0, 4.0}) {
        const double g = sol.boundary_price(y);
        CHECK(std::abs(boundary::solve_z(g, y, sol)) <= 1e-8);
    }
    for (double x : {1.05, 1.4, 2.0}) {
        const double y = (x - sol.prices.x0) / p.alpha;
        CHECK(std::abs(boundary::solve_z(x, y, sol) - y) <= 1e-8);
    }
    CHECK_THROWS_AS(boundary::solve_z(0.2, 1.0, sol), DomainError);
}

TEST_CASE("region classification") {
    const auto& sol = fig2();
    CHECK(boundary::classify(0.5, 1.0, sol) == Region::Waiting);
    CHECK(boundary::classify(2.0, 0.0, sol) == Region::Waiting);
    CHECK(boundary::classify(1.8, 0.5, sol) == Region::Sell1);
    CHECK(boundary::classify(1.2, 2.0, sol) == Region::Sell2);
    CHECK(boundary::classify(sol.boundary_price(2.0), 2.0, sol) == Region::Boundary);
    CHECK(std::string(boundary::to_string(Region::Sell2)) == "S2");
}

TEST_CASE("finer grading leaves F unchanged") {
    boundary::Grading fine;
    fine.nodes_per_octave = 64;
    const auto alt = boundary::solve(golden::ou_params(), {}, fine);
    const auto& t = *fig2().table;
    for (double frac : {0.001, 0.05, 0.4, 0.9}) {
        const double x = t.x_inf() + frac * (t.x0() - t.x_inf());
        CHECK(std::abs(alt.table->F(x) - t.F(x)) <= 1e-9 * (1.0 + t.F(x)));
    }
}

TEST_CASE("boundary CSV round trip") {
    const auto& sol = fig2();
    std::stringstream ss;
    io::write_boundary_csv(ss, sol);
    const std::string text = ss.str();
    CHECK(text.rfind("# boundary-table v1\n", 0) == 0);
    CHECK(text.find("\nx,F\n") != std::string::npos);
    const auto back = io::read_boundary_csv(ss, sol.params, sol.quad);
    const auto& t = *sol.table;
    CHECK(back.nodes().size() == t.nodes().size());
    for (double y : {0.01, 0.7, 3.0, 30.0}) CHECK(back.inverse(y) == doctest::Approx(t.inverse(y)).epsilon(1e-13));

    std::istringstream bad("# boundary-table v1\nx,F\n1,2\n");
    CHECK_THROWS_AS(io::read_boundary_csv(bad, sol.params, sol.quad), ConfigError);
}

TEST_CASE("comparative statics against reference roots") {
    for (const auto& s : golden::sweep_points) {
        auto p = golden::ou_params();
        if (s.parameter == 'a') p.a = s.value;
        if (s.parameter == 's') p.sigma = s.value;
        if (s.parameter == 'b') p.b = s.value;
        const auto pr = boundary::critical_prices(p);
        INFO(s.parameter << " = " << s.value);
        CHECK(std::abs(pr.x0 - s.x0) < 1e-11);
        CHECK(std::abs(pr.x_inf - s.x_inf) < 1e-11);
    }
}
