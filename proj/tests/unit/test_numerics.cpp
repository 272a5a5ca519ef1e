#include <doctest.h>

#include <cmath>
#include <numbers>

#include "extraction/errors.hpp"
#include "extraction/params.hpp"
#include "extraction/quadrature.hpp"
#include "extraction/roots.hpp"

using namespace extraction;

TEST_CASE("Gauss-Kronrod integrates smooth functions to tolerance") {
    const auto r = quadrature::integrate([](double x) { return std::exp(-x * x); }, -6.0, 6.0, 1e-13, 0.0, 200);
    CHECK(r.converged);
    CHECK(std::abs(r.value[0] - std::sqrt(std::numbers::pi)) < 1e-12);

    const auto s = quadrature::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-12, 0.0, 50);
    CHECK(std::abs(s.value[0] - 2.0) < 1e-12);
}

TEST_CASE("vector integrands share one partition") {
    const std::array<double, 3> bp{0.0, 0.5, 1.0};
    auto f = [](double x) { return quadrature::Vec<2>{x * x, std::sqrt(x)}; };
    const auto r = quadrature::integrate<2>(f, bp, 1e-10, 0.0, 400);
    CHECK(r.converged);
    CHECK(r.value[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(r.value[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("interval budget exhaustion is reported") {
    const auto r = quadrature::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-15, 0.0, 4);
    CHECK_FALSE(r.converged);
    CHECK(r.intervals == 4);
}

TEST_CASE("bracketed root finding") {
    const auto r = roots::solve_bracketed([](double x) { return x * x * x - 2.0; }, 0.0, 2.0);
    CHECK(r.converged);
    CHECK(std::abs(r.x - std::cbrt(2.0)) < 1e-14);

    const auto e = roots::solve_bracketed([](double x) { return std::exp(x) - 10.0; }, -5.0, 10.0);
    CHECK(std::abs(e.x - std::log(10.0)) < 1e-13);
}

TEST_CASE("root finding rejects a bracket without a sign change") {
    CHECK_THROWS_AS(roots::solve_bracketed([](double x) { return x * x + 1.0; }, -1.0, 1.0), NumericError);
}

TEST_CASE("upward bracket expansion") {
    auto f = [](double x) { return x - 37.5; };
    const auto b = roots::expand_upward(f, 0.0, 1.0);
    CHECK(b.f_lo < 0.0);
    CHECK(b.f_hi >= 0.0);
    CHECK(b.lo <= 37.5);
    CHECK(b.hi >= 37.5);
    CHECK_THROWS_AS(roots::expand_upward([](double) { return -1.0; }, 0.0, 1.0, 2.0, 10), NumericError);
}

TEST_CASE("parameter validation") {
    ModelParams p;
    CHECK_NOTHROW(p.validate());
    p.sigma = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = {};
    p.b = -1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = {};
    p.alpha = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    QuadratureSpec q;
    q.max_subdivisions = 2;
    CHECK_THROWS_AS(q.validate(), DomainError);
}
