#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "extraction/boundary.hpp"

namespace extraction::value {

using boundary::Region;
using boundary::Solution;
using State = std::pair<double, double>;  // (x, y)

/// Value function and its partials at one state.
struct ValuePoint {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double w_x = 0.0;
    double w_xx = 0.0;
    double w_y = 0.0;
    Region region = Region::Waiting;
};

/// A(y) = M(G(y)) and A'(y) = N(G(y)); A(0) = 0. OU branch.
double coeff_A(double y, const Solution& sol);
double coeff_A_prime(double y, const Solution& sol);
/// Upper bound of A: M(x_inf).
double coeff_A_bound(const Solution& sol);

/// Piecewise closed form on the OU branch. Boundary points use the W formula.
ValuePoint value_ou(double x, double y, const Solution& sol);
/// Three-piece closed form on the Brownian branch.
ValuePoint value_bm(double x, double y, const ModelParams& p);
/// Dispatches on the branch of `sol`.
ValuePoint evaluate(double x, double y, const Solution& sol);

/// L w - rho w from the analytic partials.
double generator(const ValuePoint& v, const ModelParams& p);
/// -alpha w_x - w_y + x - c.
double constraint(const ValuePoint& v, const ModelParams& p);

struct HJBTolerances {
    double waiting = 1e-7;             // |Lw - rho w| <= tol (1 + |w|)
    double selling_constraint = 1e-8;  // |-alpha w_x - w_y + x - c|
    double selling_generator = 1e-8;   // Lw - rho w <= tol
};

struct HJBSample {
    double x = 0.0;
    double y = 0.0;
    Region region = Region::Waiting;
    double w = 0.0;
    double generator = 0.0;
    double constraint = 0.0;
    bool pass = false;
};

struct HJBReport {
    std::vector<HJBSample> samples;
    std::size_t n_waiting = 0;
    std::size_t n_selling = 0;
    std::size_t failures = 0;
    double max_waiting_residual = 0.0;  // max |Lw - rho w| / (1 + |w|)
    double max_waiting_slack = -1e300;  // must stay < 0
    double max_selling_constraint = 0.0;
    double max_selling_generator = -1e300;  // must stay <= tol

    bool passed() const { return failures == 0; }
};

HJBReport hjb_residuals(std::span<const State> states, const Solution& sol, const HJBTolerances& tol = {});

/// Random states strictly inside one region: W within 3 price units left of
/// the boundary, S1 up to 3 units right of the depletion price, S2 between
/// the boundary and the S1 line. Deterministic in `seed`.
std::vector<State> sample_states(Region region, std::size_t count, const Solution& sol, std::uint64_t seed);

/// One-sided finite differences of (w_x, w_xx, w_y) on each side of the
/// boundary at reserve y.
struct SmoothFitSample {
    double x = 0.0;
    double y = 0.0;
    std::array<double, 3> waiting{};
    std::array<double, 3> selling{};
    double worst_gap = 0.0;  // max relative gap over the three partials
};

struct SmoothFitReport {
    std::vector<SmoothFitSample> samples;
    double worst_gap = 0.0;
    bool passed(double tol = 1e-4) const { return worst_gap <= tol; }
};

SmoothFitReport smooth_fit(std::span<const double> reserves, const Solution& sol, double h = 1e-4);

/// u = alpha w_x + w_y.
double stopping_value(double x, double y, const Solution& sol);

struct StoppingSample {
    double x = 0.0;
    double y = 0.0;
    Region region = Region::Waiting;
    double u = 0.0;
    double generator = 0.0;  // L u - rho u - alpha b A(y) psi'(x)
    double obstacle = 0.0;   // x - c - u
    bool pass = false;
};

struct StoppingReport {
    std::vector<StoppingSample> samples;
    std::size_t failures = 0;
    double worst_generator = 0.0;
    bool passed() const { return failures == 0; }
};

/// Checks max{L u - rho u - alpha b A(y) psi'(x), x - c - u} = 0 at the states:
/// generator ~ 0 and obstacle <= 0 on W, obstacle ~ 0 and generator <= 0 on S.
StoppingReport stopping_hjb(std::span<const State> states, const Solution& sol, double tol = 1e-7);

/// K = max over a reference grid of w / (y (1 + y)(1 + |x|)).
double growth_constant(const Solution& sol);
/// Largest w / (y (1+y)(1+|x|)) over the states.
double growth_ratio(std::span<const State> states, const Solution& sol);

/// chi(u) = (rho + 2b)(x_hat - u) + b psi(u) N(u), x_hat = (a + (rho+b)c)/(rho + 2b).
double chi(double u, const Solution& sol);

struct ChiDiagnostic {
    std::vector<std::pair<double, double>> samples;  // (u, chi)
    double max_value = -1e300;
    bool all_negative = false;
};

ChiDiagnostic chi_diagnostic(const Solution& sol, int points = 200);

}  // namespace extraction::value
