#pragma once

// Bracketed scalar root finding: Illinois-modified regula falsi with a
// bisection fallback whenever the bracket fails to halve.

#include <cmath>
#include <functional>

namespace extraction::roots {

struct Root {
    double x = 0.0;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct Tolerances {
    double x_tol = 1e-14;    // absolute bracket width
    double f_tol = 0.0;      // |f| small enough to stop
    int max_iterations = 200;
};

/// Requires f(lo) and f(hi) of opposite sign (or one of them zero).
/// Throws NumericError otherwise.
Root solve_bracketed(const std::function<double(double)>& f, double lo, double hi,
                     const Tolerances& tol = {});

/// Same, reusing already computed end-point values.
Root solve_bracketed(const std::function<double(double)>& f, double lo, double hi, double f_lo,
                     double f_hi, const Tolerances& tol = {});

struct Bracket {
    double lo;
    double hi;
    double f_lo;
    double f_hi;
};

/// Starting from `lo` (where f has a known sign), moves hi = lo + step,
/// lo + step*growth, ... until f changes sign. Throws NumericError after
/// `max_expansions` attempts.
Bracket expand_upward(const std::function<double(double)>& f, double lo, double step,
                      double growth = 2.0, int max_expansions = 60);

}  // namespace extraction::roots
