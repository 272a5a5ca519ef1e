#include "extraction/roots.hpp"

#include <cmath>
#include <sstream>

#include "extraction/errors.hpp"

namespace extraction::roots {

Root solve_bracketed(const std::function<double(double)>& f, double lo, double hi,
                     const Tolerances& tol) {
    return solve_bracketed(f, lo, hi, f(lo), f(hi), tol);
}

Root solve_bracketed(const std::function<double(double)>& f, double lo, double hi, double f_lo,
                     double f_hi, const Tolerances& tol) {
    if (f_lo == 0.0) return {lo, 0.0, 0, true};
    if (f_hi == 0.0) return {hi, 0.0, 0, true};
    if (!(std::isfinite(f_lo) && std::isfinite(f_hi)) || std::signbit(f_lo) == std::signbit(f_hi)) {
        std::ostringstream os;
        os << "root not bracketed on [" << lo << ", " << hi << "]: f = " << f_lo << ", " << f_hi;
        throw NumericError(os.str(), 0.5 * (lo + hi));
    }

    // Illinois: the retained end point gets its value halved when the same
    // side is kept twice in a row.
    int side = 0;
    double width = hi - lo;
    Root r;
    for (int it = 1; it <= tol.max_iterations; ++it) {
        double x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if (!(x > lo && x < hi) || (it % 4 == 0 && hi - lo > 0.5 * width)) {
            x = 0.5 * (lo + hi);
            width = hi - lo;
        }
        const double fx = f(x);
        r = {x, fx, it, false};
        if (fx == 0.0 || std::abs(fx) <= tol.f_tol) {
            r.converged = true;
            return r;
        }
        if (std::signbit(fx) == std::signbit(f_lo)) {
            lo = x;
            f_lo = fx;
            if (side == -1) f_hi *= 0.5;
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if (side == +1) f_lo *= 0.5;
            side = +1;
        }
        if (hi - lo <= tol.x_tol) {
            r.converged = true;
            return r;
        }
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) {  // bracket is two adjacent doubles
            r.converged = true;
            return r;
        }
    }
    std::ostringstream os;
    os << "root finder did not converge in " << tol.max_iterations
       << " iterations, bracket [" << lo << ", " << hi << "]";
    throw NumericError(os.str(), r.x);
}

Bracket expand_upward(const std::function<double(double)>& f, double lo, double step,
                      double growth, int max_expansions) {
    double f_lo = f(lo);
    double hi = lo + step;
    for (int i = 0; i < max_expansions; ++i) {
        const double f_hi = f(hi);
        if (std::isfinite(f_hi) && std::signbit(f_hi) != std::signbit(f_lo))
            return {lo, hi, f_lo, f_hi};
        if (std::isfinite(f_hi)) {
            lo = hi;
            f_lo = f_hi;
        }
        step *= growth;
        hi = lo + step;
    }
    std::ostringstream os;
    os << "no sign change found above " << lo << " after " << max_expansions << " expansions";
    throw NumericError(os.str(), hi);
}

}  // namespace extraction::roots
