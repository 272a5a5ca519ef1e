#pragma once

// Globally adaptive Gauss-Kronrod (10/21 point) integration of vector-valued
// integrands over a finite interval. All components share one partition.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace extraction::quadrature {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct Result {
    Vec<N> value{};
    Vec<N> error{};
    int intervals = 0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 11> kNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};

inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208015536761, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <std::size_t N>
struct Panel {
    double lo;
    double hi;
    Vec<N> value;
    Vec<N> error;
};

template <std::size_t N, class F>
Panel<N> gauss_kronrod21(F& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    Vec<N> kronrod{};
    Vec<N> gauss{};
    const Vec<N> fc = f(center);
    for (std::size_t k = 0; k < N; ++k) kronrod[k] = fc[k] * kKronrodWeights[10];
    for (std::size_t j = 0; j < 10; ++j) {
        const double dx = half * kNodes[j];
        const Vec<N> f1 = f(center - dx);
        const Vec<N> f2 = f(center + dx);
        for (std::size_t k = 0; k < N; ++k) {
            const double sum = f1[k] + f2[k];
            kronrod[k] += kKronrodWeights[j] * sum;
            if (j % 2 == 1) gauss[k] += kGaussWeights[j / 2] * sum;
        }
    }
    Panel<N> p{lo, hi, {}, {}};
    for (std::size_t k = 0; k < N; ++k) {
        p.value[k] = kronrod[k] * half;
        p.error[k] = std::abs((kronrod[k] - gauss[k]) * half);
    }
    return p;
}

}  // namespace detail

/// Integrates f over the partition given by `breakpoints` (at least two,
/// increasing). Refinement stops once every component satisfies
/// error <= max(abs_tol, rel_tol * |value|) or `max_intervals` is reached
/// (converged == false, value holds the partial estimate).
template <std::size_t N, class F>
Result<N> integrate(F&& f, std::span<const double> breakpoints, double rel_tol,
                    double abs_tol, int max_intervals) {
    std::vector<detail::Panel<N>> panels;
    panels.reserve(static_cast<std::size_t>(std::max<int>(max_intervals, 2)));
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        if (breakpoints[i + 1] > breakpoints[i])
            panels.push_back(detail::gauss_kronrod21<N>(f, breakpoints[i], breakpoints[i + 1]));
    }

    Result<N> out;
    for (;;) {
        out.value.fill(0.0);
        out.error.fill(0.0);
        for (const auto& p : panels) {
            for (std::size_t k = 0; k < N; ++k) {
                out.value[k] += p.value[k];
                out.error[k] += p.error[k];
            }
        }
        out.intervals = static_cast<int>(panels.size());

        Vec<N> budget{};
        bool done = true;
        for (std::size_t k = 0; k < N; ++k) {
            budget[k] = std::max(abs_tol, rel_tol * std::abs(out.value[k]));
            if (!(out.error[k] <= budget[k])) done = false;
        }
        if (done) {
            out.converged = true;
            return out;
        }
        if (static_cast<int>(panels.size()) >= max_intervals) return out;

        std::size_t worst = 0;
        double worst_ratio = -1.0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            double r = 0.0;
            for (std::size_t k = 0; k < N; ++k)
                r = std::max(r, panels[i].error[k] / budget[k]);
            if (r > worst_ratio) {
                worst_ratio = r;
                worst = i;
            }
        }
        const double lo = panels[worst].lo;
        const double hi = panels[worst].hi;
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) return out;  // interval exhausted in floating point
        panels[worst] = detail::gauss_kronrod21<N>(f, lo, mid);
        panels.push_back(detail::gauss_kronrod21<N>(f, mid, hi));
    }
}

/// Scalar convenience overload over [lo, hi].
template <class F>
Result<1> integrate(F&& f, double lo, double hi, double rel_tol, double abs_tol,
                    int max_intervals) {
    const std::array<double, 2> bp{lo, hi};
    auto g = [&f](double x) { return Vec<1>{f(x)}; };
    return integrate<1>(g, bp, rel_tol, abs_tol, max_intervals);
}

}  // namespace extraction::quadrature
