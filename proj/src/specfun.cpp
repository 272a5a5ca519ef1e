#include "extraction/specfun.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "extraction/errors.hpp"
#include "extraction/quadrature.hpp"

namespace extraction::specfun {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

// Integrands are shifted by exp(-shift) where shift = max(theta, 0)^2 / 2,
// the log of the Gaussian factor's peak, so nothing overflows for large theta.
double log_shift(double th) { return th > 0.0 ? 0.5 * th * th : 0.0; }

}  // namespace

double gamma(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) {
        std::ostringstream os;
        os << "gamma: argument must be positive, got " << s;
        throw DomainError(os.str());
    }
    if (s < 0.5) return std::numbers::pi / (std::sin(std::numbers::pi * s) * gamma(1.0 - s));
    const double z = s - 1.0;
    double sum = kLanczos[0];
    for (std::size_t i = 1; i < kLanczos.size(); ++i) sum += kLanczos[i] / (z + static_cast<double>(i));
    const double t = z + kLanczosG + 0.5;
    return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * sum;
}

double PsiEval::value(int k) const { return scaled.at(static_cast<std::size_t>(k)) * std::exp(log_scale); }

double PsiEval::error(int k) const { return err_est.at(static_cast<std::size_t>(k)) * std::exp(log_scale); }

double theta(double x, const ModelParams& p) {
    return std::sqrt(2.0 * p.b) * (p.b * x - p.a) / (p.sigma * p.b);
}

PsiEval psi(double x, const ModelParams& p, const QuadratureSpec& q) {
    if (!(p.b > 0.0)) throw DomainError("psi: integral representation needs b > 0");
    const double s0 = p.rho / p.b;
    const double th = theta(x, p);
    const double shift = log_shift(th);
    const double split = q.split_point;

    using V4 = quadrature::Vec<4>;

    // [0, split]. For s0 < 1 the factor t^(s0-1) is singular; t = u^(1/s0)
    // turns t^(s0-1) dt into du / s0.
    quadrature::Result<4> lower;
    if (s0 < 1.0) {
        const double inv = 1.0 / s0;
        auto f = [=](double u) -> V4 {
            const double t = std::pow(u, inv);
            const double e = std::exp(-0.5 * t * t + th * t - shift) * inv;
            return {e, t * e, t * t * e, t * t * t * e};
        };
        const std::array<double, 2> bp{0.0, std::pow(split, s0)};
        lower = quadrature::integrate<4>(f, bp, q.rel_tol, q.abs_tol, q.max_subdivisions);
    } else {
        auto f = [=](double t) -> V4 {
            const double e = std::pow(t, s0 - 1.0) * std::exp(-0.5 * t * t + th * t - shift);
            return {e, t * e, t * t * e, t * t * t * e};
        };
        const std::array<double, 2> bp{0.0, split};
        lower = quadrature::integrate<4>(f, bp, q.rel_tol, q.abs_tol, q.max_subdivisions);
    }

    // [split, T]. T is pushed out until the order-3 integrand is e^-45 below
    // its peak; Gaussian decay bounds the discarded tail by the same factor.
    const double e3 = s0 + 2.0;
    auto log_f3 = [=](double t) { return e3 * std::log(t) - 0.5 * t * t + th * t - shift; };
    const double t_peak = 0.5 * (th + std::sqrt(th * th + 4.0 * e3));
    const double peak = log_f3(std::max(t_peak, split));
    double upper_end = std::max(t_peak, split) + 1.0;
    while (log_f3(upper_end) > peak - 45.0) upper_end += 1.0;

    std::vector<double> bp{split};
    if (t_peak > split + 0.5 && t_peak < upper_end - 0.5) bp.push_back(t_peak);
    for (double t = std::ceil(split + 1.5); t < upper_end; t += 1.5) {
        if (t > bp.back() + 0.25) bp.push_back(t);
    }
    bp.push_back(upper_end);
    auto g = [=](double t) -> V4 {
        const double e = std::exp((s0 - 1.0) * std::log(t) - 0.5 * t * t + th * t - shift);
        return {e, t * e, t * t * e, t * t * t * e};
    };
    const auto upper = quadrature::integrate<4>(g, bp, q.rel_tol, q.abs_tol, q.max_subdivisions);

    PsiEval out;
    out.x = x;
    out.log_scale = shift;
    const double inv_gamma = 1.0 / gamma(s0);
    const double dscale = std::sqrt(2.0 * p.b) / p.sigma;
    double factor = inv_gamma;
    for (std::size_t k = 0; k < 4; ++k) {
        out.scaled[k] = factor * (lower.value[k] + upper.value[k]);
        out.err_est[k] = factor * (lower.error[k] + upper.error[k]);
        factor *= dscale;
    }
    if (!lower.converged || !upper.converged) {
        std::ostringstream os;
        os << "psi: quadrature did not converge at x = " << x << " (theta = " << th
           << ") within " << q.max_subdivisions << " subdivisions";
        throw NumericError(os.str(), out.value(0));
    }
    return out;
}

double psi_k(double x, int k, const ModelParams& p, const QuadratureSpec& q) {
    if (k < 0 || k > 3) throw DomainError("psi_k: derivative order must be in 0..3");
    return psi(x, p, q).value(k);
}

double characteristic_b(double u, const ModelParams& p) {
    return 0.5 * p.sigma * p.sigma * u * u + p.a * u - p.rho;
}

double exponent_n(const ModelParams& p) {
    const double s2 = p.sigma * p.sigma;
    const double m = p.a / s2;
    const double r = std::sqrt(m * m + 2.0 * p.rho / s2);
    // the two algebraically equal forms avoid cancellation for either sign of a
    return m > 0.0 ? (2.0 * p.rho / s2) / (m + r) : r - m;
}

double psi_bm(double x, const ModelParams& p) { return std::exp(exponent_n(p) * x); }

double psi_bm_derivative(double x, int k, const ModelParams& p) {
    const double n = exponent_n(p);
    return std::pow(n, k) * std::exp(n * x);
}

double psi_partial_a(double x, int k, const ModelParams& p, const QuadratureSpec& q) {
    if (k < 0 || k > 2) throw DomainError("psi_partial_a: order must be in 0..2");
    return -psi(x, p, q).value(k + 1) / p.b;
}

double psi_partial_sigma(double x, int k, const ModelParams& p, const QuadratureSpec& q) {
    if (k < 0 || k > 2) throw DomainError("psi_partial_sigma: order must be in 0..2");
    const PsiEval e = psi(x, p, q);
    return (p.a - p.b * x) / (p.b * p.sigma) * e.value(k + 1) - k / p.sigma * e.value(k);
}

}  // namespace extraction::specfun
