#pragma once

#include <array>

#include "extraction/params.hpp"

namespace extraction::specfun {

/// Euler's Gamma function, Lanczos approximation (g = 7, 9 terms), about
/// 15 significant digits. Throws DomainError for s <= 0.
double gamma(double s);

/// psi and its first three derivatives at one price.
///
/// Values are stored as scaled[k] * exp(log_scale) so that ratios stay
/// finite when psi itself overflows a double.
struct PsiEval {
    double x = 0.0;
    double log_scale = 0.0;
    std::array<double, 4> scaled{};
    std::array<double, 4> err_est{};  // absolute, same scaling as `scaled`

    double value(int k) const;
    double error(int k) const;
    /// psi^(k) / psi^(j), computed without the common exponent.
    double ratio(int k, int j) const { return scaled[k] / scaled[j]; }
};

/// Increasing fundamental solution of (L - rho)u = 0 for the OU generator and
/// its derivatives 0..3, from
///   psi^(k)(x) = (sqrt(2b)/sigma)^k / Gamma(rho/b)
///                * int_0^inf t^(rho/b + k - 1) exp(-t^2/2 + t*theta(x)) dt,
///   theta(x) = sqrt(2b) (b x - a) / (sigma b).
/// Requires b > 0. Throws NumericError when the quadrature does not reach
/// the requested tolerance.
PsiEval psi(double x, const ModelParams& p, const QuadratureSpec& q = {});

/// Single derivative order k in {0,1,2,3}.
double psi_k(double x, int k, const ModelParams& p, const QuadratureSpec& q = {});

/// theta(x) above.
double theta(double x, const ModelParams& p);

/// Brownian branch (b == 0): psi(x) = exp(n x) with n the positive root of
/// (sigma^2/2) n^2 + a n - rho = 0.
double exponent_n(const ModelParams& p);
double characteristic_b(double u, const ModelParams& p);
double psi_bm(double x, const ModelParams& p);
double psi_bm_derivative(double x, int k, const ModelParams& p);

/// Parameter sensitivities of psi^(k), k in {0,1,2}:
///   d/da     psi^(k) = -psi^(k+1) / b
///   d/dsigma psi^(k) = (a - b x)/(b sigma) psi^(k+1) - (k/sigma) psi^(k)
double psi_partial_a(double x, int k, const ModelParams& p, const QuadratureSpec& q = {});
double psi_partial_sigma(double x, int k, const ModelParams& p, const QuadratureSpec& q = {});

}  // namespace extraction::specfun
