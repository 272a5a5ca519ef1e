#pragma once

#include <string>

namespace extraction {

/// Market constants of one problem instance.
///
/// The uncontrolled price follows dX = (a - bX)dt + sigma dW. Each unit
/// extracted costs c and lowers the price by alpha. Profits are discounted
/// at rate rho. b == 0 selects the drifted Brownian branch, b > 0 the
/// Ornstein-Uhlenbeck branch.
struct ModelParams {
    double a = 0.4;
    double b = 1.0;
    double sigma = 0.8;
    double rho = 0.375;
    double c = 0.3;
    double alpha = 0.25;

    /// Throws DomainError if any constraint is violated.
    void validate() const;

    bool brownian() const noexcept { return b == 0.0; }

    std::string describe() const;
};

/// Accuracy controls for the integral representation of psi.
struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-300;
    int max_subdivisions = 400;
    double split_point = 1.0;

    void validate() const;
};

}  // namespace extraction
