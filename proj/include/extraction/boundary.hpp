#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "extraction/params.hpp"
#include "extraction/specfun.hpp"

namespace extraction::boundary {

enum class Branch { Brownian, OrnsteinUhlenbeck };

/// Critical price levels of a solved instance. Fields of the other branch
/// are NaN.
struct CriticalPrices {
    Branch branch = Branch::OrnsteinUhlenbeck;
    double n = 0.0;       // Brownian: exponent of psi
    double x_star = 0.0;  // Brownian: constant free boundary c + 1/n
    double x0 = 0.0;      // OU: boundary at zero reserve, (x-c)psi' = psi
    double x_inf = 0.0;   // OU: asymptote, (x-c)psi'' = psi'
    double x_bar = 0.0;   // OU: (a + rho c)/(rho + b), always below x0

    /// Price at which a vanishing reserve is sold: x0 or x_star.
    double depletion_price() const { return branch == Branch::Brownian ? x_star : x0; }
};

double find_x0(const ModelParams& p, const QuadratureSpec& q = {});
double find_x_inf(const ModelParams& p, const QuadratureSpec& q = {});
double x_bar(const ModelParams& p);
double x_star_bm(const ModelParams& p);

/// Solves the branch selected by p.b and checks c < x_inf < x0, x_bar < x0.
CriticalPrices critical_prices(const ModelParams& p, const QuadratureSpec& q = {});

/// M(x) = ((x-c)psi' - psi) / (alpha (psi'^2 - psi'' psi)); A(y) = M(F^-1(y)).
double coefficient_at_price(const specfun::PsiEval& e, const ModelParams& p);
/// N(x) = ((x-c)psi'' - psi') / (psi'' psi - psi'^2); A'(y) = N(F^-1(y)).
double coefficient_slope_at_price(const specfun::PsiEval& e, const ModelParams& p);

/// Theta(z) = -F'(z), positive on (x_inf, x0). Throws DomainError for
/// z <= x_inf.
double boundary_integrand(double z, const ModelParams& p, const QuadratureSpec& q, double x_inf);
double boundary_integrand(const specfun::PsiEval& e, const ModelParams& p);

/// Node placement for the F table: octaves x_inf + (x0-x_inf) 2^-j down to
/// min_offset*(x0-x_inf), each split into nodes_per_octave log-uniform cells.
struct Grading {
    int nodes_per_octave = 32;
    double min_offset = 1e-6;
    double rel_tol = 1e-12;  // per-cell quadrature tolerance
};

/// Tabulated free boundary y = F(x) on (x_inf, x0].
///
/// Interpolation is cubic Hermite in s = log(x - x_inf) using exact slopes
/// dF/ds = -Theta(x) (x - x_inf), with Fritsch-Carlson limiting so the
/// interpolant stays strictly decreasing. Left of the first node F follows
/// the log-singularity tail F(x) = F_0 + C log((x_0 - x_inf)/(x - x_inf)).
class BoundaryTable {
public:
    BoundaryTable() = default;
    BoundaryTable(double x_inf, double x0, std::vector<double> nodes, std::vector<double> f_values,
                  std::vector<double> log_slopes);

    double x_inf() const { return x_inf_; }
    double x0() const { return x0_; }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> f_values() const { return f_; }
    /// dF/ds at the nodes, s = log(x - x_inf).
    std::span<const double> log_slopes() const { return m_; }
    /// C of the tail model.
    double tail_coefficient() const { return -m_.front(); }

    static constexpr const char* interpolation() { return "cubic-hermite-log-offset"; }
    static constexpr const char* tail_model() { return "log-singularity"; }

    /// F(x), x in (x_inf, x0]. Throws DomainError outside.
    double F(double x) const;
    /// F'(x).
    double derivative(double x) const;
    /// Unique x in (x_inf, x0] with F(x) = y; y >= 0.
    double inverse(double y) const;

    /// Throws NumericError if nodes are not increasing, F is not strictly
    /// decreasing or F(x0) != 0.
    void check_invariants() const;

private:
    struct Cell {
        double s_lo, s_hi, f_lo, f_hi, m_lo, m_hi;
    };
    std::size_t cell_for_s(double s) const;
    double eval_cell(std::size_t i, double s, double* dfds) const;

    double x_inf_ = 0.0;
    double x0_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> f_;
    std::vector<double> m_;
    std::vector<double> s_;
    std::vector<double> m_left_;   // limited slopes per cell
    std::vector<double> m_right_;
};

/// Integrates Theta from each node to x0 (adaptive Gauss-Kronrod in s).
BoundaryTable build_F(const ModelParams& p, const QuadratureSpec& q, const CriticalPrices& prices,
                      const Grading& grading = {});

/// Recomputes the exact node slopes for tables read back from disk.
BoundaryTable rebuild_from_nodes(const ModelParams& p, const QuadratureSpec& q, double x_inf,
                                 double x0, std::vector<double> nodes, std::vector<double> f_values);

double F_inverse(double y, const BoundaryTable& table);

/// Lump extraction z with y - z = F(x - alpha z - shift), i.e. the amount that
/// moves (x, y) along (-alpha, -1) onto the boundary translated right by
/// `shift`. Requires x > G(y) + shift and y > (x - shift - x0)/alpha.
/// `guess` (post-push price before shift) speeds up repeated calls.
double solve_push(double x, double y, double alpha, const BoundaryTable& table, double shift = 0.0,
                  std::optional<double> guess = std::nullopt);

enum class Region { Waiting, Sell1, Sell2, Boundary };
const char* to_string(Region r);

/// A solved instance: parameters, critical prices and (OU) the F table.
struct Solution {
    ModelParams params;
    QuadratureSpec quad;
    CriticalPrices prices;
    std::optional<BoundaryTable> table;

    bool brownian() const { return prices.branch == Branch::Brownian; }
    /// G(y) = F^-1(y), or x_star on the Brownian branch.
    double boundary_price(double y) const;
};

Solution solve(const ModelParams& p, const QuadratureSpec& q = {}, const Grading& grading = {});

/// z(x, y) on S2 (OU). Throws DomainError if (x, y) is not in S2.
double solve_z(double x, double y, const Solution& sol);

/// Waiting for y == 0 or x < G(y); Boundary when x == G(y) up to 1e-12
/// relative; otherwise Sell1 if y <= (x - x0)/alpha, else Sell2.
Region classify(double x, double y, const Solution& sol);

}  // namespace extraction::boundary
