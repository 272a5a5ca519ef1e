#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "extraction/boundary.hpp"

namespace extraction::oracle {

using boundary::Solution;

/// Truncated (x, y) grid of the discrete variational inequality.
struct GridSpec {
    double x_lo = -0.35;
    double x_hi = 2.1;
    int nx = 400;
    double y_max = 3.0;
    int ny = 60;
    double tol = 1e-12;   // policy-iteration stopping tolerance (sup norm of the update)
    int max_sweeps = 1000;  // policy iterations per row

    double dx() const { return (x_hi - x_lo) / (nx - 1); }
    double dy() const { return y_max / (ny - 1); }

    /// Throws ConfigError unless x_lo < G_lo - 1 < G_hi + 1 < x_hi and
    /// alpha dy >= dx, where [G_lo, G_hi] is [x_inf, x0] or x_star.
    void validate(const Solution& sol) const;
};

/// Grid ranges used by the CLI and tests: about 1.1 below x_inf (x_star)
/// and 1.1 above x0 (x_star), y_max = 3.
GridSpec default_grid(const Solution& sol, int nx, int ny);

struct QVIGrid {
    GridSpec spec;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> w;            // row-major, index j * nx + i
    std::vector<std::uint8_t> active;  // 1 where the extraction branch binds
    std::vector<double> margin;        // (w - E) - (rho - L_h) w; negative where active
    int max_iterations = 0;           // largest policy-iteration count over rows
    double max_residual = 0.0;        // max |min{(rho - L_h)w, w - E}| after convergence
    bool monotone_stencil = false;    // off-diagonals <= 0, diagonal dominant

    double at(int i, int j) const { return w[static_cast<std::size_t>(j) * x.size() + i]; }
    bool is_active(int i, int j) const { return active[static_cast<std::size_t>(j) * x.size() + i] != 0; }
    double margin_at(int i, int j) const { return margin[static_cast<std::size_t>(j) * x.size() + i]; }
};

/// Row-by-row solution of min{(rho - L_h) w, w - E} = 0 with
/// E_i = w(x_i - alpha dy, y_{j-1}) + (x_i - c) dy - alpha dy^2 / 2 and an
/// upwind finite-difference generator, by Howard policy iteration. The
/// end columns take the analytic value; row 0 is zero.
/// Throws NumericError if a row does not converge within max_sweeps.
QVIGrid solve_qvi(const Solution& sol, const GridSpec& g);

struct Discrepancy {
    std::size_t interior_nodes = 0;
    double sup_norm = 0.0;  // max |w_grid - w| / (1 + |w|) over interior nodes
    double sup_waiting = 0.0;
    double sup_sell1 = 0.0;
    double sup_sell2 = 0.0;
    double mean_abs = 0.0;
    double max_boundary_cells = 0.0;   // |lower edge of the active set - G(y_j)| / dx, worst row;
                                       // the edge is the interpolated zero of the switching margin
    double mean_boundary_cells = 0.0;
};

/// Oracle grid against the analytic value.
Discrepancy compare(const QVIGrid& grid, const Solution& sol);
/// Two grids of identical shape against each other.
Discrepancy compare(const QVIGrid& a, const QVIGrid& b);

/// Discrete checks after convergence: nonnegative, nondecreasing in y, both
/// members of the discrete inequality with the right signs.
struct GridInvariants {
    bool nonnegative = true;
    bool monotone_in_y = true;
    bool hjb_signs = true;
    bool monotone_stencil = true;
    bool ok() const { return nonnegative && monotone_in_y && hjb_signs && monotone_stencil; }
};
GridInvariants check_invariants(const QVIGrid& grid, const Solution& sol, double tol = 1e-9);

/// `x,y,value,active` rows with a versioned comment header.
void write_grid_csv(std::ostream& out, const QVIGrid& grid);

}  // namespace extraction::oracle
