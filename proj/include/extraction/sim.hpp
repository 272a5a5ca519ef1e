#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "extraction/boundary.hpp"

namespace extraction::sim {

using boundary::Solution;

enum class PolicyKind { OptimalOU, OptimalBM, ShiftedBoundary, NoExtraction, ImmediateDepletion };

struct Policy {
    PolicyKind kind = PolicyKind::OptimalOU;
    double shift = 0.0;  // ShiftedBoundary only: boundary translated by +shift in price

    static Policy optimal(const Solution& sol);
    static Policy shifted(double dx) { return {PolicyKind::ShiftedBoundary, dx}; }
    std::string name() const;
};

struct SimConfig {
    double h = 1e-3;               // time step
    double horizon = 0.0;          // truncation time T; 0 selects 10/rho
    std::size_t n_paths = 10000;
    std::uint64_t base_seed = 20240601;
    Policy policy;
    unsigned threads = 1;          // worker threads; results do not depend on it
    bool bridge_correction = true; // stopping simulation: Brownian-bridge crossing test
    bool reflection_correction = true;  // reflect at the boundary lowered by reflection_offset

    /// Throws ConfigError.
    void validate() const;
    double resolved_horizon(double rho) const { return horizon > 0.0 ? horizon : 10.0 / rho; }
};

struct SimResult {
    std::string policy;
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    double initial_jump = 0.0;
    double depleted_fraction = 0.0;
    double tail_bound = 0.0;  // e^{-rho T} * mean growth bound of the value at (X_T, Y_T)
    double horizon = 0.0;
    double h = 0.0;
    std::uint64_t base_seed = 0;
};

/// beta sigma sqrt(h) with beta = -zeta(1/2)/sqrt(2 pi) ~ 0.5826: the level
/// by which reflection at grid times overshoots continuous reflection.
double reflection_offset(double sigma, double h);

/// Lump extraction at t = 0: 0 on W, y on S1, z(x, y) on S2.
double initial_jump(double x, double y, const Solution& sol);

/// Same for a boundary translated by `shift` (constant x_star + shift on
/// the Brownian branch).
double push_amount(double x, double y, const Solution& sol, double shift);

/// Seed of the RNG stream of one path.
std::uint64_t path_seed(std::uint64_t base_seed, std::uint64_t path_index);

/// Monte Carlo estimate of the discounted payoff of cfg.policy from (x, y).
/// If `per_path` is given it receives the payoff of every path, in path order.
SimResult simulate_payoff(double x, double y, const Solution& sol, const SimConfig& cfg,
                          std::vector<double>* per_path = nullptr);

/// xi_t = y ^ sup_{s<=t} (1/alpha)[x - level + a s + sigma W_s]^+ on the grid
/// t_k = k h, where dW holds the Brownian increments. Element 0 is the
/// initial jump; the result has dW.size() + 1 entries.
std::vector<double> running_max_policy_bm(double x, double y, const ModelParams& p, double level,
                                          std::span<const double> dW, double h);

struct DominanceRow {
    std::string policy;
    double shift = 0.0;
    double mean = 0.0;
    double paired_diff = 0.0;  // mean of (optimal - alternative)
    double paired_se = 0.0;
    bool pass = false;
};

struct DominanceReport {
    double x = 0.0;
    double y = 0.0;
    SimResult optimal;
    std::vector<DominanceRow> rows;
    bool passed() const;
};

/// Paired-seed comparison of the optimal policy against each boundary shift
/// and against immediate depletion. A row passes when the optimal mean is
/// not below the alternative by more than 2 paired standard errors; from a
/// waiting-region start immediate depletion must be worse by more than that.
/// `optimal_payoffs` may carry per-path payoffs of an earlier optimal run
/// with the same cfg.
DominanceReport dominance_test(double x, double y, const Solution& sol, const SimConfig& cfg,
                               std::span<const double> shifts,
                               const std::vector<double>* optimal_payoffs = nullptr);

/// Monte Carlo of the stopping representation of u = alpha w_x + w_y:
/// payoff e^{-rho tau}(X_tau - c) - int_0^tau e^{-rho s} alpha b A(y) psi'(X_s) ds
/// for the uncontrolled price and tau the first passage above G(y).
SimResult simulate_stopping(double x, double y, const Solution& sol, const SimConfig& cfg);

/// Writes `path,t,X,Y,xi` rows for the first cfg.n_paths paths (at most 16),
/// one row every `stride` steps.
void write_trace(std::ostream& out, double x, double y, const Solution& sol, const SimConfig& cfg,
                 int stride = 1);

}  // namespace extraction::sim
