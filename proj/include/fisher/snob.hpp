#pragma once

#include <cstddef>
#include <vector>

#include "fisher/market.hpp"

namespace fisher {

// Snob-effect market: buyer i's taste for a good is dampened by how much of
// it everyone else holds, with per-buyer sensitivity alpha_i >= 0.
struct SnobMarket {
  MarketInstance market;
  std::vector<double> alphas;  // size n; 0 = ordinary linear tastes
};

// Builds a SnobMarket from an instance, taking alphas from the instance or
// defaulting them to zero.
SnobMarket snob_from_instance(const MarketInstance& inst);

// Denominator used in the ownership share x[i][j] / (total of good j):
// the total actually allocated (as the objective is written), or the
// capacity C[j] — the two coincide exactly under full clearing.
enum class ShareBasis { kAllocatedTotal, kCapacity };

// Crude snob utility: sum over goods of buyer i's ownership share
// x[i][j] / sum_k x[k][j]; a good nobody holds contributes 0.
double snob_share_utility(const Allocation& x, std::size_t i);

// U_i = sum_j x[i][j] * v[i][j] * (x[i][j] / sum_k x[k][j])^alpha_i.
// Conventions: 0^0 = 1 and empty-column terms are 0, so alpha_i = 0
// recovers linear utility exactly.
double snob_utility(const SnobMarket& snob, const Allocation& x,
                    std::size_t i,
                    ShareBasis basis = ShareBasis::kAllocatedTotal);

// Planner objective: sum_i snob_utility.
double snob_objective(const SnobMarket& snob, const Allocation& x,
                      ShareBasis basis = ShareBasis::kAllocatedTotal);

struct SnobOptimum {
  Allocation allocation;
  double value = 0.0;
};

// Exhaustive grid search over feasible allocations: each x[i][j] ranges over
// grid_points equispaced values in [0, C[j]], keeping points that respect
// budgets (p . x_i <= B_i) and capacities (column sums <= C_j). Returns the
// lexicographically smallest argmax. Guard: grid_points^(n*m) <= 1e8.
SnobOptimum brute_force_snob_optimum(
    const SnobMarket& snob, const PriceVector& prices, unsigned grid_points,
    ShareBasis basis = ShareBasis::kAllocatedTotal);

// Reproduces the one-good, two-buyer, unit-everything, alpha = 1 market
// whose planner optimum hands the whole good to a single buyer. Verdict
// checks, on the given grid: maximizer within one grid cell of (1,0) or
// (0,1); maximum value 1 within 1e-9; every grid point with both holdings
// positive stays below 1 - 1e-9.
struct CornerCheck {
  bool pass = false;
  double max_value = 0.0;
  double first_holding = 0.0;   // maximizing allocation of buyer 1
  double second_holding = 0.0;  // and buyer 2
  double best_interior = 0.0;   // largest value over strictly mixed points
};
CornerCheck corner_theorem_check(unsigned grid_points);

// One price vector's worth of exploratory output: buyers' mutual grid
// best responses and how far the result is from clearing.
struct ClearingCandidate {
  PriceVector prices;
  Allocation allocation;
  ClearingResiduals residuals;
  double residual_norm = 0.0;  // Euclidean, over unspent and unsold jointly
};

// Probes whether any grid price vector admits (near-)clearing snob demands.
// Prices range over the scaled simplex sum_j p[j]C[j] = sum_i B[i] in
// price_resolution money steps. At each price vector, buyers repeatedly
// best-respond on an alloc_grid-points-per-axis bundle grid (budget-capped,
// rivals' holdings fixed, buyer order round-robin) until the responses
// stabilize or 50 sweeps pass. Candidates come back sorted by residual
// norm, then by price lexicographically; purely exploratory — a small
// residual is data, not an existence claim.
std::vector<ClearingCandidate> snob_clearing_search(
    const SnobMarket& snob, unsigned price_resolution, unsigned alloc_grid,
    ShareBasis basis = ShareBasis::kAllocatedTotal);

}  // namespace fisher
