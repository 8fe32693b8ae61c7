#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fisher/market.hpp"

namespace fisher {

// Relative slack under which two bang-per-buck ratios count as tied.
inline constexpr double kBangTieRelTol = 1e-9;

struct SolverConfig {
  std::size_t max_iterations = 200000;
  double tolerance = kDefaultTolerance;  // KKT + clearing residual target
  double damping = 1.0;                  // fraction of each bid update applied
  // 0 starts bids proportional to valuations (the deterministic default);
  // any other value seeds a random positive start on the same support, used
  // to probe uniqueness of the equilibrium.
  std::uint64_t seed = 0;
};

// Residuals of the four optimality conditions for (allocation, prices):
//   (i)   prices nonnegative,
//   (ii)  positively priced goods sell out,
//   (iii) no good beats a buyer's realized utility rate: v[i][j]/p[j] <=
//         u_i/B_i,
//   (iv)  goods a buyer actually holds attain that rate with equality.
struct KktReport {
  double price_nonnegativity = 0.0;   // (i)  max(0, -min_j p[j])
  double priced_goods_cleared = 0.0;  // (ii) worst |sold_j - C[j]|, p[j] > 0
  double bang_per_buck_bound = 0.0;   // (iii) worst positive part; may be inf
  double allocated_tightness = 0.0;   // (iv) worst |gap| over held pairs

  double max_residual() const;
  bool pass(double tol) const { return max_residual() <= tol; }
};

// Bang-per-buck maximizers for one buyer. Goods with p[j] = 0 but positive
// value are listed separately: demand for them is the whole supply, so the
// demand set is unbounded rather than a budget-limited bundle.
struct DemandSet {
  std::vector<std::size_t> goods;       // argmax of v[i][j]/p[j], p[j] > 0
  std::vector<std::size_t> free_goods;  // p[j] = 0 with v[i][j] > 0
  double budget = 0.0;
  bool unbounded_at_zero_price = false;
};

// sum_i B[i] * log(u_i). Throws kZeroUtility when a buyer has an empty (or
// worthless) bundle: the objective is undefined there, and no -inf sentinel
// is returned.
double eg_objective(const Allocation& x, const MarketInstance& inst);

// Prices read off an allocation by splitting each buyer's budget across
// goods in proportion to utility contribution:
//   p[j] = sum_i B[i] * (v[i][j] * x[i][j] / u_i) / C[j].
// At the program's optimum these are the market-clearing prices.
PriceVector extract_prices(const Allocation& x, const MarketInstance& inst);

// Computes all four residuals. "Allocated" in (iv) means x[i][j] > tol, so
// dust below the verification tolerance cannot dominate the report. A zero
// price on a positively valued good makes (iii) infinite — reported, not
// thrown.
KktReport kkt_verify(const Allocation& x, const PriceVector& p,
                     const MarketInstance& inst,
                     double tol = kDefaultTolerance);

// Ties count within rel_tie_tol (relative) or abs_tie_tol (absolute,
// in bang-per-buck units) of the best ratio, whichever window is wider.
DemandSet demand_set(std::size_t i, const PriceVector& p,
                     const MarketInstance& inst,
                     double rel_tie_tol = kBangTieRelTol,
                     double abs_tie_tol = 0.0);

// Proportional-response solve of the underlying convex program
//   max sum_i B[i] log u_i   s.t.  sum_i x[i][j] <= C[j], x >= 0.
// Buyers repeatedly split their budget over goods in proportion to each
// good's share of their current utility; prices are the per-unit money
// landing on each good. Stops once KKT (iii)/(iv) and the clearing
// residuals all fall below cfg.tolerance, else flags converged = false
// after cfg.max_iterations. The returned report carries kkt_ok and
// clearing_ok; flow_ok stays false until the flow verifier runs.
EquilibriumReport solve_eg(const MarketInstance& inst,
                           const SolverConfig& cfg = {});

}  // namespace fisher
