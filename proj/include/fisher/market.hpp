#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "fisher/matrix.hpp"

namespace fisher {

// Default absolute tolerance for feasibility and clearing checks.
inline constexpr double kDefaultTolerance = 1e-8;

using PriceVector = std::vector<double>;

// x(i, j) = quantity of good j held by buyer i.
using Allocation = Matrix;

// Why a market operation failed. Carried by MarketError so callers can map
// faults to exit codes or report fields without parsing message strings.
enum class Fault {
  kDimensionMismatch,   // matrix/vector sizes disagree
  kNegativeValuation,   // v[i][j] < 0
  kNonpositiveBudget,   // B[i] <= 0
  kNonpositiveCapacity, // C[j] <= 0
  kUnsellableGood,      // some good has v[i][j] = 0 for every buyer
  kZeroUtility,         // log utility undefined for a zero-utility buyer
  kZeroPrice,           // operation requires strictly positive prices
  kNotNormalized,       // operation requires the unit-normalized form
  kGuardExceeded,       // enumeration or refinement budget blown
  kBadInput,            // malformed file, JSON, or argument
};

const char* fault_name(Fault f);

class MarketError : public std::runtime_error {
 public:
  MarketError(Fault fault, const std::string& what)
      : std::runtime_error(what), fault_(fault) {}
  Fault fault() const { return fault_; }

 private:
  Fault fault_;
};

// A Fisher market: n buyers with budgets B, m goods with capacities C, and
// per-unit valuations v (n x m). Utilities are linear unless the snob
// sensitivities `alphas` are in play (see snob.hpp).
struct MarketInstance {
  std::size_t buyers = 0;
  std::size_t goods = 0;
  Matrix valuations;              // buyers x goods
  std::vector<double> budgets;    // size buyers
  std::vector<double> capacities; // size goods
  bool divisible = true;
  std::vector<double> alphas;     // empty, or size buyers (snob markets)

  double total_budget() const {
    double s = 0.0;
    for (double b : budgets) s += b;
    return s;
  }

  bool operator==(const MarketInstance&) const = default;
};

// Checks shapes and sign constraints; throws MarketError on the first
// violation. Also rejects goods nobody values, since such a good can never
// sell at a positive price. Returns the instance unchanged for chaining.
const MarketInstance& validate_market(const MarketInstance& inst);

// Linear utility of buyer i: sum_j v[i][j] * x[i][j].
double linear_utility(const MarketInstance& inst, const Allocation& x,
                      std::size_t i);
std::vector<double> buyer_utilities(const MarketInstance& inst,
                                    const Allocation& x);

// Utilitarian welfare: sum of linear utilities.
double welfare(const MarketInstance& inst, const Allocation& x);

// Money spent by each buyer at the given prices.
std::vector<double> buyer_spend(const Allocation& x, const PriceVector& p);

// Quantity of each good handed out (column sums of x).
std::vector<double> goods_sold(const Allocation& x);

// Allocation is nonnegative and no good is oversold: sum_i x[i][j] <= C[j]
// (within tol).
bool allocation_feasible(const MarketInstance& inst, const Allocation& x,
                         double tol = kDefaultTolerance);

// Fractional-matching feasibility: allocation_feasible and every buyer
// receives exactly one unit in total (row sums = 1 within tol).
bool matching_feasible(const MarketInstance& inst, const Allocation& x,
                       double tol = kDefaultTolerance);

// Allocation is feasible and every buyer stays within budget at prices p.
bool fisher_feasible(const MarketInstance& inst, const Allocation& x,
                     const PriceVector& p, double tol = kDefaultTolerance);

// Market-clearing slack. unspent[i] = B[i] - spend_i; unsold[j] =
// C[j] - sold_j. Both are ~0 at a competitive equilibrium, except that a
// zero-priced good may legitimately go unsold.
struct ClearingResiduals {
  std::vector<double> unspent;
  std::vector<double> unsold;
};

ClearingResiduals clearing_residuals(const MarketInstance& inst,
                                     const Allocation& x,
                                     const PriceVector& p);

// True when every buyer spends their budget and every positively priced good
// sells out, within tol. Goods with p[j] <= tol are exempt from the unsold
// check (they carry no money).
bool market_clears(const MarketInstance& inst, const ClearingResiduals& r,
                   const PriceVector& p, double tol = kDefaultTolerance);

// Rescales goods to unit capacity and budgets to unit total: valuations
// become per-supply (v'[i][j] = v[i][j] * C[j]), budgets divide by sum(B).
// Equilibria map through: p'_j = p_j * C[j] / sum(B).
MarketInstance normalize_market(const MarketInstance& inst);

// True when C == 1 and sum(B) == 1 within tol.
bool is_normalized(const MarketInstance& inst, double tol = kDefaultTolerance);

// Everything a solve produces: the allocation/price pair plus the evidence
// that it is (or is not) an equilibrium.
struct EquilibriumReport {
  Allocation allocation;
  PriceVector prices;
  std::vector<double> utilities;  // per buyer
  std::vector<double> spend;      // per buyer
  std::vector<double> sold;       // per good
  ClearingResiduals residuals;
  double max_kkt_residual = 0.0;
  bool kkt_ok = false;
  bool clearing_ok = false;
  bool flow_ok = false;  // filled by the flow verifier, not the solver
  std::size_t iterations = 0;
  bool converged = false;
};

}  // namespace fisher
