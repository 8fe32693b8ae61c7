#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fisher/market.hpp"

namespace fisher {

// Integral allocation of integral goods: x(i, j) whole units of good j to
// buyer i.
struct DiscreteAllocation {
  std::size_t buyers = 0;
  std::size_t goods = 0;
  std::vector<int> units;  // row-major, buyers x goods

  DiscreteAllocation() = default;
  DiscreteAllocation(std::size_t n, std::size_t m)
      : buyers(n), goods(m), units(n * m, 0) {}

  int& at(std::size_t i, std::size_t j) { return units[i * goods + j]; }
  int at(std::size_t i, std::size_t j) const { return units[i * goods + j]; }

  int col_sum(std::size_t j) const {
    int s = 0;
    for (std::size_t i = 0; i < buyers; ++i) s += at(i, j);
    return s;
  }

  Matrix as_matrix() const {
    Matrix m(buyers, goods);
    for (std::size_t i = 0; i < buyers; ++i)
      for (std::size_t j = 0; j < goods; ++j) m(i, j) = at(i, j);
    return m;
  }

  friend bool operator==(const DiscreteAllocation&,
                         const DiscreteAllocation&) = default;
};

// Whether at least a (1 - eps) fraction of every good is allocated and none
// is oversold:  (1 - eps) * C[j] <= sum_i x[i][j] <= C[j].
// The lower bound is evaluated as C[j] - sold <= eps * C[j], which is exact
// for integral data where the literal (1 - eps) * C[j] product can round the
// wrong way (e.g. C = 10, eps = 0.1, sold = 9).
// Requires 0 <= eps < 1.
bool epsilon_clearing(const DiscreteAllocation& alloc,
                      const MarketInstance& inst, double eps);

struct CeeiWitness {
  PriceVector prices;
  DiscreteAllocation allocation;
};

// A none-witness only says no CE was found on THIS grid, never that none
// exists.
struct CeeiSearchResult {
  std::optional<CeeiWitness> witness;
  unsigned resolution = 0;
  unsigned long long allocations_tried = 0;
};

// Exhaustive competitive-equilibrium search for a tiny indivisible market
// with equal incomes. Candidate prices live on the scaled simplex
// sum_j p[j] * C[j] = sum_i B[i] (full spend equals full sale pins the total
// price mass), discretized into `resolution` money steps. For each fully
// sold integral allocation, in lexicographic order (good-by-good column
// compositions), every grid price vector is tested for:
//   (a) each buyer's bundle maximizes linear utility among all integral
//       bundles costing at most B[i] + grid_tol,
//   (b) |spend_i - B[i]| <= grid_tol for every buyer,
//   (c) every good fully sold (built into the enumeration),
// where grid_tol = sum(B) / resolution, one money step.
//
// Errors: unequal budgets, non-integral capacities, divisible instances,
// and blowing the enumeration guard prod_j (C[j]+1)^n <= 1e7.
CeeiSearchResult ceei_exists_bruteforce(const MarketInstance& inst,
                                        unsigned resolution);

}  // namespace fisher
