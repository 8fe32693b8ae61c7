#include "fisher/ceei.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace fisher {

namespace {

constexpr double kAllocationGuard = 1e7;
constexpr double kPriceGridGuard = 2e7;
constexpr double kUtilitySlack = 1e-9;  // float dust, far below any real gap

// All nonnegative integer vectors of the given length summing to total, in
// ascending lexicographic order.
void for_each_composition(int total, std::size_t length,
                          const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> parts(length, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos + 1 == length) {
      parts[pos] = left;
      fn(parts);
      return;
    }
    for (int take = 0; take <= left; ++take) {
      parts[pos] = take;
      rec(pos + 1, left - take);
    }
  };
  if (length > 0) rec(0, total);
}

}  // namespace

bool epsilon_clearing(const DiscreteAllocation& alloc,
                      const MarketInstance& inst, double eps) {
  if (!(eps >= 0.0 && eps < 1.0))
    throw MarketError(Fault::kBadInput, "epsilon must lie in [0, 1)");
  if (alloc.buyers != inst.buyers || alloc.goods != inst.goods)
    throw MarketError(Fault::kDimensionMismatch,
                      "allocation shape does not match instance");
  for (int u : alloc.units)
    if (u < 0)
      throw MarketError(Fault::kBadInput, "allocation units must be >= 0");
  for (std::size_t j = 0; j < inst.goods; ++j) {
    const double sold = alloc.col_sum(j);
    const double cap = inst.capacities[j];
    if (sold > cap) return false;
    // (1 - eps) * cap <= sold, rearranged so integral cases stay exact. The
    // few-ulp slack restores the intended verdict when eps itself is not
    // representable (eps = 1/3, C = 3: eps * cap lands a hair below the
    // exact 1); genuine shortfalls on integral data are a full unit away.
    const double slack = 16.0 * std::numeric_limits<double>::epsilon() * cap;
    if (cap - sold > eps * cap + slack) return false;
  }
  return true;
}

CeeiSearchResult ceei_exists_bruteforce(const MarketInstance& inst,
                                        unsigned resolution) {
  validate_market(inst);
  if (inst.divisible)
    throw MarketError(Fault::kBadInput,
                      "CE search expects an indivisible instance "
                      "(divisible=false)");
  if (resolution < 1)
    throw MarketError(Fault::kBadInput, "resolution must be >= 1");
  const std::size_t n = inst.buyers;
  const std::size_t m = inst.goods;
  for (std::size_t i = 1; i < n; ++i)
    if (inst.budgets[i] != inst.budgets[0])
      throw MarketError(Fault::kBadInput,
                        "equal incomes required: budgets differ");

  std::vector<int> cap(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double c = inst.capacities[j];
    if (std::floor(c) != c || c > 1e6)
      throw MarketError(Fault::kBadInput,
                        "capacities must be small integers, got " +
                            std::to_string(c) + " for good " +
                            std::to_string(j));
    cap[j] = static_cast<int>(c);
  }

  double alloc_count = 1.0;
  for (std::size_t j = 0; j < m; ++j)
    alloc_count *= std::pow(static_cast<double>(cap[j]) + 1.0,
                            static_cast<double>(n));
  if (alloc_count > kAllocationGuard)
    throw MarketError(Fault::kGuardExceeded,
                      "allocation enumeration too large: prod (C_j+1)^n > 1e7");

  // Price grid: money weights t/resolution on the scaled simplex
  // sum p[j] C[j] = sum B[i].
  const double total_budget = inst.total_budget();
  const double grid_tol = total_budget / resolution;
  double grid_count = 1.0;
  for (std::size_t j = 1; j < m; ++j)
    grid_count *= (static_cast<double>(resolution) + j) / j;
  if (grid_count > kPriceGridGuard)
    throw MarketError(Fault::kGuardExceeded, "price grid too large");
  std::vector<PriceVector> grid;
  grid.reserve(static_cast<std::size_t>(grid_count));
  for_each_composition(
      static_cast<int>(resolution), m, [&](const std::vector<int>& t) {
        PriceVector p(m);
        for (std::size_t j = 0; j < m; ++j)
          p[j] = (static_cast<double>(t[j]) / resolution) * total_budget /
                 inst.capacities[j];
        grid.push_back(std::move(p));
      });

  // Every integral bundle a buyer could conceivably hold.
  std::vector<std::vector<int>> bundles;
  {
    std::vector<int> y(m, 0);
    for (;;) {
      bundles.push_back(y);
      std::size_t j = 0;
      while (j < m && y[j] == cap[j]) y[j++] = 0;
      if (j == m) break;
      ++y[j];
    }
  }
  // bundle_value[i][b] = buyer i's utility for bundle b.
  std::vector<std::vector<double>> bundle_value(n);
  for (std::size_t i = 0; i < n; ++i) {
    bundle_value[i].reserve(bundles.size());
    for (const auto& y : bundles) {
      double u = 0.0;
      for (std::size_t j = 0; j < m; ++j) u += inst.valuations(i, j) * y[j];
      bundle_value[i].push_back(u);
    }
  }

  CeeiSearchResult result;
  result.resolution = resolution;

  // Column compositions: per good, every split of C_j across buyers.
  std::vector<std::vector<std::vector<int>>> splits(m);
  for (std::size_t j = 0; j < m; ++j)
    for_each_composition(cap[j], n, [&](const std::vector<int>& parts) {
      splits[j].push_back(parts);
    });

  DiscreteAllocation alloc(n, m);
  std::vector<double> spend(n);

  const auto admits_prices = [&](const PriceVector& p) {
    for (std::size_t i = 0; i < n; ++i) {
      spend[i] = 0.0;
      for (std::size_t j = 0; j < m; ++j) spend[i] += p[j] * alloc.at(i, j);
      if (std::abs(spend[i] - inst.budgets[i]) > grid_tol) return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double assigned = 0.0;
      for (std::size_t j = 0; j < m; ++j)
        assigned += inst.valuations(i, j) * alloc.at(i, j);
      const double slack = kUtilitySlack * std::max(1.0, std::abs(assigned));
      const double afford = inst.budgets[i] + grid_tol;
      for (std::size_t b = 0; b < bundles.size(); ++b) {
        if (bundle_value[i][b] <= assigned + slack) continue;
        double cost = 0.0;
        for (std::size_t j = 0; j < m; ++j) cost += p[j] * bundles[b][j];
        if (cost <= afford) return false;  // strictly better and affordable
      }
    }
    return true;
  };

  // Walk fully sold allocations lexicographically: good 0's split varies
  // slowest, buyers ascend within each split.
  std::function<bool(std::size_t)> walk = [&](std::size_t j) -> bool {
    if (j == m) {
      ++result.allocations_tried;
      for (const PriceVector& p : grid)
        if (admits_prices(p)) {
          result.witness = CeeiWitness{p, alloc};
          return true;
        }
      return false;
    }
    for (const auto& parts : splits[j]) {
      for (std::size_t i = 0; i < n; ++i) alloc.at(i, j) = parts[i];
      if (walk(j + 1)) return true;
    }
    return false;
  };
  walk(0);
  return result;
}

}  // namespace fisher
