#include "fisher/snob.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace fisher {

namespace {

constexpr double kGridGuard = 1e8;
constexpr double kFeasSlack = 1e-9;  // grid sums wobble in the last bits

double share_term(double own, double total, double alpha) {
  if (own <= 0.0) return 0.0;
  const double share = total > 0.0 ? own / total : 1.0;
  return alpha == 0.0 ? 1.0 : std::pow(share, alpha);
}

}  // namespace

SnobMarket snob_from_instance(const MarketInstance& inst) {
  validate_market(inst);
  SnobMarket snob;
  snob.market = inst;
  snob.alphas = inst.alphas.empty() ? std::vector<double>(inst.buyers, 0.0)
                                    : inst.alphas;
  return snob;
}

double snob_share_utility(const Allocation& x, std::size_t i) {
  double u = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const double total = x.col_sum(j);
    if (total > 0.0) u += x(i, j) / total;
  }
  return u;
}

double snob_utility(const SnobMarket& snob, const Allocation& x,
                    std::size_t i, ShareBasis basis) {
  const MarketInstance& inst = snob.market;
  double u = 0.0;
  for (std::size_t j = 0; j < inst.goods; ++j) {
    const double own = x(i, j);
    if (own <= 0.0) continue;
    const double total = basis == ShareBasis::kCapacity ? inst.capacities[j]
                                                        : x.col_sum(j);
    u += own * inst.valuations(i, j) * share_term(own, total, snob.alphas[i]);
  }
  return u;
}

double snob_objective(const SnobMarket& snob, const Allocation& x,
                      ShareBasis basis) {
  double total = 0.0;
  for (std::size_t i = 0; i < snob.market.buyers; ++i)
    total += snob_utility(snob, x, i, basis);
  return total;
}

SnobOptimum brute_force_snob_optimum(const SnobMarket& snob,
                                     const PriceVector& prices,
                                     unsigned grid_points, ShareBasis basis) {
  const MarketInstance& inst = snob.market;
  validate_market(inst);
  if (prices.size() != inst.goods)
    throw MarketError(Fault::kDimensionMismatch,
                      "price vector length does not match goods");
  if (grid_points < 2)
    throw MarketError(Fault::kBadInput, "grid needs at least 2 points");
  const std::size_t cells = inst.buyers * inst.goods;
  if (cells * std::log(static_cast<double>(grid_points)) >
      std::log(kGridGuard))
    throw MarketError(Fault::kGuardExceeded,
                      "allocation grid too large: grid_points^(n*m) > 1e8");

  SnobOptimum best;
  best.allocation = Matrix(inst.buyers, inst.goods);
  best.value = -1.0;  // any feasible point (zero included) beats this

  Matrix x(inst.buyers, inst.goods);
  std::vector<double> spend(inst.buyers, 0.0);
  std::vector<double> sold(inst.goods, 0.0);

  // Walk cells in row-major lexicographic order; strict improvement keeps
  // the lexicographically smallest argmax. Budget and capacity prune early.
  std::function<void(std::size_t)> walk = [&](std::size_t cell) {
    if (cell == cells) {
      const double value = snob_objective(snob, x, basis);
      if (value > best.value) {
        best.value = value;
        best.allocation = x;
      }
      return;
    }
    const std::size_t i = cell / inst.goods;
    const std::size_t j = cell % inst.goods;
    const double cap = inst.capacities[j];
    for (unsigned t = 0; t < grid_points; ++t) {
      const double q = cap * t / (grid_points - 1);
      if (sold[j] + q > cap * (1.0 + kFeasSlack)) break;
      const double cost = prices[j] * q;
      if (spend[i] + cost >
          inst.budgets[i] * (1.0 + kFeasSlack) + kFeasSlack)
        break;
      x(i, j) = q;
      spend[i] += cost;
      sold[j] += q;
      walk(cell + 1);
      spend[i] -= cost;
      sold[j] -= q;
      x(i, j) = 0.0;
    }
  };
  walk(0);
  return best;
}

CornerCheck corner_theorem_check(unsigned grid_points) {
  SnobMarket snob;
  snob.market.buyers = 2;
  snob.market.goods = 1;
  snob.market.valuations = Matrix{{1.0}, {1.0}};
  snob.market.budgets = {1.0, 1.0};
  snob.market.capacities = {1.0};
  snob.alphas = {1.0, 1.0};

  const SnobOptimum best = brute_force_snob_optimum(snob, {1.0}, grid_points);

  CornerCheck check;
  check.max_value = best.value;
  check.first_holding = best.allocation(0, 0);
  check.second_holding = best.allocation(1, 0);

  // Largest objective over grid points where both buyers hold something.
  const double step = 1.0 / (grid_points - 1);
  Matrix x(2, 1);
  for (unsigned a = 1; a < grid_points; ++a)
    for (unsigned b = 1; a + b < grid_points; ++b) {
      x(0, 0) = a * step;
      x(1, 0) = b * step;
      check.best_interior =
          std::max(check.best_interior, snob_objective(snob, x));
    }

  const auto near = [&](double value, double target) {
    return std::abs(value - target) <= step + 1e-12;
  };
  const bool at_corner = (near(check.first_holding, 1.0) &&
                          near(check.second_holding, 0.0)) ||
                         (near(check.first_holding, 0.0) &&
                          near(check.second_holding, 1.0));
  check.pass = at_corner && std::abs(check.max_value - 1.0) <= 1e-9 &&
               check.best_interior < 1.0 - 1e-9;
  return check;
}

namespace {

// Buyer i's grid best response with everyone else frozen: maximize the snob
// utility of own bundle + rivals' holdings, over bundles within budget.
// The bundle axis for good j spans what the budget affords, deliberately NOT
// capped at capacity: demand beyond supply has to show up as an oversold
// residual, otherwise rationed responses make every cheap price vector look
// like it clears. A free good would be demanded without bound; its axis
// stops at twice what the whole market could absorb, plenty to register the
// glut. Lexicographically smallest argmax, as everywhere else.
void best_response(const SnobMarket& snob, const PriceVector& p,
                   std::size_t buyer, unsigned grid, ShareBasis basis,
                   Allocation& x) {
  const MarketInstance& inst = snob.market;
  std::vector<double> rivals(inst.goods, 0.0);
  for (std::size_t j = 0; j < inst.goods; ++j)
    rivals[j] = x.col_sum(j) - x(buyer, j);

  std::vector<double> ceiling(inst.goods, 0.0);
  for (std::size_t j = 0; j < inst.goods; ++j)
    ceiling[j] = p[j] > 0.0
                     ? inst.budgets[buyer] / p[j]
                     : 2.0 * inst.buyers * inst.capacities[j];

  std::vector<double> bundle(inst.goods, 0.0), pick(inst.goods, 0.0);
  double best_value = -1.0;
  std::function<void(std::size_t, double)> walk = [&](std::size_t j,
                                                      double spent) {
    if (j == inst.goods) {
      double value = 0.0;
      for (std::size_t g = 0; g < inst.goods; ++g) {
        const double own = bundle[g];
        if (own <= 0.0) continue;
        const double total = basis == ShareBasis::kCapacity
                                 ? inst.capacities[g]
                                 : own + rivals[g];
        value += own * inst.valuations(buyer, g) *
                 share_term(own, total, snob.alphas[buyer]);
      }
      if (value > best_value) {
        best_value = value;
        pick = bundle;
      }
      return;
    }
    for (unsigned t = 0; t < grid; ++t) {
      const double q = ceiling[j] * t / (grid - 1);
      const double cost = p[j] * q;
      if (spent + cost >
          inst.budgets[buyer] * (1.0 + kFeasSlack) + kFeasSlack)
        break;
      bundle[j] = q;
      walk(j + 1, spent + cost);
      bundle[j] = 0.0;
    }
  };
  walk(0, 0.0);
  for (std::size_t j = 0; j < inst.goods; ++j) x(buyer, j) = pick[j];
}

}  // namespace

std::vector<ClearingCandidate> snob_clearing_search(const SnobMarket& snob,
                                                    unsigned price_resolution,
                                                    unsigned alloc_grid,
                                                    ShareBasis basis) {
  const MarketInstance& inst = snob.market;
  validate_market(inst);
  if (price_resolution < 1)
    throw MarketError(Fault::kBadInput, "price resolution must be >= 1");
  if (alloc_grid < 2)
    throw MarketError(Fault::kBadInput, "allocation grid needs >= 2 points");

  // Count price vectors: compositions of price_resolution into m parts.
  double grid_count = 1.0;
  for (std::size_t j = 1; j < inst.goods; ++j)
    grid_count *= (static_cast<double>(price_resolution) + j) / j;
  const double responses_per_price =
      50.0 * inst.buyers *
      std::pow(static_cast<double>(alloc_grid),
               static_cast<double>(inst.goods));
  if (grid_count * responses_per_price > kGridGuard)
    throw MarketError(Fault::kGuardExceeded,
                      "price/allocation grid product too large");

  const double total_budget = inst.total_budget();
  std::vector<ClearingCandidate> out;

  std::vector<int> t(inst.goods, 0);
  std::function<void(std::size_t, int)> prices_rec = [&](std::size_t pos,
                                                         int left) {
    if (pos + 1 == inst.goods) {
      t[pos] = left;
      PriceVector p(inst.goods);
      for (std::size_t j = 0; j < inst.goods; ++j)
        p[j] = (static_cast<double>(t[j]) / price_resolution) * total_budget /
               inst.capacities[j];

      ClearingCandidate cand;
      cand.prices = p;
      cand.allocation = Matrix(inst.buyers, inst.goods);
      Allocation previous = cand.allocation;
      for (int sweep = 0; sweep < 50; ++sweep) {
        for (std::size_t i = 0; i < inst.buyers; ++i)
          best_response(snob, p, i, alloc_grid, basis, cand.allocation);
        if (cand.allocation == previous) break;
        previous = cand.allocation;
      }
      cand.residuals = clearing_residuals(inst, cand.allocation, p);
      double norm = 0.0;
      for (double g : cand.residuals.unspent) norm += g * g;
      for (double g : cand.residuals.unsold) norm += g * g;
      cand.residual_norm = std::sqrt(norm);
      out.push_back(std::move(cand));
      return;
    }
    for (int take = 0; take <= left; ++take) {
      t[pos] = take;
      prices_rec(pos + 1, left - take);
    }
  };
  prices_rec(0, static_cast<int>(price_resolution));

  std::stable_sort(out.begin(), out.end(),
                   [](const ClearingCandidate& a, const ClearingCandidate& b) {
                     if (a.residual_norm != b.residual_norm)
                       return a.residual_norm < b.residual_norm;
                     return a.prices < b.prices;
                   });
  return out;
}

}  // namespace fisher
