#include "fisher/eg_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace fisher {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_solver_config(const SolverConfig& cfg) {
  if (cfg.max_iterations < 1)
    throw MarketError(Fault::kBadInput, "max_iterations must be >= 1");
  if (!(cfg.tolerance > 0.0))
    throw MarketError(Fault::kBadInput, "tolerance must be > 0");
  if (!(cfg.damping > 0.0) || cfg.damping > 1.0)
    throw MarketError(Fault::kBadInput, "damping must lie in (0, 1]");
}

}  // namespace

double KktReport::max_residual() const {
  return std::max(std::max(price_nonnegativity, priced_goods_cleared),
                  std::max(bang_per_buck_bound, allocated_tightness));
}

double eg_objective(const Allocation& x, const MarketInstance& inst) {
  double obj = 0.0;
  for (std::size_t i = 0; i < inst.buyers; ++i) {
    const double u = linear_utility(inst, x, i);
    if (u <= 0.0)
      throw MarketError(Fault::kZeroUtility,
                        "buyer " + std::to_string(i) +
                            " has zero utility; log objective undefined");
    obj += inst.budgets[i] * std::log(u);
  }
  return obj;
}

PriceVector extract_prices(const Allocation& x, const MarketInstance& inst) {
  PriceVector p(inst.goods, 0.0);
  for (std::size_t i = 0; i < inst.buyers; ++i) {
    const double u = linear_utility(inst, x, i);
    if (u <= 0.0)
      throw MarketError(Fault::kZeroUtility,
                        "buyer " + std::to_string(i) +
                            " has zero utility; prices undefined");
    for (std::size_t j = 0; j < inst.goods; ++j)
      p[j] += inst.budgets[i] * inst.valuations(i, j) * x(i, j) / u;
  }
  for (std::size_t j = 0; j < inst.goods; ++j) p[j] /= inst.capacities[j];
  return p;
}

KktReport kkt_verify(const Allocation& x, const PriceVector& p,
                     const MarketInstance& inst, double tol) {
  KktReport r;
  for (double price : p)
    r.price_nonnegativity = std::max(r.price_nonnegativity, -price);
  r.price_nonnegativity = std::max(0.0, r.price_nonnegativity);

  for (std::size_t j = 0; j < inst.goods; ++j) {
    if (p[j] <= 0.0) continue;
    r.priced_goods_cleared = std::max(
        r.priced_goods_cleared, std::abs(x.col_sum(j) - inst.capacities[j]));
  }

  for (std::size_t i = 0; i < inst.buyers; ++i) {
    const double rate = linear_utility(inst, x, i) / inst.budgets[i];
    for (std::size_t j = 0; j < inst.goods; ++j) {
      const double v = inst.valuations(i, j);
      if (p[j] <= 0.0) {
        // A free good someone values makes (iii) unbounded; a free worthless
        // good constrains nothing.
        if (v > 0.0) {
          r.bang_per_buck_bound = kInf;
          if (x(i, j) > tol) r.allocated_tightness = kInf;
        }
        continue;
      }
      const double gap = v / p[j] - rate;
      r.bang_per_buck_bound = std::max(r.bang_per_buck_bound, gap);
      if (x(i, j) > tol)
        r.allocated_tightness = std::max(r.allocated_tightness, std::abs(gap));
    }
  }
  r.bang_per_buck_bound = std::max(0.0, r.bang_per_buck_bound);
  return r;
}

DemandSet demand_set(std::size_t i, const PriceVector& p,
                     const MarketInstance& inst, double rel_tie_tol,
                     double abs_tie_tol) {
  DemandSet d;
  d.budget = inst.budgets[i];
  double best = 0.0;
  for (std::size_t j = 0; j < inst.goods; ++j) {
    const double v = inst.valuations(i, j);
    if (p[j] <= 0.0) {
      if (v > 0.0) d.free_goods.push_back(j);
      continue;
    }
    best = std::max(best, v / p[j]);
  }
  d.unbounded_at_zero_price = !d.free_goods.empty();
  if (best > 0.0) {
    const double cut =
        std::min(best * (1.0 - rel_tie_tol), best - abs_tie_tol);
    for (std::size_t j = 0; j < inst.goods; ++j)
      if (p[j] > 0.0 && inst.valuations(i, j) / p[j] >= cut)
        d.goods.push_back(j);
  }
  return d;
}

EquilibriumReport solve_eg(const MarketInstance& inst,
                           const SolverConfig& cfg) {
  validate_market(inst);
  check_solver_config(cfg);
  if (!inst.divisible)
    throw MarketError(Fault::kBadInput,
                      "solve_eg handles divisible markets; see the discrete "
                      "search for indivisible ones");
  const std::size_t n = inst.buyers;
  const std::size_t m = inst.goods;

  // Initial bids live on the support {v[i][j] > 0} so every buyer starts
  // with positive utility. A buyer who values nothing cannot enter the log
  // objective at all.
  Matrix bids(n, m);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> jitter(0.1, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double v = inst.valuations(i, j);
      if (v > 0.0) bids(i, j) = cfg.seed == 0 ? v : jitter(rng);
      row += bids(i, j);
    }
    if (row <= 0.0)
      throw MarketError(Fault::kZeroUtility,
                        "buyer " + std::to_string(i) +
                            " values no good; log objective undefined");
    for (std::size_t j = 0; j < m; ++j)
      bids(i, j) *= inst.budgets[i] / row;
  }

  EquilibriumReport rep;
  rep.allocation = Matrix(n, m);
  rep.prices.assign(m, 0.0);
  std::vector<double> utilities(n, 0.0);

  const auto recompute = [&] {
    for (std::size_t j = 0; j < m; ++j)
      rep.prices[j] = bids.col_sum(j) / inst.capacities[j];
    for (std::size_t i = 0; i < n; ++i) {
      double u = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        rep.allocation(i, j) = rep.prices[j] > 0.0 ? bids(i, j) / rep.prices[j] : 0.0;
        u += inst.valuations(i, j) * rep.allocation(i, j);
      }
      utilities[i] = u;
    }
  };

  KktReport kkt;
  for (std::size_t it = 0;; ++it) {
    recompute();
    kkt = kkt_verify(rep.allocation, rep.prices, inst, cfg.tolerance);
    rep.residuals = clearing_residuals(inst, rep.allocation, rep.prices);
    double residual =
        std::max(kkt.bang_per_buck_bound, kkt.allocated_tightness);
    for (double g : rep.residuals.unspent)
      residual = std::max(residual, std::abs(g));
    for (double g : rep.residuals.unsold)
      residual = std::max(residual, std::abs(g));

    rep.iterations = it;
    if (residual <= cfg.tolerance) {
      rep.converged = true;
      break;
    }
    if (it >= cfg.max_iterations) break;

    // Proportional response: next bid = budget share of the utility each
    // good currently delivers, blended by the damping factor.
    for (std::size_t i = 0; i < n; ++i) {
      const double u = utilities[i];
      for (std::size_t j = 0; j < m; ++j) {
        const double target = inst.budgets[i] * inst.valuations(i, j) *
                              rep.allocation(i, j) / u;
        bids(i, j) = cfg.damping * target + (1.0 - cfg.damping) * bids(i, j);
      }
    }
  }

  rep.utilities = utilities;
  rep.spend = buyer_spend(rep.allocation, rep.prices);
  rep.sold = goods_sold(rep.allocation);
  rep.max_kkt_residual = kkt.max_residual();
  rep.kkt_ok = kkt.pass(cfg.tolerance);
  rep.clearing_ok = market_clears(inst, rep.residuals, rep.prices, cfg.tolerance);
  return rep;
}

}  // namespace fisher
