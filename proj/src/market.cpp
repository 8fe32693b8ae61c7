#include "fisher/market.hpp"

#include <algorithm>
#include <cmath>

namespace fisher {

const char* fault_name(Fault f) {
  switch (f) {
    case Fault::kDimensionMismatch: return "dimension_mismatch";
    case Fault::kNegativeValuation: return "negative_valuation";
    case Fault::kNonpositiveBudget: return "nonpositive_budget";
    case Fault::kNonpositiveCapacity: return "nonpositive_capacity";
    case Fault::kUnsellableGood: return "unsellable_good";
    case Fault::kZeroUtility: return "zero_utility";
    case Fault::kZeroPrice: return "zero_price";
    case Fault::kNotNormalized: return "not_normalized";
    case Fault::kGuardExceeded: return "guard_exceeded";
    case Fault::kBadInput: return "bad_input";
  }
  return "unknown";
}

namespace {

void require(bool ok, Fault fault, const std::string& msg) {
  if (!ok) throw MarketError(fault, msg);
}

}  // namespace

const MarketInstance& validate_market(const MarketInstance& inst) {
  const std::size_t n = inst.buyers;
  const std::size_t m = inst.goods;
  require(n > 0 && m > 0, Fault::kDimensionMismatch,
          "market needs at least one buyer and one good");
  require(inst.valuations.rows() == n && inst.valuations.cols() == m,
          Fault::kDimensionMismatch,
          "valuation matrix is " + std::to_string(inst.valuations.rows()) +
              "x" + std::to_string(inst.valuations.cols()) + ", expected " +
              std::to_string(n) + "x" + std::to_string(m));
  require(inst.budgets.size() == n, Fault::kDimensionMismatch,
          "budget vector has " + std::to_string(inst.budgets.size()) +
              " entries, expected " + std::to_string(n));
  require(inst.capacities.size() == m, Fault::kDimensionMismatch,
          "capacity vector has " + std::to_string(inst.capacities.size()) +
              " entries, expected " + std::to_string(m));
  require(inst.alphas.empty() || inst.alphas.size() == n,
          Fault::kDimensionMismatch,
          "alpha vector has " + std::to_string(inst.alphas.size()) +
              " entries, expected " + std::to_string(n));

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      require(inst.valuations(i, j) >= 0.0 &&
                  std::isfinite(inst.valuations(i, j)),
              Fault::kNegativeValuation,
              "valuation v[" + std::to_string(i) + "][" + std::to_string(j) +
                  "] must be finite and >= 0");

  for (std::size_t i = 0; i < n; ++i)
    require(inst.budgets[i] > 0.0 && std::isfinite(inst.budgets[i]),
            Fault::kNonpositiveBudget,
            "budget B[" + std::to_string(i) + "] must be finite and > 0");

  for (std::size_t j = 0; j < m; ++j)
    require(inst.capacities[j] > 0.0 && std::isfinite(inst.capacities[j]),
            Fault::kNonpositiveCapacity,
            "capacity C[" + std::to_string(j) + "] must be finite and > 0");

  for (double a : inst.alphas)
    require(a >= 0.0 && std::isfinite(a), Fault::kBadInput,
            "snob sensitivity alpha must be finite and >= 0");

  // A good valued by nobody can never sell; reject it up front rather than
  // letting solvers divide by a permanently zero price.
  for (std::size_t j = 0; j < m; ++j) {
    bool valued = false;
    for (std::size_t i = 0; i < n && !valued; ++i)
      valued = inst.valuations(i, j) > 0.0;
    require(valued, Fault::kUnsellableGood,
            "good " + std::to_string(j) + " has zero value to every buyer");
  }
  return inst;
}

double linear_utility(const MarketInstance& inst, const Allocation& x,
                      std::size_t i) {
  double u = 0.0;
  for (std::size_t j = 0; j < inst.goods; ++j)
    u += inst.valuations(i, j) * x(i, j);
  return u;
}

std::vector<double> buyer_utilities(const MarketInstance& inst,
                                    const Allocation& x) {
  std::vector<double> u(inst.buyers);
  for (std::size_t i = 0; i < inst.buyers; ++i) u[i] = linear_utility(inst, x, i);
  return u;
}

double welfare(const MarketInstance& inst, const Allocation& x) {
  double w = 0.0;
  for (std::size_t i = 0; i < inst.buyers; ++i) w += linear_utility(inst, x, i);
  return w;
}

std::vector<double> buyer_spend(const Allocation& x, const PriceVector& p) {
  std::vector<double> s(x.rows(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) s[i] += x(i, j) * p[j];
  return s;
}

std::vector<double> goods_sold(const Allocation& x) {
  std::vector<double> sold(x.cols(), 0.0);
  for (std::size_t j = 0; j < x.cols(); ++j) sold[j] = x.col_sum(j);
  return sold;
}

bool allocation_feasible(const MarketInstance& inst, const Allocation& x,
                         double tol) {
  if (x.rows() != inst.buyers || x.cols() != inst.goods) return false;
  for (double v : x.data())
    if (v < -tol || !std::isfinite(v)) return false;
  for (std::size_t j = 0; j < inst.goods; ++j)
    if (x.col_sum(j) > inst.capacities[j] + tol) return false;
  return true;
}

bool matching_feasible(const MarketInstance& inst, const Allocation& x,
                       double tol) {
  if (!allocation_feasible(inst, x, tol)) return false;
  for (std::size_t i = 0; i < inst.buyers; ++i)
    if (std::abs(x.row_sum(i) - 1.0) > tol) return false;
  return true;
}

bool fisher_feasible(const MarketInstance& inst, const Allocation& x,
                     const PriceVector& p, double tol) {
  if (!allocation_feasible(inst, x, tol)) return false;
  if (p.size() != inst.goods) return false;
  const auto spend = buyer_spend(x, p);
  for (std::size_t i = 0; i < inst.buyers; ++i)
    if (spend[i] > inst.budgets[i] + tol) return false;
  return true;
}

ClearingResiduals clearing_residuals(const MarketInstance& inst,
                                     const Allocation& x,
                                     const PriceVector& p) {
  ClearingResiduals r;
  const auto spend = buyer_spend(x, p);
  const auto sold = goods_sold(x);
  r.unspent.resize(inst.buyers);
  r.unsold.resize(inst.goods);
  for (std::size_t i = 0; i < inst.buyers; ++i)
    r.unspent[i] = inst.budgets[i] - spend[i];
  for (std::size_t j = 0; j < inst.goods; ++j)
    r.unsold[j] = inst.capacities[j] - sold[j];
  return r;
}

bool market_clears(const MarketInstance& inst, const ClearingResiduals& r,
                   const PriceVector& p, double tol) {
  for (double g : r.unspent)
    if (std::abs(g) > tol) return false;
  for (std::size_t j = 0; j < inst.goods; ++j) {
    if (p[j] <= tol) continue;  // free goods may go unsold
    if (std::abs(r.unsold[j]) > tol) return false;
  }
  return true;
}

MarketInstance normalize_market(const MarketInstance& inst) {
  validate_market(inst);
  MarketInstance out = inst;
  const double total = inst.total_budget();
  for (std::size_t i = 0; i < inst.buyers; ++i) {
    out.budgets[i] = inst.budgets[i] / total;
    for (std::size_t j = 0; j < inst.goods; ++j)
      out.valuations(i, j) = inst.valuations(i, j) * inst.capacities[j];
  }
  std::fill(out.capacities.begin(), out.capacities.end(), 1.0);
  return out;
}

bool is_normalized(const MarketInstance& inst, double tol) {
  for (double c : inst.capacities)
    if (std::abs(c - 1.0) > tol) return false;
  return std::abs(inst.total_budget() - 1.0) <= tol;
}

}  // namespace fisher
