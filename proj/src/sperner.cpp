#include "fisher/sperner.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace fisher {

namespace {

constexpr double kExpensiveSlack = 1e-12;  // demand <= 1, give or take dust
constexpr double kCellGuard = 2e7;         // generic scan size limit

// Weights below exp(-37) cannot move a double sum; ratios further than
// 37/kappa (relative) from the best are treated as exactly zero weight.
constexpr double kNegligibleLogWeight = 37.0;

void require_normalized_for_labeling(const MarketInstance& inst) {
  validate_market(inst);
  if (!is_normalized(inst))
    throw MarketError(Fault::kNotNormalized,
                      "simplex search needs C == 1 and sum(B) == 1; call "
                      "normalize_market first");
  for (double v : inst.valuations.data())
    if (v <= 0.0)
      throw MarketError(Fault::kNotNormalized,
                        "simplex search assumes every valuation is positive");
}

// Computes vertex labels. The demand behind the label smooths each buyer's
// money over near-best bang-per-buck goods with weights rel^kappa, kappa =
// k / smoothing, so the smoothing window spans ~smoothing cells at every
// resolution. Wide-window continuity is load-bearing: it turns each tie
// manifold into label stripes wider than a cell (no spurious fully-labeled
// cells along the manifold) while the window's clearing bias shrinks like
// smoothing/k (NOTES.md has the experiments).
class Labeler {
 public:
  Labeler(const MarketInstance& inst, int k, double smoothing)
      : inst_(inst), k_(k), kappa_(std::max(k / smoothing, 1.0)),
        money_(inst.goods), weight_(inst.goods) {}

  std::size_t operator()(const GridVertex& y) {
    const std::size_t m = inst_.goods;
    std::fill(money_.begin(), money_.end(), 0.0);
    for (std::size_t i = 0; i < inst_.buyers; ++i) {
      // Best bang per buck v/(y/k) over priced goods, compared
      // cross-multiplied: v_a / y_a > v_b / y_b  <=>  v_a y_b > v_b y_a.
      std::size_t best = m;
      for (std::size_t j = 0; j < m; ++j) {
        if (y[j] == 0) continue;
        if (best == m || inst_.valuations(i, j) * y[best] >
                             inst_.valuations(i, best) * y[j])
          best = j;
      }
      assert(best < m);
      // Ratios above the cut get weight rel^kappa; most vertices have a
      // single contender and skip the exponentials entirely.
      const double cut = std::exp(-kNegligibleLogWeight / kappa_);
      const double vb = inst_.valuations(i, best);
      std::size_t contenders = 0;
      for (std::size_t j = 0; j < m; ++j) {
        weight_[j] = 0.0;
        if (y[j] == 0) continue;
        const double rel =
            (inst_.valuations(i, j) * y[best]) / (vb * y[j]);
        if (rel >= cut) {
          weight_[j] = rel;
          ++contenders;
        }
      }
      if (contenders == 1) {
        money_[best] += inst_.budgets[i];
        continue;
      }
      double total = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (weight_[j] == 0.0) continue;
        weight_[j] = std::exp(kappa_ * std::log(weight_[j]));
        total += weight_[j];
      }
      for (std::size_t j = 0; j < m; ++j)
        if (weight_[j] > 0.0) money_[j] += inst_.budgets[i] * weight_[j] / total;
    }
    // Expensive good: demand money[j]/(y[j]/k) <= 1. Total money 1 chases
    // total priced supply 1, so one always exists.
    for (std::size_t j = 0; j < m; ++j)
      if (y[j] > 0 && money_[j] * k_ <= y[j] * (1.0 + kExpensiveSlack))
        return j;
    throw std::logic_error("no expensive good found: labeling bug");
  }

 private:
  const MarketInstance& inst_;
  int k_;
  double kappa_;
  std::vector<double> money_;
  std::vector<double> weight_;
};

}  // namespace

PriceVector vertex_prices(const GridVertex& y, int k) {
  PriceVector p(y.size());
  for (std::size_t j = 0; j < y.size(); ++j)
    p[j] = static_cast<double>(y[j]) / k;
  return p;
}

PriceVector KuhnCell::barycenter(int k) const {
  PriceVector p(vertices.front().size(), 0.0);
  for (const GridVertex& y : vertices)
    for (std::size_t j = 0; j < p.size(); ++j) p[j] += y[j];
  for (double& c : p) c /= static_cast<double>(vertices.size()) * k;
  return p;
}

double KuhnCell::diameter(int k) const {
  double best = 0.0;
  for (std::size_t a = 0; a < vertices.size(); ++a)
    for (std::size_t b = a + 1; b < vertices.size(); ++b) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < vertices[a].size(); ++j) {
        const double d = static_cast<double>(vertices[a][j] - vertices[b][j]);
        d2 += d * d;
      }
      best = std::max(best, d2);
    }
  return std::sqrt(best) / k;
}

std::vector<double> aggregate_demand(const MarketInstance& inst,
                                     const PriceVector& prices) {
  require_normalized_for_labeling(inst);
  if (prices.size() != inst.goods)
    throw MarketError(Fault::kDimensionMismatch,
                      "price vector length does not match goods");
  std::vector<double> demand(inst.goods, 0.0);
  for (std::size_t i = 0; i < inst.buyers; ++i) {
    std::size_t best = inst.goods;
    for (std::size_t j = 0; j < inst.goods; ++j) {
      if (!(prices[j] > 0.0)) continue;
      if (best == inst.goods || inst.valuations(i, j) * prices[best] >
                                    inst.valuations(i, best) * prices[j])
        best = j;
    }
    if (best < inst.goods) demand[best] += inst.budgets[i];
  }
  for (std::size_t j = 0; j < inst.goods; ++j)
    demand[j] = prices[j] > 0.0 ? demand[j] / prices[j] : 1.0;
  return demand;
}

std::vector<double> smoothed_demand(const MarketInstance& inst,
                                    const PriceVector& prices, double kappa) {
  require_normalized_for_labeling(inst);
  std::vector<double> money(inst.goods, 0.0);
  std::vector<double> weight(inst.goods);
  for (std::size_t i = 0; i < inst.buyers; ++i) {
    double best = 0.0;
    for (std::size_t j = 0; j < inst.goods; ++j)
      if (prices[j] > 0.0)
        best = std::max(best, inst.valuations(i, j) / prices[j]);
    if (best <= 0.0) continue;
    double total = 0.0;
    for (std::size_t j = 0; j < inst.goods; ++j) {
      weight[j] = 0.0;
      if (!(prices[j] > 0.0)) continue;
      const double rel = inst.valuations(i, j) / prices[j] / best;
      const double arg = kappa * std::log(rel);
      if (arg >= -kNegligibleLogWeight) {
        weight[j] = std::exp(arg);
        total += weight[j];
      }
    }
    for (std::size_t j = 0; j < inst.goods; ++j)
      if (weight[j] > 0.0) money[j] += inst.budgets[i] * weight[j] / total;
  }
  std::vector<double> demand(inst.goods);
  for (std::size_t j = 0; j < inst.goods; ++j)
    demand[j] = prices[j] > 0.0 ? money[j] / prices[j] : 1.0;
  return demand;
}

std::size_t expensive_label(const MarketInstance& inst, const GridVertex& y,
                            int k, double smoothing) {
  require_normalized_for_labeling(inst);
  if (y.size() != inst.goods)
    throw MarketError(Fault::kDimensionMismatch,
                      "vertex length does not match goods");
  if (std::accumulate(y.begin(), y.end(), 0) != k)
    throw MarketError(Fault::kBadInput, "vertex coordinates must sum to k");
  Labeler label(inst, k, smoothing);
  return label(y);
}

bool label_respects_boundary(const GridVertex& y, std::size_t label) {
  return label < y.size() && y[label] > 0;
}

double price_score(const MarketInstance& inst, const PriceVector& prices) {
  double score = 0.0;
  for (double p : prices) score += p;
  for (std::size_t i = 0; i < inst.buyers; ++i) {
    double best = 0.0;
    for (std::size_t j = 0; j < inst.goods; ++j) {
      if (!(prices[j] > 0.0))
        return std::numeric_limits<double>::infinity();
      best = std::max(best, inst.valuations(i, j) / prices[j]);
    }
    score += inst.budgets[i] * std::log(best);
  }
  return score;
}

void for_each_vertex(const SimplexGrid& grid,
                     const std::function<void(const GridVertex&)>& fn) {
  GridVertex y(grid.goods, 0);
  const std::function<void(std::size_t, int)> rec = [&](std::size_t j,
                                                        int left) {
    if (j + 1 == grid.goods) {
      y[j] = left;
      fn(y);
      return;
    }
    for (int t = 0; t <= left; ++t) {
      y[j] = t;
      rec(j + 1, left - t);
    }
  };
  rec(0, grid.resolution);
}

namespace {

// Kuhn cells in the order-simplex coordinates u (u[r] = y[r+1] + ... +
// y[m-1], so k >= u[0] >= ... >= u[d-1] >= 0): a base chain plus a
// permutation of the d coordinate steps, keeping the chain valid after
// every step.
GridVertex u_to_y(const std::vector<int>& u, int k) {
  const std::size_t d = u.size();
  GridVertex y(d + 1);
  y[0] = k - u[0];
  for (std::size_t r = 1; r < d; ++r) y[r] = u[r - 1] - u[r];
  y[d] = u[d - 1];
  return y;
}

void for_each_cell_impl(
    const SimplexGrid& grid,
    const std::function<void(const std::vector<std::vector<int>>&)>& fn) {
  const int k = grid.resolution;
  const std::size_t d = grid.dimension();
  if (d == 0) {
    fn({{}});  // one 0-cell: the single vertex
    return;
  }
  std::vector<int> base(d, 0);
  std::vector<std::size_t> perm(d);
  std::vector<std::vector<int>> chain(d + 1, std::vector<int>(d));

  const std::function<void(std::size_t)> over_bases = [&](std::size_t pos) {
    if (pos == d) {
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      do {
        chain[0] = base;
        bool ok = true;
        for (std::size_t t = 0; t < d && ok; ++t) {
          chain[t + 1] = chain[t];
          const std::size_t r = perm[t];
          chain[t + 1][r] += 1;
          const int upper = r == 0 ? k : chain[t + 1][r - 1];
          ok = chain[t + 1][r] <= upper;
        }
        if (ok) fn(chain);
      } while (std::next_permutation(perm.begin(), perm.end()));
      return;
    }
    const int upper = pos == 0 ? k : base[pos - 1];
    for (int t = 0; t <= upper; ++t) {
      base[pos] = t;
      over_bases(pos + 1);
    }
  };
  over_bases(0);
}

}  // namespace

void for_each_kuhn_cell(const SimplexGrid& grid,
                        const std::function<void(const KuhnCell&)>& fn) {
  const int k = grid.resolution;
  for_each_cell_impl(grid, [&](const std::vector<std::vector<int>>& chain) {
    KuhnCell cell;
    cell.vertices.reserve(chain.size());
    if (grid.dimension() == 0) {
      cell.vertices.push_back(GridVertex{k});
    } else {
      for (const auto& u : chain) cell.vertices.push_back(u_to_y(u, k));
    }
    fn(cell);
  });
}

std::vector<KuhnCell> kuhn_cells(const SimplexGrid& grid) {
  const double count =
      std::pow(static_cast<double>(grid.resolution),
               static_cast<double>(grid.dimension()));
  if (count > kCellGuard)
    throw MarketError(Fault::kGuardExceeded,
                      "too many cells to materialize at this resolution");
  std::vector<KuhnCell> cells;
  cells.reserve(static_cast<std::size_t>(count));
  for_each_kuhn_cell(grid,
                     [&](const KuhnCell& cell) { cells.push_back(cell); });
  return cells;
}

namespace {

struct CellPick {
  bool found = false;
  double score = std::numeric_limits<double>::infinity();
  KuhnCell cell;
  std::vector<std::size_t> labels;
  std::size_t fully_labeled = 0;

  void consider(const MarketInstance& inst, int k, const KuhnCell& cand,
                std::vector<std::size_t> cand_labels) {
    ++fully_labeled;
    const double cand_score = price_score(inst, cand.barycenter(k));
    if (!found || cand_score < score) {
      found = true;
      score = cand_score;
      cell = cand;
      labels = std::move(cand_labels);
    }
  }
};

// m = 3 scan with row reuse: vertices on the row u0 = r share prices
// (k-r, r-u1, u1); cells touch only rows r and r+1.
void scan_m3(const MarketInstance& inst, int k, Labeler& label,
             CellPick& pick) {
  std::vector<std::uint8_t> row_a(k + 2), row_b(k + 2);
  GridVertex y(3);
  const auto fill_row = [&](int r, std::vector<std::uint8_t>& row) {
    for (int u1 = 0; u1 <= r; ++u1) {
      y[0] = k - r;
      y[1] = r - u1;
      y[2] = u1;
      row[u1] = static_cast<std::uint8_t>(label(y));
    }
  };
  const auto vertex_of = [&](int r, int u1) {
    return GridVertex{k - r, r - u1, u1};
  };

  fill_row(0, row_a);
  for (int z1 = 0; z1 < k; ++z1) {
    fill_row(z1 + 1, row_b);
    for (int z2 = 0; z2 <= z1; ++z2) {
      // Up cell: (z1,z2) (z1+1,z2) (z1+1,z2+1) in u-space.
      const std::uint8_t a = row_a[z2], b = row_b[z2], c = row_b[z2 + 1];
      if ((1u << a | 1u << b | 1u << c) == 0b111u) {
        KuhnCell cell;
        cell.vertices = {vertex_of(z1, z2), vertex_of(z1 + 1, z2),
                         vertex_of(z1 + 1, z2 + 1)};
        pick.consider(inst, k, cell, {a, b, c});
      }
      // Down cell: (z1,z2) (z1,z2+1) (z1+1,z2+1), valid when z2 < z1.
      if (z2 < z1) {
        const std::uint8_t e = row_a[z2 + 1];
        if ((1u << a | 1u << e | 1u << c) == 0b111u) {
          KuhnCell cell;
          cell.vertices = {vertex_of(z1, z2), vertex_of(z1, z2 + 1),
                           vertex_of(z1 + 1, z2 + 1)};
          pick.consider(inst, k, cell, {a, e, c});
        }
      }
    }
    std::swap(row_a, row_b);
  }
}

void scan_m2(const MarketInstance& inst, int k, Labeler& label,
             CellPick& pick) {
  std::vector<std::uint8_t> labels(k + 1);
  GridVertex y(2);
  for (int t = 0; t <= k; ++t) {
    y[0] = k - t;
    y[1] = t;
    labels[t] = static_cast<std::uint8_t>(label(y));
  }
  for (int t = 0; t < k; ++t) {
    if (labels[t] == labels[t + 1]) continue;
    KuhnCell cell;
    cell.vertices = {GridVertex{k - t, t}, GridVertex{k - t - 1, t + 1}};
    pick.consider(inst, k, cell, {labels[t], labels[t + 1]});
  }
}

void scan_generic(const MarketInstance& inst, const SimplexGrid& grid,
                  Labeler& label, CellPick& pick) {
  const double count = std::pow(static_cast<double>(grid.resolution),
                                static_cast<double>(grid.dimension()));
  if (count > kCellGuard)
    throw MarketError(Fault::kGuardExceeded,
                      "scan too large: k^(m-1) cells at m >= 4");
  // Vertices repeat across neighboring cells; memoize labels by vertex.
  std::unordered_map<std::uint64_t, std::uint8_t> cache;
  const auto label_of = [&](const GridVertex& y) {
    std::uint64_t key = 0;
    for (int c : y) key = key << 21 | static_cast<std::uint64_t>(c);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const std::uint8_t l = static_cast<std::uint8_t>(label(y));
    cache.emplace(key, l);
    return l;
  };
  for_each_kuhn_cell(grid, [&](const KuhnCell& cell) {
    std::uint32_t mask = 0;
    std::vector<std::size_t> labels;
    labels.reserve(cell.vertices.size());
    for (const GridVertex& y : cell.vertices) {
      const std::uint8_t l = label_of(y);
      labels.push_back(l);
      mask |= 1u << l;
    }
    if (mask == (1u << grid.goods) - 1)
      pick.consider(inst, grid.resolution, cell, std::move(labels));
  });
}

}  // namespace

ScanResult find_fully_labeled(const MarketInstance& inst,
                              const SimplexGrid& grid,
                              const SpernerOptions& opts) {
  require_normalized_for_labeling(inst);
  if (grid.goods != inst.goods)
    throw MarketError(Fault::kDimensionMismatch,
                      "grid goods count does not match instance");
  if (grid.resolution < 1)
    throw MarketError(Fault::kBadInput, "grid resolution must be >= 1");

  CellPick pick;
  Labeler label(inst, grid.resolution, opts.smoothing);
  if (inst.goods == 1) {
    KuhnCell cell;
    cell.vertices = {GridVertex{grid.resolution}};
    pick.consider(inst, grid.resolution, cell, {0});
  } else if (inst.goods == 2) {
    scan_m2(inst, grid.resolution, label, pick);
  } else if (inst.goods == 3) {
    scan_m3(inst, grid.resolution, label, pick);
  } else {
    scan_generic(inst, grid, label, pick);
  }
  if (!pick.found)
    throw std::logic_error(
        "no fully-labeled cell: Sperner guarantee violated, labeling bug");

  ScanResult result;
  result.cell = std::move(pick.cell);
  result.labels = std::move(pick.labels);
  result.fully_labeled = pick.fully_labeled;
  result.score = pick.score;
  return result;
}

RefineResult refine_clearing_prices(const MarketInstance& inst, int k0,
                                    double target_diameter,
                                    const SpernerOptions& opts) {
  require_normalized_for_labeling(inst);
  if (k0 < 1)
    throw MarketError(Fault::kBadInput, "initial resolution must be >= 1");
  if (!(target_diameter > 0.0))
    throw MarketError(Fault::kBadInput, "target diameter must be > 0");

  RefineResult out;
  for (int k = k0;; k *= 2) {
    const ScanResult scan = find_fully_labeled(inst, {inst.goods, k}, opts);
    RefineRound round;
    round.resolution = k;
    round.cell = scan.cell;
    round.labels = scan.labels;
    round.barycenter = scan.cell.barycenter(k);
    round.diameter = scan.cell.diameter(k);
    round.fully_labeled = scan.fully_labeled;
    out.rounds.push_back(round);
    if (round.diameter <= target_diameter) {
      out.prices = round.barycenter;
      return out;
    }
    if (k > opts.max_resolution / 2)
      throw MarketError(Fault::kGuardExceeded,
                        "resolution guard exceeded before reaching the "
                        "target diameter");
  }
}

}  // namespace fisher
