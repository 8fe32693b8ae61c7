#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "fisher/market.hpp"

namespace fisher {

// Vertex of the simplex grid at resolution k: nonnegative integers summing
// to k; the matching price vector is y / k.
using GridVertex = std::vector<int>;

struct SimplexGrid {
  std::size_t goods = 0;  // m: the price simplex has dimension m - 1
  int resolution = 0;     // k >= 1

  std::size_t dimension() const { return goods - 1; }
};

PriceVector vertex_prices(const GridVertex& y, int k);

// Elementary simplex of the Kuhn triangulation: m vertices reached from a
// base vertex by a permutation walk. Cells tile the grid exactly; there are
// k^(m-1) of them.
struct KuhnCell {
  std::vector<GridVertex> vertices;

  PriceVector barycenter(int k) const;
  double diameter(int k) const;  // max pairwise Euclidean distance
};

struct SpernerOptions {
  // Width, in grid cells, of the smoothing window of the labeling demand:
  // buyer money splits over near-best goods with weights (ratio/best)^kappa
  // where kappa = k / smoothing. Keeping the window many cells wide makes
  // the label field continuous at cell scale, which is what confines
  // fully-labeled cells to the clearing point; a hard lowest-index
  // tie-break (or a window below cell size) instead scatters them along
  // bang-per-buck tie manifolds (see NOTES.md). The smoothed clearing
  // point sits within O(smoothing / k) of the true one, so the bias
  // vanishes alongside the cell diameter as the grid refines.
  double smoothing = 8.0;
  int max_resolution = 1 << 20;  // refinement guard
};

// Canonical aggregate demand at positive prices: every buyer puts the whole
// budget on the lowest-index bang-per-buck maximizer; demand[j] = money on
// good j / p[j]. Goods with p[j] = 0 report demand 1 (a free good always
// sells out). Requires a normalized instance (C == 1, sum B == 1, all
// valuations positive): throws kNotNormalized.
std::vector<double> aggregate_demand(const MarketInstance& inst,
                                     const PriceVector& prices);

// Label of a grid vertex: the lowest-index good with positive price whose
// (smoothed) demand is at most 1 — an "expensive" good. One always exists:
// at most sum(B) = 1 of money chases sum_j p[j] = 1 of priced supply. A
// zero-priced good is never the label, which is exactly the Sperner
// boundary condition.
std::size_t expensive_label(const MarketInstance& inst, const GridVertex& y,
                            int k, double smoothing = 8.0);

// The smoothed demand used by the labeling: buyer money splits over goods
// proportionally to (ratio/best)^kappa instead of all-or-nothing. Exposed
// for tests; kappa = max(k / smoothing, 1) in the scan.
std::vector<double> smoothed_demand(const MarketInstance& inst,
                                    const PriceVector& prices, double kappa);

void for_each_vertex(const SimplexGrid& grid,
                     const std::function<void(const GridVertex&)>& fn);
void for_each_kuhn_cell(const SimplexGrid& grid,
                        const std::function<void(const KuhnCell&)>& fn);
// Materialized cells for test-scale grids; guards against huge grids.
std::vector<KuhnCell> kuhn_cells(const SimplexGrid& grid);

// True when assigning `label` to vertex y respects the boundary rule
// (no label j on the facet y[j] = 0).
bool label_respects_boundary(const GridVertex& y, std::size_t label);

// Convex score whose unique minimizer over the simplex is the equilibrium
// price vector:
//   D(p) = sum_j p[j] + sum_i B[i] * log(max_j v[i][j] / p[j]).
// Used to pick among fully-labeled cells; exposed for tests.
double price_score(const MarketInstance& inst, const PriceVector& prices);

struct ScanResult {
  KuhnCell cell;                     // the selected fully-labeled cell
  std::vector<std::size_t> labels;   // labels of its vertices
  std::size_t fully_labeled = 0;     // how many cells were fully labeled
  double score = 0.0;                // price_score at the selected barycenter
};

// Scans every cell at the grid resolution and returns the fully-labeled
// cell whose barycenter has the lowest price_score (scan order breaks
// ties). Sperner's lemma guarantees at least one cell; none found means
// the labeling is buggy, so that asserts rather than returning an error.
ScanResult find_fully_labeled(const MarketInstance& inst,
                              const SimplexGrid& grid,
                              const SpernerOptions& opts = {});

struct RefineRound {
  int resolution = 0;
  KuhnCell cell;
  std::vector<std::size_t> labels;
  PriceVector barycenter;
  double diameter = 0.0;
  std::size_t fully_labeled = 0;
};

struct RefineResult {
  PriceVector prices;  // barycenter of the last round's cell
  std::vector<RefineRound> rounds;
};

// Doubles the resolution from k0, rescanning the whole grid each round,
// until the selected cell's diameter is at most target_diameter. Throws
// kGuardExceeded past opts.max_resolution and kNotNormalized for
// unnormalized instances.
RefineResult refine_clearing_prices(const MarketInstance& inst, int k0,
                                    double target_diameter,
                                    const SpernerOptions& opts = {});

}  // namespace fisher
