#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fisher/market.hpp"

namespace fisher {

// Certification network for a priced market. Money flows
//   source -> good j   (capacity p[j] * C[j], the revenue the good can take)
//   good j -> buyer i  ("infinite", present only when j maximizes buyer i's
//                       bang per buck)
//   buyer i -> sink    (capacity B[i], the money the buyer can spend)
// Prices are equilibrium prices exactly when all source arcs and all sink
// arcs saturate simultaneously, i.e. max-flow = sum p[j]C[j] = sum B[i].
struct FlowNetwork {
  struct Arc {
    std::size_t from = 0;
    std::size_t to = 0;
    double capacity = 0.0;
  };

  std::size_t goods = 0;
  std::size_t buyers = 0;
  std::vector<Arc> arcs;
  // Stand-in for infinity: 1 + sum B + sum pC exceeds every cut that avoids
  // demand arcs, which is all that matters to the min cut.
  double infinite_capacity = 0.0;

  std::size_t node_count() const { return goods + buyers + 2; }
  std::size_t source() const { return 0; }
  std::size_t good_node(std::size_t j) const { return 1 + j; }
  std::size_t buyer_node(std::size_t i) const { return 1 + goods + i; }
  std::size_t sink() const { return 1 + goods + buyers; }
};

struct FlowResult {
  double value = 0.0;
  std::vector<double> arc_flow;        // parallel to FlowNetwork::arcs
  std::vector<bool> source_side;       // min cut: true = reachable from s
};

struct VerifyResult {
  bool equilibrium = false;
  double money_gap = 0.0;  // |sum p[j]C[j] - sum B[i]|
  bool flow_run = false;   // false when the money totals already disagree
  FlowResult flow;
  Allocation allocation;   // recovered from demand-arc flows when flow ran
};

// Throws kZeroPrice unless every p[j] > 0; bang per buck is undefined on
// free goods. Ties within rel_tie_tol (relative) or abs_tie_tol (absolute)
// of a buyer's best ratio all get arcs.
FlowNetwork build_equilibrium_network(const MarketInstance& inst,
                                      const PriceVector& prices,
                                      double rel_tie_tol = 1e-9,
                                      double abs_tie_tol = 0.0);

// Shortest-augmenting-path max flow. Deterministic for a given arc order;
// the graphs here have at most buyers + goods + 2 nodes, so no need for
// anything fancier.
FlowResult max_flow(const FlowNetwork& net);

// The if-and-only-if test: true exactly when max-flow, sum p[j]C[j] and
// sum B[i] agree within tol. A money-total mismatch is decided without
// running the flow. On a run, x[i][j] = flow(j -> i) / p[j] is returned;
// when the verdict is true it is an equilibrium allocation.
//
// Demand arcs use an absolute tie window of 2*tol on top of the relative
// floor: prices computed to residual tol leave bought goods up to 2*tol
// below the best bang per buck, and without the widened arcs the flow
// would starve on exactly the prices the test is meant to accept.
VerifyResult verify_equilibrium(const MarketInstance& inst,
                                const PriceVector& prices,
                                double tol = kDefaultTolerance);

// One arc per line, for debugging: "s -> good[0]  cap 2", etc.
std::string describe_network(const FlowNetwork& net);

}  // namespace fisher
