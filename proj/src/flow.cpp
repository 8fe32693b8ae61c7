#include "fisher/flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <string>

#include "fisher/eg_solver.hpp"

namespace fisher {

FlowNetwork build_equilibrium_network(const MarketInstance& inst,
                                      const PriceVector& prices,
                                      double rel_tie_tol,
                                      double abs_tie_tol) {
  validate_market(inst);
  if (prices.size() != inst.goods)
    throw MarketError(Fault::kDimensionMismatch,
                      "price vector length does not match goods");
  for (std::size_t j = 0; j < inst.goods; ++j)
    if (!(prices[j] > 0.0))
      throw MarketError(Fault::kZeroPrice,
                        "good " + std::to_string(j) +
                            " has nonpositive price; bang per buck undefined");

  FlowNetwork net;
  net.goods = inst.goods;
  net.buyers = inst.buyers;

  double money = 0.0;
  for (std::size_t j = 0; j < inst.goods; ++j)
    money += prices[j] * inst.capacities[j];
  for (double b : inst.budgets) money += b;
  net.infinite_capacity = 1.0 + money;

  for (std::size_t j = 0; j < inst.goods; ++j)
    net.arcs.push_back(
        {net.source(), net.good_node(j), prices[j] * inst.capacities[j]});
  for (std::size_t i = 0; i < inst.buyers; ++i) {
    const DemandSet d = demand_set(i, prices, inst, rel_tie_tol, abs_tie_tol);
    for (std::size_t j : d.goods)
      net.arcs.push_back(
          {net.good_node(j), net.buyer_node(i), net.infinite_capacity});
  }
  for (std::size_t i = 0; i < inst.buyers; ++i)
    net.arcs.push_back({net.buyer_node(i), net.sink(), inst.budgets[i]});
  return net;
}

FlowResult max_flow(const FlowNetwork& net) {
  const std::size_t nodes = net.node_count();
  // Forward arc e gets residual slot 2e, its reverse slot 2e+1.
  std::vector<double> residual(2 * net.arcs.size(), 0.0);
  std::vector<std::vector<std::size_t>> adj(nodes);
  for (std::size_t e = 0; e < net.arcs.size(); ++e) {
    residual[2 * e] = net.arcs[e].capacity;
    adj[net.arcs[e].from].push_back(2 * e);
    adj[net.arcs[e].to].push_back(2 * e + 1);
  }
  const auto head = [&](std::size_t slot) {
    return slot % 2 == 0 ? net.arcs[slot / 2].to : net.arcs[slot / 2].from;
  };

  FlowResult result;
  std::vector<std::size_t> parent_slot(nodes);
  std::vector<bool> seen(nodes);
  for (;;) {
    // BFS for the shortest augmenting path.
    std::fill(seen.begin(), seen.end(), false);
    std::deque<std::size_t> queue{net.source()};
    seen[net.source()] = true;
    while (!queue.empty() && !seen[net.sink()]) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t slot : adj[u]) {
        const std::size_t v = head(slot);
        if (seen[v] || residual[slot] <= 0.0) continue;
        seen[v] = true;
        parent_slot[v] = slot;
        queue.push_back(v);
      }
    }
    if (!seen[net.sink()]) break;

    double push = std::numeric_limits<double>::infinity();
    for (std::size_t v = net.sink(); v != net.source();) {
      const std::size_t slot = parent_slot[v];
      push = std::min(push, residual[slot]);
      v = slot % 2 == 0 ? net.arcs[slot / 2].from : net.arcs[slot / 2].to;
    }
    for (std::size_t v = net.sink(); v != net.source();) {
      const std::size_t slot = parent_slot[v];
      residual[slot] -= push;
      residual[slot ^ 1] += push;
      v = slot % 2 == 0 ? net.arcs[slot / 2].from : net.arcs[slot / 2].to;
    }
    result.value += push;
  }

  result.arc_flow.resize(net.arcs.size());
  for (std::size_t e = 0; e < net.arcs.size(); ++e)
    result.arc_flow[e] = net.arcs[e].capacity - residual[2 * e];
  // The last BFS marked exactly the residual-reachable nodes: a minimum cut.
  result.source_side.assign(seen.begin(), seen.end());
  return result;
}

VerifyResult verify_equilibrium(const MarketInstance& inst,
                                const PriceVector& prices, double tol) {
  VerifyResult out;
  const FlowNetwork net =
      build_equilibrium_network(inst, prices, kBangTieRelTol, 2.0 * tol);

  double revenue = 0.0;
  for (std::size_t j = 0; j < inst.goods; ++j)
    revenue += prices[j] * inst.capacities[j];
  out.money_gap = std::abs(revenue - inst.total_budget());
  if (out.money_gap > tol) return out;  // both cuts can never saturate

  out.flow_run = true;
  out.flow = max_flow(net);
  out.equilibrium = std::abs(out.flow.value - revenue) <= tol &&
                    std::abs(out.flow.value - inst.total_budget()) <= tol;

  out.allocation = Matrix(inst.buyers, inst.goods);
  for (std::size_t e = 0; e < net.arcs.size(); ++e) {
    const auto& arc = net.arcs[e];
    if (arc.from >= net.good_node(0) && arc.from < net.buyer_node(0) &&
        arc.to >= net.buyer_node(0) && arc.to < net.sink()) {
      const std::size_t j = arc.from - net.good_node(0);
      const std::size_t i = arc.to - net.buyer_node(0);
      out.allocation(i, j) = out.flow.arc_flow[e] / prices[j];
    }
  }
  return out;
}

std::string describe_network(const FlowNetwork& net) {
  std::ostringstream os;
  const auto name = [&](std::size_t node) -> std::string {
    if (node == net.source()) return "s";
    if (node == net.sink()) return "t";
    if (node < net.buyer_node(0))
      return "good[" + std::to_string(node - net.good_node(0)) + "]";
    return "buyer[" + std::to_string(node - net.buyer_node(0)) + "]";
  };
  os << "nodes: " << net.node_count() << " (s, " << net.goods << " goods, "
     << net.buyers << " buyers, t)\n";
  for (const auto& arc : net.arcs) {
    os << name(arc.from) << " -> " << name(arc.to) << "  cap ";
    if (arc.capacity >= net.infinite_capacity)
      os << "inf";
    else
      os << arc.capacity;
    os << '\n';
  }
  return os.str();
}

}  // namespace fisher
