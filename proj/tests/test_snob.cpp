#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fisher/eg_solver.hpp"
#include "fisher/snob.hpp"
#include "test_support.hpp"

using namespace fisher;
using fishtest::make_market;
using fishtest::symmetric2x2;

namespace {

SnobMarket one_good_rivals() {
  SnobMarket snob;
  snob.market = make_market(2, 1, {1, 1}, {1, 1}, {1});
  snob.alphas = {1.0, 1.0};
  return snob;
}

Allocation random_positive(std::mt19937_64& rng, std::size_t n,
                           std::size_t m) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Allocation x(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) x(i, j) = u(rng);
  return x;
}

// Exactly n x m, unlike fishtest::random_market whose sizes are random.
MarketInstance fixed_market(std::mt19937_64& rng, std::size_t n,
                            std::size_t m) {
  std::uniform_real_distribution<double> val(0.1, 1.0);
  MarketInstance inst;
  inst.buyers = n;
  inst.goods = m;
  inst.valuations = Matrix(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) inst.valuations(i, j) = val(rng);
  inst.budgets.assign(n, 1.0);
  inst.capacities.assign(m, 1.0);
  return inst;
}

}  // namespace

TEST_CASE("snob_share_utility sums ownership shares") {
  Allocation x(2, 2);
  x(0, 0) = 1.0;
  x(1, 1) = 1.0;
  CHECK(snob_share_utility(x, 0) == doctest::Approx(1.0));
  CHECK(snob_share_utility(x, 1) == doctest::Approx(1.0));

  x(1, 0) = 1.0;  // split good 0
  CHECK(snob_share_utility(x, 0) == doctest::Approx(0.5));
  CHECK(snob_share_utility(x, 1) == doctest::Approx(1.5));

  Allocation empty_col(2, 2);
  empty_col(0, 0) = 1.0;  // nobody holds good 1
  CHECK(snob_share_utility(empty_col, 0) == doctest::Approx(1.0));
  CHECK(snob_share_utility(empty_col, 1) == doctest::Approx(0.0));
}

TEST_CASE("snob_utility: sole owner of the good scores its full value") {
  const auto snob = one_good_rivals();
  Allocation x(2, 1);
  x(0, 0) = 1.0;
  CHECK(snob_utility(snob, x, 0) == doctest::Approx(1.0));
  CHECK(snob_utility(snob, x, 1) == doctest::Approx(0.0));

  // Half the good, unowned remainder: allocated-total share is still 1,
  // capacity share drops to 1/2.
  Allocation half(2, 1);
  half(0, 0) = 0.5;
  CHECK(snob_utility(snob, half, 0) == doctest::Approx(0.5));
  CHECK(snob_utility(snob, half, 0, ShareBasis::kCapacity) ==
        doctest::Approx(0.25));

  // An even split halves the share.
  Allocation even(2, 1);
  even(0, 0) = even(1, 0) = 0.5;
  CHECK(snob_utility(snob, even, 0) == doctest::Approx(0.25));
  CHECK(snob_objective(snob, even) == doctest::Approx(0.5));
}

TEST_CASE("alpha = 0 recovers linear utility exactly") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 30; ++rep) {
    const auto inst = fishtest::random_market(rng, 4, 4, 0.1);
    SnobMarket snob{inst, std::vector<double>(inst.buyers, 0.0)};
    const auto x = random_positive(rng, inst.buyers, inst.goods);
    for (std::size_t i = 0; i < inst.buyers; ++i) {
      CHECK(snob_utility(snob, x, i) ==
            doctest::Approx(linear_utility(inst, x, i)));
      CHECK(snob_utility(snob, x, i, ShareBasis::kCapacity) ==
            doctest::Approx(linear_utility(inst, x, i)));
    }
  }
}

TEST_CASE("snob_from_instance defaults alphas to zero or copies them") {
  auto inst = symmetric2x2();
  auto snob = snob_from_instance(inst);
  CHECK(snob.alphas == std::vector<double>{0.0, 0.0});
  inst.alphas = {0.5, 2.0};
  snob = snob_from_instance(inst);
  CHECK(snob.alphas == std::vector<double>{0.5, 2.0});
}

TEST_CASE("utility varies continuously in alpha") {
  std::mt19937_64 rng(12);
  const auto inst = fixed_market(rng, 3, 3);
  const auto x = random_positive(rng, inst.buyers, inst.goods);
  SnobMarket base{inst, std::vector<double>(inst.buyers, 0.0)};
  SnobMarket tiny{inst, std::vector<double>(inst.buyers, 1e-6)};
  for (std::size_t i = 0; i < inst.buyers; ++i)
    CHECK(std::abs(snob_utility(tiny, x, i) - snob_utility(base, x, i)) <
          1e-4);
}

TEST_CASE("bigger rival holdings never help") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = fixed_market(rng, 3, 3);
    SnobMarket snob{inst, {1.0, 0.5, 2.0}};
    auto x = random_positive(rng, 3, 3);
    const double before = snob_utility(snob, x, 0);
    for (std::size_t j = 0; j < 3; ++j) x(1, j) += 0.5;  // rival bulks up
    CHECK(snob_utility(snob, x, 0) <= before + 1e-12);
  }
}

TEST_CASE("scaling every holding scales utility linearly") {
  std::mt19937_64 rng(14);
  const auto inst = fixed_market(rng, 3, 3);
  SnobMarket snob{inst, {0.7, 1.3, 0.2}};
  const auto x = random_positive(rng, 3, 3);
  auto scaled = x;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) scaled(i, j) *= 0.35;
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(snob_utility(snob, scaled, i) ==
          doctest::Approx(0.35 * snob_utility(snob, x, i)));
}

TEST_CASE("share bases coincide exactly at full clearing") {
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 10; ++rep) {
    const auto inst = fixed_market(rng, 3, 3);
    SnobMarket snob{inst, {0.9, 0.4, 1.7}};
    auto x = random_positive(rng, 3, 3);
    for (std::size_t j = 0; j < 3; ++j) {  // rescale columns onto C_j
      double total = 0.0;
      for (std::size_t i = 0; i < 3; ++i) total += x(i, j);
      for (std::size_t i = 0; i < 3; ++i)
        x(i, j) *= inst.capacities[j] / total;
    }
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(snob_utility(snob, x, i) ==
            doctest::Approx(snob_utility(snob, x, i, ShareBasis::kCapacity)));
  }
}

TEST_CASE("brute force hands the contested good to one buyer") {
  const auto snob = one_good_rivals();
  const auto opt = brute_force_snob_optimum(snob, {1.0}, 11);
  CHECK(opt.value == doctest::Approx(1.0));
  // Lexicographically smallest argmax: buyer 0 empty-handed, buyer 1 full.
  CHECK(opt.allocation(0, 0) == doctest::Approx(0.0));
  CHECK(opt.allocation(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("brute force respects budgets") {
  auto snob = one_good_rivals();
  snob.market.budgets = {0.5, 0.5};  // nobody can afford the whole good
  const auto opt = brute_force_snob_optimum(snob, {1.0}, 11);
  CHECK(opt.value == doctest::Approx(0.5));
  CHECK(opt.allocation(0, 0) == doctest::Approx(0.0));
  CHECK(opt.allocation(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("brute force with alpha = 0 solves the linear problem") {
  SnobMarket snob;
  snob.market = make_market(1, 2, {2, 1}, {1}, {1, 1});
  snob.alphas = {0.0};
  const auto opt = brute_force_snob_optimum(snob, {1.0, 1.0}, 11);
  CHECK(opt.value == doctest::Approx(2.0));
  CHECK(opt.allocation(0, 0) == doctest::Approx(1.0));
  CHECK(opt.allocation(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("brute force guards its grid size") {
  SnobMarket snob{symmetric2x2(), {1.0, 1.0}};
  try {
    brute_force_snob_optimum(snob, {1.0, 1.0}, 10000);
    FAIL("expected a throw");
  } catch (const MarketError& e) {
    CHECK(e.fault() == Fault::kGuardExceeded);
  }
}

TEST_CASE("corner check: the planner optimum shuns mixing") {
  for (unsigned grid : {5u, 11u, 101u}) {
    const auto res = corner_theorem_check(grid);
    INFO("grid=", grid);
    CHECK(res.pass);
    CHECK(res.max_value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.best_interior < 1.0 - 1e-9);
    const bool corner = (res.first_holding == doctest::Approx(1.0) &&
                         res.second_holding == doctest::Approx(0.0)) ||
                        (res.first_holding == doctest::Approx(0.0) &&
                         res.second_holding == doctest::Approx(1.0));
    CHECK(corner);
  }
}

TEST_CASE("clearing search with alpha = 0 finds the EG prices") {
  SnobMarket snob{symmetric2x2(), {0.0, 0.0}};
  const auto cands = snob_clearing_search(snob, 24, 13);
  REQUIRE(!cands.empty());
  const auto& best = cands.front();
  // Money grid step: sum B / resolution = 2/24.
  const double step = 2.0 / 24.0;
  const auto solved = solve_eg(symmetric2x2(), {});
  REQUIRE(solved.converged);
  CHECK(std::abs(best.prices[0] - solved.prices[0]) <= step + 1e-12);
  CHECK(std::abs(best.prices[1] - solved.prices[1]) <= step + 1e-12);
  CHECK(best.residual_norm < 0.2);
  // Sorted by residual norm.
  for (std::size_t t = 1; t < cands.size(); ++t)
    CHECK(cands[t - 1].residual_norm <= cands[t].residual_norm + 1e-12);
}

TEST_CASE("clearing search reports rising residuals away from clearing") {
  // With a positive alpha on the one-good rivalry market the search still
  // runs and returns candidates on the price ray p = 2 (sum B = 2, C = 1).
  const auto snob = one_good_rivals();
  const auto cands = snob_clearing_search(snob, 8, 5);
  REQUIRE(!cands.empty());
  for (const auto& c : cands) {
    CHECK(c.prices.size() == 1);
    CHECK(c.prices[0] == doctest::Approx(2.0));
    CHECK(c.residuals.unspent.size() == 2);
  }
}
