#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fisher/ceei.hpp"
#include "test_support.hpp"

using namespace fisher;
using fishtest::make_market;

namespace {

MarketInstance favorites() {
  auto inst = make_market(2, 2, {3, 1, 1, 3}, {1, 1}, {1, 1});
  inst.divisible = false;
  return inst;
}

MarketInstance contested_single() {
  auto inst = make_market(2, 1, {2, 1}, {1, 1}, {1});
  inst.divisible = false;
  return inst;
}

MarketInstance one_buyer_units(double cap) {
  auto inst = make_market(1, 1, {1}, {1}, {cap});
  inst.divisible = false;
  return inst;
}

}  // namespace

TEST_CASE("epsilon_clearing boundary counts whole units") {
  const auto inst = one_buyer_units(10);
  DiscreteAllocation x(1, 1);

  x.at(0, 0) = 10;
  CHECK(epsilon_clearing(x, inst, 0.0));
  x.at(0, 0) = 9;
  CHECK_FALSE(epsilon_clearing(x, inst, 0.0));
  CHECK(epsilon_clearing(x, inst, 0.1));  // 10 - 9 <= 0.1 * 10, exactly
  x.at(0, 0) = 8;
  CHECK_FALSE(epsilon_clearing(x, inst, 0.1));
  CHECK(epsilon_clearing(x, inst, 0.2));
  x.at(0, 0) = 11;  // oversold never clears
  CHECK_FALSE(epsilon_clearing(x, inst, 0.5));
}

TEST_CASE("epsilon_clearing survives an unrepresentable epsilon") {
  // (1 - 1/3) * 3 = 2 exactly, but eps * cap in floating point falls just
  // short of 1; the verdict must still match the rational arithmetic.
  const auto inst = one_buyer_units(3);
  DiscreteAllocation x(1, 1);
  x.at(0, 0) = 2;
  CHECK(epsilon_clearing(x, inst, 1.0 / 3.0));
  x.at(0, 0) = 1;
  CHECK_FALSE(epsilon_clearing(x, inst, 1.0 / 3.0));
}

TEST_CASE("epsilon_clearing input contracts") {
  const auto inst = one_buyer_units(10);
  DiscreteAllocation x(1, 1);
  CHECK_THROWS_AS(epsilon_clearing(x, inst, 1.0), MarketError);
  CHECK_THROWS_AS(epsilon_clearing(x, inst, -0.1), MarketError);
  x.at(0, 0) = -2;
  CHECK_THROWS_AS(epsilon_clearing(x, inst, 0.5), MarketError);
  DiscreteAllocation wrong(2, 1);
  CHECK_THROWS_AS(epsilon_clearing(wrong, inst, 0.5), MarketError);
}

TEST_CASE("epsilon_clearing checks every good") {
  auto inst = make_market(1, 2, {1, 1}, {1}, {4, 4});
  inst.divisible = false;
  DiscreteAllocation x(1, 2);
  x.at(0, 0) = 4;
  x.at(0, 1) = 3;
  CHECK(epsilon_clearing(x, inst, 0.25));
  CHECK_FALSE(epsilon_clearing(x, inst, 0.2));
}

TEST_CASE("opposite favorites: the diagonal split is a CE") {
  const auto res = ceei_exists_bruteforce(favorites(), 100);
  REQUIRE(res.witness.has_value());
  const auto& w = *res.witness;
  const double grid_tol = 2.0 / 100.0;
  CHECK(std::abs(w.prices[0] - 1.0) <= grid_tol + 1e-12);
  CHECK(std::abs(w.prices[1] - 1.0) <= grid_tol + 1e-12);
  CHECK(w.allocation.at(0, 0) == 1);
  CHECK(w.allocation.at(0, 1) == 0);
  CHECK(w.allocation.at(1, 0) == 0);
  CHECK(w.allocation.at(1, 1) == 1);
  CHECK(res.resolution == 100);
  CHECK(res.allocations_tried >= 1);
}

TEST_CASE("the witness survives an independent audit") {
  const auto inst = favorites();
  const auto res = ceei_exists_bruteforce(inst, 100);
  REQUIRE(res.witness.has_value());
  const auto& w = *res.witness;
  const double grid_tol = inst.total_budget() / 100.0;

  // (c) full sale of every good.
  for (std::size_t j = 0; j < inst.goods; ++j)
    CHECK(w.allocation.col_sum(j) == static_cast<int>(inst.capacities[j]));

  // (b) everyone spends the budget, one money step of slack.
  // (a) no affordable integral bundle beats the assigned one.
  for (std::size_t i = 0; i < inst.buyers; ++i) {
    double spend = 0.0, assigned = 0.0;
    for (std::size_t j = 0; j < inst.goods; ++j) {
      spend += w.prices[j] * w.allocation.at(i, j);
      assigned += inst.valuations(i, j) * w.allocation.at(i, j);
    }
    CHECK(std::abs(spend - inst.budgets[i]) <= grid_tol + 1e-12);
    for (int b0 = 0; b0 <= 1; ++b0)
      for (int b1 = 0; b1 <= 1; ++b1) {
        const double cost = w.prices[0] * b0 + w.prices[1] * b1;
        if (cost > inst.budgets[i] + grid_tol) continue;
        const double value =
            inst.valuations(i, 0) * b0 + inst.valuations(i, 1) * b1;
        CHECK(value <= assigned + 1e-9);
      }
  }
}

TEST_CASE("one contested unit: no CE at any useful resolution") {
  // Either the holder overspends (|2 - 1| > grid_tol) or, once the grid is
  // coarse enough to forgive that, the loser can suddenly "afford" the good
  // and envies. No resolution threads the needle.
  for (unsigned r : {1u, 2u, 3u, 10u, 100u, 1000u}) {
    const auto res = ceei_exists_bruteforce(contested_single(), r);
    INFO("resolution=", r);
    CHECK_FALSE(res.witness.has_value());
    CHECK(res.allocations_tried == 2);  // the unit goes to one buyer or the other
  }
}

TEST_CASE("search contract: equal incomes, integral capacities, indivisible") {
  auto unequal = favorites();
  unequal.budgets = {1.0, 2.0};
  CHECK_THROWS_AS(ceei_exists_bruteforce(unequal, 10), MarketError);

  auto fractional = favorites();
  fractional.capacities = {1.5, 1.0};
  CHECK_THROWS_AS(ceei_exists_bruteforce(fractional, 10), MarketError);

  auto divisible = favorites();
  divisible.divisible = true;
  CHECK_THROWS_AS(ceei_exists_bruteforce(divisible, 10), MarketError);

  CHECK_THROWS_AS(ceei_exists_bruteforce(favorites(), 0), MarketError);
}

TEST_CASE("the enumeration guard trips before the work does") {
  auto big = make_market(2, 4, {1, 1, 1, 1, 1, 1, 1, 1}, {1, 1},
                         {9, 9, 9, 9});
  big.divisible = false;
  try {
    ceei_exists_bruteforce(big, 10);
    FAIL("expected a throw");
  } catch (const MarketError& e) {
    CHECK(e.fault() == Fault::kGuardExceeded);
  }
}

TEST_CASE("two identical buyers, two units: each takes one") {
  auto inst = make_market(2, 1, {1, 1}, {1, 1}, {2});
  inst.divisible = false;
  const auto res = ceei_exists_bruteforce(inst, 100);
  REQUIRE(res.witness.has_value());
  CHECK(res.witness->allocation.at(0, 0) == 1);
  CHECK(res.witness->allocation.at(1, 0) == 1);
  CHECK(res.witness->prices[0] == doctest::Approx(1.0).epsilon(0.03));
}
