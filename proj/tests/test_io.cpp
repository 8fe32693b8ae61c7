#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "fisher/io.hpp"
#include "test_support.hpp"

using namespace fisher;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("fisher_io_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("instance round-trips bit for bit") {
  TempDir dir;
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 20; ++rep) {
    auto inst = fishtest::random_market(rng);
    if (rep % 3 == 0) inst.divisible = false;
    if (rep % 4 == 0) inst.alphas.assign(inst.buyers, 0.25 * rep);
    const std::string path = dir.file("inst.json");
    save_instance(inst, path);
    const MarketInstance back = load_instance(path);
    CHECK(back == inst);  // requires exact doubles, not approx
  }
}

TEST_CASE("the matching market survives a save/load cycle") {
  TempDir dir;
  const auto inst = fishtest::matching_market();
  save_instance(inst, dir.file("m.json"));
  CHECK(load_instance(dir.file("m.json")) == inst);
}

TEST_CASE("empty file is a parse error naming the file") {
  TempDir dir;
  std::ofstream(dir.file("empty.json")).close();
  try {
    load_instance(dir.file("empty.json"));
    FAIL("expected a throw");
  } catch (const MarketError& e) {
    CHECK(e.fault() == Fault::kBadInput);
    CHECK(std::string(e.what()).find("empty.json") != std::string::npos);
  }
}

TEST_CASE("missing file reports its path") {
  try {
    load_instance("/nonexistent/nowhere.json");
    FAIL("expected a throw");
  } catch (const MarketError& e) {
    CHECK(e.fault() == Fault::kBadInput);
    CHECK(std::string(e.what()).find("nowhere.json") != std::string::npos);
  }
}

TEST_CASE("unknown fields are rejected by name") {
  TempDir dir;
  {
    std::ofstream out(dir.file("bad.json"));
    out << R"({"buyers":1,"goods":1,"valuations":[[1.0]],"budgets":[1.0],)"
        << R"("capacities":[1.0],"wishlist":[2]})";
  }
  try {
    load_instance(dir.file("bad.json"));
    FAIL("expected a throw");
  } catch (const MarketError& e) {
    CHECK(e.fault() == Fault::kBadInput);
    CHECK(std::string(e.what()).find("wishlist") != std::string::npos);
  }
}

TEST_CASE("wrong-type fields are rejected with context") {
  TempDir dir;
  {
    std::ofstream out(dir.file("bad2.json"));
    out << R"({"buyers":1,"goods":1,"valuations":[[1.0]],)"
        << R"("budgets":"all of it","capacities":[1.0]})";
  }
  try {
    load_instance(dir.file("bad2.json"));
    FAIL("expected a throw");
  } catch (const MarketError& e) {
    CHECK(e.fault() == Fault::kBadInput);
    CHECK(std::string(e.what()).find("budgets") != std::string::npos);
  }
}

TEST_CASE("instance json uses the documented field names") {
  const Json j = instance_to_json(fishtest::symmetric2x2());
  CHECK(j.contains("buyers"));
  CHECK(j.contains("goods"));
  CHECK(j.contains("valuations"));
  CHECK(j.contains("budgets"));
  CHECK(j.contains("capacities"));
  CHECK(j["buyers"].get<std::size_t>() == 2);
  CHECK(j["valuations"][0][0].get<double>() == 2.0);
}

TEST_CASE("report round-trips through json") {
  EquilibriumReport rep;
  rep.allocation = Matrix(2, 2);
  rep.allocation(0, 0) = 1.0 / 3.0;
  rep.allocation(1, 1) = 0.125;
  rep.prices = {0.7071067811865476, 1.0};
  rep.utilities = {1.5, 2.5};
  rep.spend = {1.0, 1.0};
  rep.sold = {1.0, 0.125};
  rep.residuals.unspent = {0.0, -1e-17};
  rep.residuals.unsold = {0.0, 0.875};
  rep.max_kkt_residual = 3e-9;
  rep.kkt_ok = true;
  rep.clearing_ok = false;
  rep.flow_ok = true;
  rep.iterations = 421;
  rep.converged = true;

  const Json j = report_to_json(rep);
  const EquilibriumReport back = report_from_json(j);
  CHECK(back.allocation == rep.allocation);
  CHECK(back.prices == rep.prices);
  CHECK(back.utilities == rep.utilities);
  CHECK(back.spend == rep.spend);
  CHECK(back.sold == rep.sold);
  CHECK(back.residuals.unspent == rep.residuals.unspent);
  CHECK(back.residuals.unsold == rep.residuals.unsold);
  CHECK(back.max_kkt_residual == rep.max_kkt_residual);
  CHECK(back.kkt_ok == rep.kkt_ok);
  CHECK(back.clearing_ok == rep.clearing_ok);
  CHECK(back.flow_ok == rep.flow_ok);
  CHECK(back.iterations == rep.iterations);
  CHECK(back.converged == rep.converged);

  TempDir dir;
  save_report(rep, dir.file("r.json"));
  const EquilibriumReport back2 = load_report(dir.file("r.json"));
  CHECK(back2.prices == rep.prices);
  CHECK(back2.allocation == rep.allocation);
}

TEST_CASE("doubles keep full precision through serialization") {
  auto inst = fishtest::symmetric2x2();
  inst.valuations(0, 0) = 0.1 + 0.2;               // 0.30000000000000004
  inst.budgets[0] = 1.0 / 3.0;
  const Json j = instance_to_json(inst);
  const MarketInstance back = instance_from_json(j);
  CHECK(back.valuations(0, 0) == inst.valuations(0, 0));
  CHECK(back.budgets[0] == inst.budgets[0]);
}

TEST_CASE("matrix json shape errors are caught") {
  Json ragged = Json::array();
  ragged.push_back(Json::array({1.0, 2.0}));
  ragged.push_back(Json::array({3.0}));
  CHECK_THROWS_AS(matrix_from_json(ragged, "valuations"), MarketError);
}
