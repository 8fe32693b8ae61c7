// fishmark: Fisher-market toolkit front end.
//
// Subcommands: solve, verify, sperner, snob, ceei, check-instance. Every run
// prints one report document (shared envelope, per-command payload) to
// stdout and, with --report PATH, writes the same document to a file.
// Exit codes: 0 = success / verdict true; 1 = verdict false or solver not
// converged (report still produced); 2 = usage, parse, or input error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fisher/ceei.hpp"
#include "fisher/eg_solver.hpp"
#include "fisher/flow.hpp"
#include "fisher/io.hpp"
#include "fisher/market.hpp"
#include "fisher/snob.hpp"
#include "fisher/sperner.hpp"

namespace {

using fisher::Json;

constexpr const char* kSchema = "fishmark.report.v1";
constexpr const char* kToleranceEnvVar = "FISHMARK_TOLERANCE";

// Default tolerance, overridable by FISHMARK_TOLERANCE; an explicit --tol
// flag beats both.
double default_tolerance() {
  if (const char* env = std::getenv(kToleranceEnvVar)) {
    try {
      const double tol = std::stod(env);
      if (tol > 0.0) return tol;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid " << kToleranceEnvVar << "="
              << env << "\n";
  }
  return fisher::kDefaultTolerance;
}

Json vec_json(const std::vector<double>& v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

int emit(const std::string& command, const std::string& instance_path,
         const Json& parameters, bool verdict, const Json& payload,
         const std::string& report_path) {
  Json doc;
  doc["schema"] = kSchema;
  doc["command"] = command;
  doc["instance"] = instance_path;
  doc["parameters"] = parameters;
  doc["verdict"] = verdict;
  doc["payload"] = payload;
  std::cout << doc.dump(2) << '\n';
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) {
      std::cerr << "error: cannot write report to " << report_path << "\n";
      return 2;
    }
    out << doc.dump(2) << '\n';
  }
  return verdict ? 0 : 1;
}

std::vector<double> parse_price_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double value = std::stod(item, &used);
      while (used < item.size() && std::isspace(item[used])) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(value);
    } catch (const std::exception&) {
      throw fisher::MarketError(fisher::Fault::kBadInput,
                                "cannot parse price list entry \"" + item +
                                    "\"");
    }
  }
  if (out.empty())
    throw fisher::MarketError(fisher::Fault::kBadInput, "empty price list");
  return out;
}

struct SolveArgs {
  std::string instance, report;
  double tol = 0.0;
  std::size_t max_iterations = 200000;
  double damping = 1.0;
  std::uint64_t seed = 0;
};

int run_solve(const SolveArgs& args) {
  const fisher::MarketInstance inst = fisher::load_instance(args.instance);
  fisher::SolverConfig cfg;
  cfg.tolerance = args.tol;
  cfg.max_iterations = args.max_iterations;
  cfg.damping = args.damping;
  cfg.seed = args.seed;
  fisher::EquilibriumReport rep = fisher::solve_eg(inst, cfg);
  if (rep.converged) {
    const fisher::VerifyResult flow =
        fisher::verify_equilibrium(inst, rep.prices, cfg.tolerance);
    rep.flow_ok = flow.equilibrium;
  }
  Json params;
  params["tolerance"] = cfg.tolerance;
  params["max_iterations"] = cfg.max_iterations;
  params["damping"] = cfg.damping;
  params["seed"] = cfg.seed;
  const bool verdict =
      rep.converged && rep.kkt_ok && rep.clearing_ok && rep.flow_ok;
  return emit("solve", args.instance, params, verdict,
              fisher::report_to_json(rep), args.report);
}

struct VerifyArgs {
  std::string instance, report, from_report, prices_text;
  double tol = 0.0;
};

// Accepts both a bare report document and the envelope this tool writes
// (prices live under "payload" there).
fisher::EquilibriumReport load_report_or_envelope(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw fisher::MarketError(fisher::Fault::kBadInput,
                              path + ": cannot open report");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw fisher::MarketError(fisher::Fault::kBadInput,
                              path + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("schema") && doc.contains("payload"))
    return fisher::report_from_json(doc.at("payload"));
  return fisher::report_from_json(doc);
}

int run_verify(const VerifyArgs& args) {
  const fisher::MarketInstance inst = fisher::load_instance(args.instance);
  fisher::PriceVector prices;
  if (!args.from_report.empty()) {
    prices = load_report_or_envelope(args.from_report).prices;
  } else {
    prices = parse_price_list(args.prices_text);
  }
  const fisher::VerifyResult res =
      fisher::verify_equilibrium(inst, prices, args.tol);
  Json params;
  params["tolerance"] = args.tol;
  params["prices"] = vec_json(prices);
  Json payload;
  payload["equilibrium"] = res.equilibrium;
  payload["money_gap"] = res.money_gap;
  payload["flow_run"] = res.flow_run;
  if (res.flow_run) {
    payload["max_flow"] = res.flow.value;
    payload["allocation"] = fisher::matrix_to_json(res.allocation);
  }
  return emit("verify", args.instance, params, res.equilibrium, payload,
              args.report);
}

struct SpernerArgs {
  std::string instance, report;
  int k0 = 16;
  double target_diameter = 1e-4;
  double smoothing = 8.0;
  double tol = 0.0;
};

int run_sperner(const SpernerArgs& args) {
  const fisher::MarketInstance raw = fisher::load_instance(args.instance);
  const fisher::MarketInstance inst = fisher::normalize_market(raw);
  fisher::SpernerOptions opts;
  opts.smoothing = args.smoothing;
  const fisher::RefineResult res = fisher::refine_clearing_prices(
      inst, args.k0, args.target_diameter, opts);

  // Map the unit-simplex prices back to the original units: the normalized
  // p' relates to original prices by p[j] = p'[j] * sum(B) / C[j].
  fisher::PriceVector rescaled(raw.goods);
  const double total_budget = raw.total_budget();
  for (std::size_t j = 0; j < raw.goods; ++j)
    rescaled[j] = res.prices[j] * total_budget / raw.capacities[j];

  const double final_diameter = res.rounds.back().diameter;
  // The found cell pins prices to within its diameter; verify at a
  // tolerance proportional to that (in money units).
  const double verify_tol = 20.0 * final_diameter * total_budget;
  const fisher::VerifyResult check =
      fisher::verify_equilibrium(raw, rescaled, verify_tol);

  Json params;
  params["k0"] = args.k0;
  params["target_diameter"] = args.target_diameter;
  params["smoothing"] = args.smoothing;
  Json rounds = Json::array();
  for (const fisher::RefineRound& r : res.rounds) {
    Json jr;
    jr["resolution"] = r.resolution;
    jr["diameter"] = r.diameter;
    jr["fully_labeled"] = r.fully_labeled;
    jr["barycenter"] = vec_json(r.barycenter);
    Json cell = Json::array();
    for (const fisher::GridVertex& y : r.cell.vertices) {
      Json jy = Json::array();
      for (int c : y) jy.push_back(c);
      cell.push_back(std::move(jy));
    }
    jr["cell"] = cell;
    Json labels = Json::array();
    for (std::size_t l : r.labels) labels.push_back(l);
    jr["labels"] = labels;
    rounds.push_back(std::move(jr));
  }
  Json payload;
  payload["prices_normalized"] = vec_json(res.prices);
  payload["prices_rescaled"] = vec_json(rescaled);
  payload["final_diameter"] = final_diameter;
  payload["rounds"] = rounds;
  payload["verify_tolerance"] = verify_tol;
  payload["verify_equilibrium"] = check.equilibrium;
  return emit("sperner", args.instance, params, true, payload, args.report);
}

struct SnobArgs {
  std::string instance, report, basis_text = "allocated";
  unsigned price_resolution = 24;
  unsigned alloc_grid = 13;
  unsigned corner_grid = 0;  // nonzero switches to the corner check
  std::size_t top = 10;
};

int run_snob(const SnobArgs& args) {
  Json params;
  if (args.corner_grid > 0) {
    const fisher::CornerCheck check =
        fisher::corner_theorem_check(args.corner_grid);
    params["corner_grid"] = args.corner_grid;
    Json payload;
    payload["pass"] = check.pass;
    payload["max_value"] = check.max_value;
    payload["holdings"] = Json::array({check.first_holding,
                                       check.second_holding});
    payload["best_interior"] = check.best_interior;
    return emit("snob", args.instance, params, check.pass, payload,
                args.report);
  }

  const fisher::MarketInstance inst = fisher::load_instance(args.instance);
  const fisher::SnobMarket snob = fisher::snob_from_instance(inst);
  const fisher::ShareBasis basis = args.basis_text == "capacity"
                                       ? fisher::ShareBasis::kCapacity
                                       : fisher::ShareBasis::kAllocatedTotal;
  const std::vector<fisher::ClearingCandidate> candidates =
      fisher::snob_clearing_search(snob, args.price_resolution,
                                   args.alloc_grid, basis);
  params["price_resolution"] = args.price_resolution;
  params["alloc_grid"] = args.alloc_grid;
  params["share_basis"] = args.basis_text;
  params["top"] = args.top;
  Json list = Json::array();
  for (std::size_t c = 0; c < candidates.size() && c < args.top; ++c) {
    const fisher::ClearingCandidate& cand = candidates[c];
    Json jc;
    jc["prices"] = vec_json(cand.prices);
    jc["allocation"] = fisher::matrix_to_json(cand.allocation);
    jc["unspent"] = vec_json(cand.residuals.unspent);
    jc["unsold"] = vec_json(cand.residuals.unsold);
    jc["residual_norm"] = cand.residual_norm;
    list.push_back(std::move(jc));
  }
  Json payload;
  payload["candidates"] = list;
  payload["searched"] = candidates.size();
  return emit("snob", args.instance, params, true, payload, args.report);
}

struct CeeiArgs {
  std::string instance, report, allocation_report;
  unsigned resolution = 100;
  double epsilon = -1.0;  // >= 0 switches to the clearing predicate
};

int run_ceei(const CeeiArgs& args) {
  const fisher::MarketInstance inst = fisher::load_instance(args.instance);
  Json params;
  if (args.epsilon >= 0.0) {
    if (args.allocation_report.empty())
      throw fisher::MarketError(fisher::Fault::kBadInput,
                                "--epsilon needs --allocation REPORT.json");
    const fisher::EquilibriumReport source =
        load_report_or_envelope(args.allocation_report);
    fisher::DiscreteAllocation alloc(source.allocation.rows(),
                                     source.allocation.cols());
    for (std::size_t i = 0; i < source.allocation.rows(); ++i)
      for (std::size_t j = 0; j < source.allocation.cols(); ++j) {
        const double units = source.allocation(i, j);
        if (units < 0.0 || units != static_cast<int>(units))
          throw fisher::MarketError(
              fisher::Fault::kBadInput,
              "allocation in report is not a nonnegative integer matrix");
        alloc.at(i, j) = static_cast<int>(units);
      }
    const bool clears = fisher::epsilon_clearing(alloc, inst, args.epsilon);
    params["epsilon"] = args.epsilon;
    params["allocation"] = args.allocation_report;
    Json payload;
    payload["clears"] = clears;
    return emit("ceei", args.instance, params, clears, payload, args.report);
  }

  const fisher::CeeiSearchResult res =
      fisher::ceei_exists_bruteforce(inst, args.resolution);
  params["resolution"] = args.resolution;
  Json payload;
  payload["witness_found"] = res.witness.has_value();
  payload["resolution_searched"] = res.resolution;
  payload["allocations_tried"] = res.allocations_tried;
  if (res.witness) {
    payload["prices"] = vec_json(res.witness->prices);
    Json rows = Json::array();
    for (std::size_t i = 0; i < res.witness->allocation.buyers; ++i) {
      Json row = Json::array();
      for (std::size_t j = 0; j < res.witness->allocation.goods; ++j)
        row.push_back(res.witness->allocation.at(i, j));
      rows.push_back(std::move(row));
    }
    payload["allocation"] = rows;
  }
  return emit("ceei", args.instance, params, res.witness.has_value(), payload,
              args.report);
}

struct CheckArgs {
  std::string instance, report;
};

int run_check(const CheckArgs& args) {
  Json payload;
  bool valid = true;
  try {
    const fisher::MarketInstance inst = fisher::load_instance(args.instance);
    payload["buyers"] = inst.buyers;
    payload["goods"] = inst.goods;
    payload["divisible"] = inst.divisible;
    payload["normalized"] = fisher::is_normalized(inst);
    payload["total_budget"] = inst.total_budget();
  } catch (const fisher::MarketError& e) {
    if (e.fault() == fisher::Fault::kBadInput) throw;  // unreadable: exit 2
    valid = false;
    payload["fault"] = fisher::fault_name(e.fault());
    payload["message"] = e.what();
  }
  payload["valid"] = valid;
  return emit("check-instance", args.instance, Json::object(), valid, payload,
              args.report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher market equilibrium toolkit"};
  app.require_subcommand(1);
  const double tol_default = default_tolerance();

  SolveArgs solve_args;
  solve_args.tol = tol_default;
  CLI::App* solve = app.add_subcommand(
      "solve", "Compute a market equilibrium for a divisible instance");
  solve->add_option("instance", solve_args.instance, "instance JSON file")
      ->required();
  solve->add_option("--report", solve_args.report, "also write report here");
  solve->add_option("--tol", solve_args.tol, "residual tolerance");
  solve->add_option("--max-iterations", solve_args.max_iterations);
  solve->add_option("--damping", solve_args.damping, "step fraction (0,1]");
  solve->add_option("--seed", solve_args.seed,
                    "nonzero: random start on the valuation support");

  VerifyArgs verify_args;
  verify_args.tol = tol_default;
  CLI::App* verify = app.add_subcommand(
      "verify", "Certify prices via the equilibrium flow network");
  verify->add_option("instance", verify_args.instance)->required();
  verify->add_option("--prices", verify_args.prices_text,
                     "comma-separated price vector");
  verify->add_option("--from-report", verify_args.from_report,
                     "read prices from a solve report");
  verify->add_option("--report", verify_args.report);
  verify->add_option("--tol", verify_args.tol);

  SpernerArgs sperner_args;
  sperner_args.tol = tol_default;
  CLI::App* sperner = app.add_subcommand(
      "sperner", "Clearing prices by simplicial search (normalizes first)");
  sperner->add_option("instance", sperner_args.instance)->required();
  sperner->add_option("--k0", sperner_args.k0, "starting resolution");
  sperner->add_option("--target-diameter", sperner_args.target_diameter);
  sperner->add_option("--smoothing", sperner_args.smoothing,
                      "smoothing window width, in grid cells");
  sperner->add_option("--report", sperner_args.report);

  SnobArgs snob_args;
  CLI::App* snob = app.add_subcommand(
      "snob", "Snob-market exploration: clearing search or corner check");
  snob->add_option("instance", snob_args.instance,
                   "instance JSON file (not needed with --corner-grid)");
  snob->add_option("--price-resolution", snob_args.price_resolution,
                   "money steps across the price simplex");
  snob->add_option("--alloc-grid", snob_args.alloc_grid,
                   "points per axis in best responses");
  snob->add_option("--share-basis", snob_args.basis_text,
                   "allocated (as written) or capacity");
  snob->add_option("--corner-grid", snob_args.corner_grid,
                   "run the corner-theorem check at this grid instead");
  snob->add_option("--top", snob_args.top, "candidates to include in report");
  snob->add_option("--report", snob_args.report);

  CeeiArgs ceei_args;
  CLI::App* ceei = app.add_subcommand(
      "ceei", "Equal-incomes CE search for tiny indivisible markets");
  ceei->add_option("instance", ceei_args.instance)->required();
  ceei->add_option("--resolution", ceei_args.resolution, "price grid steps");
  ceei->add_option("--epsilon", ceei_args.epsilon,
                   "check epsilon-clearing of --allocation instead");
  ceei->add_option("--allocation", ceei_args.allocation_report,
                   "report file with an integral allocation");
  ceei->add_option("--report", ceei_args.report);

  CheckArgs check_args;
  CLI::App* check = app.add_subcommand(
      "check-instance", "Validate an instance file and describe it");
  check->add_option("instance", check_args.instance)->required();
  check->add_option("--report", check_args.report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (solve->parsed()) return run_solve(solve_args);
    if (verify->parsed()) {
      if (verify_args.prices_text.empty() == verify_args.from_report.empty()) {
        std::cerr << "error: verify needs exactly one of --prices or "
                     "--from-report\n";
        return 2;
      }
      return run_verify(verify_args);
    }
    if (sperner->parsed()) return run_sperner(sperner_args);
    if (snob->parsed()) {
      if (snob_args.corner_grid == 0 && snob_args.instance.empty()) {
        std::cerr << "error: snob needs an instance file (or --corner-grid "
                     "for the built-in check)\n";
        return 2;
      }
      return run_snob(snob_args);
    }
    if (ceei->parsed()) return run_ceei(ceei_args);
    if (check->parsed()) return run_check(check_args);
  } catch (const fisher::MarketError& e) {
    std::cerr << "error (" << fisher::fault_name(e.fault()) << "): "
              << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
