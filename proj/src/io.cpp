#include "fisher/io.hpp"

#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace fisher {

namespace {

[[noreturn]] void bad(const std::string& msg) {
  throw MarketError(Fault::kBadInput, msg);
}

void reject_unknown_keys(const Json& doc,
                         std::initializer_list<const char*> allowed,
                         const std::string& what) {
  for (const auto& item : doc.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) { known = true; break; }
    if (!known) bad("unknown field \"" + item.key() + "\" in " + what);
  }
}

double number_at(const Json& v, const std::string& where) {
  if (!v.is_number()) bad(where + " must be a number");
  return v.get<double>();
}

std::vector<double> vector_field(const Json& doc, const std::string& field,
                                 std::size_t expected) {
  if (!doc.contains(field)) bad("missing field \"" + field + "\"");
  const Json& arr = doc.at(field);
  if (!arr.is_array()) bad("\"" + field + "\" must be an array");
  if (arr.size() != expected)
    bad("\"" + field + "\" has " + std::to_string(arr.size()) +
        " entries, expected " + std::to_string(expected));
  std::vector<double> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(number_at(arr[i], "\"" + field + "\"[" + std::to_string(i) + "]"));
  return out;
}

Json vector_to_json(const std::vector<double>& v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

std::size_t size_field(const Json& doc, const std::string& field) {
  if (!doc.contains(field)) bad("missing field \"" + field + "\"");
  const Json& v = doc.at(field);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0)
    bad("\"" + field + "\" must be a positive integer");
  return v.get<std::size_t>();
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (double v : m.row(i)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& doc, const std::string& field) {
  if (!doc.is_array() || doc.empty() || !doc[0].is_array())
    bad("\"" + field + "\" must be an array of rows");
  const std::size_t rows = doc.size();
  const std::size_t cols = doc[0].size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!doc[i].is_array() || doc[i].size() != cols)
      bad("\"" + field + "\" rows have inconsistent lengths");
    for (std::size_t j = 0; j < cols; ++j)
      m(i, j) = number_at(doc[i][j], "\"" + field + "\" entry");
  }
  return m;
}

Json instance_to_json(const MarketInstance& inst) {
  Json doc;
  doc["buyers"] = inst.buyers;
  doc["goods"] = inst.goods;
  doc["valuations"] = matrix_to_json(inst.valuations);
  doc["budgets"] = vector_to_json(inst.budgets);
  doc["capacities"] = vector_to_json(inst.capacities);
  doc["divisible"] = inst.divisible;
  if (!inst.alphas.empty()) doc["alphas"] = vector_to_json(inst.alphas);
  return doc;
}

MarketInstance instance_from_json(const Json& doc) {
  if (!doc.is_object()) bad("instance document must be a JSON object");
  reject_unknown_keys(doc,
                      {"buyers", "goods", "valuations", "budgets",
                       "capacities", "divisible", "alphas"},
                      "instance");
  MarketInstance inst;
  inst.buyers = size_field(doc, "buyers");
  inst.goods = size_field(doc, "goods");
  if (!doc.contains("valuations")) bad("missing field \"valuations\"");
  inst.valuations = matrix_from_json(doc.at("valuations"), "valuations");
  inst.budgets = vector_field(doc, "budgets", inst.buyers);
  inst.capacities = vector_field(doc, "capacities", inst.goods);
  if (doc.contains("divisible")) {
    if (!doc.at("divisible").is_boolean()) bad("\"divisible\" must be a bool");
    inst.divisible = doc.at("divisible").get<bool>();
  }
  if (doc.contains("alphas"))
    inst.alphas = vector_field(doc, "alphas", inst.buyers);
  validate_market(inst);
  return inst;
}

namespace {

Json read_json_file(const std::string& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + kind + " file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    bad("cannot parse " + kind + " file " + path + ": " + e.what());
  }
}

void write_json_file(const Json& doc, const std::string& path,
                     const std::string& kind) {
  std::ofstream out(path);
  if (!out) bad("cannot open " + kind + " file for writing: " + path);
  out << doc.dump(2) << '\n';
  if (!out) bad("failed writing " + kind + " file: " + path);
}

}  // namespace

MarketInstance load_instance(const std::string& path) {
  try {
    return instance_from_json(read_json_file(path, "instance"));
  } catch (const MarketError& e) {
    if (e.fault() == Fault::kBadInput &&
        std::string(e.what()).find(path) == std::string::npos)
      bad(path + ": " + e.what());
    throw;
  }
}

void save_instance(const MarketInstance& inst, const std::string& path) {
  write_json_file(instance_to_json(inst), path, "instance");
}

Json report_to_json(const EquilibriumReport& r) {
  Json doc;
  doc["allocation"] = matrix_to_json(r.allocation);
  doc["prices"] = vector_to_json(r.prices);
  doc["utilities"] = vector_to_json(r.utilities);
  doc["spend"] = vector_to_json(r.spend);
  doc["sold"] = vector_to_json(r.sold);
  doc["unspent"] = vector_to_json(r.residuals.unspent);
  doc["unsold"] = vector_to_json(r.residuals.unsold);
  doc["max_kkt_residual"] = r.max_kkt_residual;
  doc["kkt_ok"] = r.kkt_ok;
  doc["clearing_ok"] = r.clearing_ok;
  doc["flow_ok"] = r.flow_ok;
  doc["iterations"] = r.iterations;
  doc["converged"] = r.converged;
  return doc;
}

EquilibriumReport report_from_json(const Json& doc) {
  if (!doc.is_object()) bad("report document must be a JSON object");
  reject_unknown_keys(doc,
                      {"allocation", "prices", "utilities", "spend", "sold",
                       "unspent", "unsold", "max_kkt_residual", "kkt_ok",
                       "clearing_ok", "flow_ok", "iterations", "converged"},
                      "report");
  EquilibriumReport r;
  if (!doc.contains("allocation") || !doc.contains("prices"))
    bad("report needs at least \"allocation\" and \"prices\"");
  r.allocation = matrix_from_json(doc.at("allocation"), "allocation");
  const std::size_t n = r.allocation.rows();
  const std::size_t m = r.allocation.cols();
  r.prices = vector_field(doc, "prices", m);
  if (doc.contains("utilities")) r.utilities = vector_field(doc, "utilities", n);
  if (doc.contains("spend")) r.spend = vector_field(doc, "spend", n);
  if (doc.contains("sold")) r.sold = vector_field(doc, "sold", m);
  if (doc.contains("unspent"))
    r.residuals.unspent = vector_field(doc, "unspent", n);
  if (doc.contains("unsold"))
    r.residuals.unsold = vector_field(doc, "unsold", m);
  if (doc.contains("max_kkt_residual"))
    r.max_kkt_residual = doc.at("max_kkt_residual").get<double>();
  if (doc.contains("kkt_ok")) r.kkt_ok = doc.at("kkt_ok").get<bool>();
  if (doc.contains("clearing_ok"))
    r.clearing_ok = doc.at("clearing_ok").get<bool>();
  if (doc.contains("flow_ok")) r.flow_ok = doc.at("flow_ok").get<bool>();
  if (doc.contains("iterations"))
    r.iterations = doc.at("iterations").get<std::size_t>();
  if (doc.contains("converged"))
    r.converged = doc.at("converged").get<bool>();
  return r;
}

void save_report(const EquilibriumReport& report, const std::string& path) {
  write_json_file(report_to_json(report), path, "report");
}

EquilibriumReport load_report(const std::string& path) {
  return report_from_json(read_json_file(path, "report"));
}

}  // namespace fisher
