#include "cli/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "keldysh/linalg.hpp"

namespace keldysh::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where + ": must be finite");
  return x;
}

int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where + ": expected an integer");
  return v.get<int>();
}

Complex complex_entry(const json& v, const std::string& where) {
  if (v.is_number()) return {number(v, where), 0.0};
  if (v.is_array() && v.size() == 2) return {number(v[0], where), number(v[1], where)};
  fail(where + ": matrix entries are numbers or [re, im] pairs");
}

// A scalar, or a square nested array whose entries are numbers or [re, im].
ComplexMatrix matrix_value(const json& v, const std::string& where) {
  if (v.is_number()) return ComplexMatrix::Constant(1, 1, number(v, where));
  if (!v.is_array() || v.empty()) fail(where + ": expected a number or a non-empty square nested array");
  const auto d = static_cast<Index>(v.size());
  ComplexMatrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != d) fail(where + ": matrix must be square");
    for (Index j = 0; j < d; ++j)
      m(i, j) = complex_entry(row[static_cast<std::size_t>(j)],
                              where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
  }
  return m;
}

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where + ": missing \"" + key + "\"");
  return obj.at(key);
}

ComplexMatrix thermal_occupation(const ComplexMatrix& epsilon, const ThermalSpec& spec, Statistics stat) {
  const Index d = epsilon.rows();
  ComplexMatrix nbar = ComplexMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      if (i != j && epsilon(i, j) != Complex(0.0)) fail("nbar: thermal occupation requires a diagonal epsilon");
      if (i == j && epsilon(i, i).imag() != 0.0) fail("nbar: thermal occupation requires real level energies");
    }
  for (Index i = 0; i < d; ++i) {
    try {
      nbar(i, i) = thermal_nbar(epsilon(i, i).real(), spec.mu, spec.temperature, stat);
    } catch (const Error& e) {
      fail(std::string("nbar: ") + e.what());
    }
  }
  return nbar;
}

}  // namespace

ComponentSpec parse_component(std::string_view name) {
  using K = KeldyshComponent;
  using C = ContourComponent;
  const std::string n(name);
  if (n == "R" || n == "11") return {n, K::Retarded};
  if (n == "A" || n == "22") return {n, K::Advanced};
  if (n == "K" || n == "12") return {n, K::Keldysh};
  if (n == "qq" || n == "21") return {n, K::Zero};
  if (n == "++") return {n, C::PlusPlus};
  if (n == "+-") return {n, C::PlusMinus};
  if (n == "-+") return {n, C::MinusPlus};
  if (n == "--") return {n, C::MinusMinus};
  fail("unknown component \"" + n + "\"");
}

LevelSystem RunConfig::system() const { return LevelSystem{epsilon, nbar, statistics}; }

TimeGrid RunConfig::grid() const { return grid(n_slices); }

TimeGrid RunConfig::grid(int n) const { return TimeGrid(t_initial, t_final, n); }

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail("config file " + path + " is not valid JSON: " + e.what());
  }
}

void apply_override(json& doc, std::string_view key, std::string_view value) {
  if (key.empty()) fail("empty override key");
  json parsed = json::parse(value.begin(), value.end(), nullptr, false);
  if (parsed.is_discarded()) parsed = std::string(value);

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part(key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (part.empty()) fail("malformed override key " + std::string(key));
    if (!node->is_object()) {
      if (!node->is_null()) fail("override " + std::string(key) + " descends into a non-object");
      *node = json::object();
    }
    node = &(*node)[part];
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  *node = std::move(parsed);
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) fail("config must be a JSON object");
  RunConfig cfg;

  const json& stat = member(doc, "statistics", "config");
  if (stat == "boson") cfg.statistics = Statistics::boson();
  else if (stat == "fermion") cfg.statistics = Statistics::fermion();
  else fail("statistics: expected \"boson\" or \"fermion\"");

  cfg.epsilon = matrix_value(member(doc, "epsilon", "config"), "epsilon");

  const json& nbar = member(doc, "nbar", "config");
  if (nbar.is_object()) {
    ThermalSpec spec{number(member(nbar, "mu", "nbar"), "nbar.mu"), number(member(nbar, "T", "nbar"), "nbar.T")};
    if (!(spec.temperature > 0.0)) fail("nbar.T: temperature must be positive");
    cfg.thermal = spec;
    cfg.nbar = thermal_occupation(cfg.epsilon, spec, cfg.statistics);
  } else {
    cfg.nbar = matrix_value(nbar, "nbar");
  }
  if (cfg.nbar.rows() != cfg.epsilon.rows()) fail("epsilon and nbar shapes disagree");

  const json& grid = member(doc, "grid", "config");
  cfg.t_initial = number(member(grid, "t_initial", "grid"), "grid.t_initial");
  cfg.t_final = number(member(grid, "t_final", "grid"), "grid.t_final");
  if (!(cfg.t_final > cfg.t_initial)) fail("grid: t_final must exceed t_initial");
  cfg.n_slices = grid.contains("n_slices") ? integer(grid["n_slices"], "grid.n_slices") : 0;
  if (grid.contains("n_list")) {
    const json& list = grid["n_list"];
    if (!list.is_array()) fail("grid.n_list: expected an array of integers");
    for (const json& n : list) cfg.n_list.push_back(integer(n, "grid.n_list"));
    for (std::size_t k = 0; k < cfg.n_list.size(); ++k) {
      if (cfg.n_list[k] < 1) fail("grid.n_list: entries must be positive");
      if (k > 0 && cfg.n_list[k] <= cfg.n_list[k - 1]) fail("grid.n_list: entries must be strictly increasing");
    }
  }
  if (!grid.contains("n_slices")) {
    if (cfg.n_list.empty()) fail("grid: missing \"n_slices\"");
    cfg.n_slices = cfg.n_list.front();
  }
  if (cfg.n_slices < 1) fail("grid.n_slices: must be positive");

  if (doc.contains("output")) {
    const json& out = doc["output"];
    if (!out.is_object()) fail("output: expected an object");
    if (out.contains("format")) {
      if (out["format"] == "csv") cfg.output.format = OutputFormat::Csv;
      else if (out["format"] == "json") cfg.output.format = OutputFormat::Json;
      else fail("output.format: expected \"csv\" or \"json\"");
    }
    if (out.contains("path")) {
      if (!out["path"].is_string()) fail("output.path: expected a string");
      cfg.output.path = out["path"].get<std::string>();
    }
    if (out.contains("components")) {
      const json& list = out["components"];
      if (!list.is_array() || list.empty()) fail("output.components: expected a non-empty array");
      for (const json& c : list) {
        if (!c.is_string()) fail("output.components: entries must be strings");
        cfg.output.components.push_back(parse_component(c.get<std::string>()));
      }
    }
  }
  if (cfg.output.components.empty())
    for (const char* c : {"R", "A", "K"}) cfg.output.components.push_back(parse_component(c));

  if (doc.contains("tolerances")) {
    const json& tol = doc["tolerances"];
    auto read = [&](const char* key, double& into) {
      if (tol.contains(key)) {
        into = number(tol[key], std::string("tolerances.") + key);
        if (!(into > 0.0)) fail(std::string("tolerances.") + key + ": must be positive");
      }
    };
    read("hermitian", cfg.tolerances.hermitian_rel);
    read("eigenvalue", cfg.tolerances.eigenvalue);
    read("unitary", cfg.tolerances.unitary);
    read("inverse", cfg.tolerances.inverse);
    read("ill_conditioned", cfg.tolerances.ill_conditioned);
    read("structure", cfg.structure_threshold);
  }
  if (doc.contains("max_dimension")) {
    cfg.max_dimension = integer(doc["max_dimension"], "max_dimension");
    if (cfg.max_dimension < 2) fail("max_dimension: must be at least 2");
  }

  try {
    validate_system(cfg.system(), cfg.tolerances);
  } catch (const Error& e) {
    fail(e.what());
  }
  return cfg;
}

}  // namespace keldysh::cli
