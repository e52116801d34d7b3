#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "keldysh/continuum.hpp"
#include "keldysh/core.hpp"

namespace keldysh::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Json };

/// A requested Green's function component. The name is kept verbatim for output.
struct ComponentSpec {
  std::string name;
  std::variant<KeldyshComponent, ContourComponent> which;
};

/// Accepts R, A, K, qq, ++, +-, -+, --, and the fermionic block aliases
/// 11 (R), 12 (K), 21 (zero), 22 (A).
ComponentSpec parse_component(std::string_view name);

struct ThermalSpec {
  double mu = 0.0;
  double temperature = 1.0;
};

struct OutputSpec {
  OutputFormat format = OutputFormat::Csv;
  std::vector<ComponentSpec> components;
  std::string path = "-";  // "-" is standard output
};

struct RunConfig {
  Statistics statistics;
  ComplexMatrix epsilon;
  ComplexMatrix nbar;                  // resolved occupation (thermal specs expanded)
  std::optional<ThermalSpec> thermal;  // set when nbar came from {mu, T}
  double t_initial = 0.0;
  double t_final = 1.0;
  int n_slices = 1;
  std::vector<int> n_list;             // refinement sequence for z / converge / verify
  OutputSpec output;
  Tolerances tolerances;
  Index max_dimension = 8192;
  double structure_threshold = 1e-12;

  LevelSystem system() const;
  TimeGrid grid() const;
  TimeGrid grid(int n) const;
};

nlohmann::json load_config_file(const std::string& path);

/// Sets the dotted path `key` (e.g. "grid.n_slices") in `doc`. The value is
/// read as JSON when it parses, otherwise as a plain string.
void apply_override(nlohmann::json& doc, std::string_view key, std::string_view value);

RunConfig parse_config(const nlohmann::json& doc);

}  // namespace keldysh::cli
