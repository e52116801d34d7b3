#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "keldysh/continuum.hpp"
#include "keldysh/discrete.hpp"

namespace keldysh {

struct CheckResult {
  std::string name;
  bool passed = false;
  double observed = 0.0;   // worst-case metric
  double threshold = 0.0;
  std::string details;
  bool applicable = true;  // false: check skipped, counted as passed
};

/// Evaluates a rotated-basis component; the structure suite is written
/// against this so that a corrupted implementation can be injected.
using ComponentFn = std::function<ComplexMatrix(KeldyshComponent, double t, double t_prime, double t_ref)>;

ComponentFn continuum_components(const LevelSystem& sys);

/// Negative-control fixture: the continuum components with the sign of G^K
/// flipped for t > t'.
ComponentFn corrupted_keldysh_components(const LevelSystem& sys);

struct StructureOptions {
  double t_initial = 0.0;
  double t_final = 1.0;
  double threshold = 1e-12;
  Tolerances tolerances;
};

/// Deterministic (t, t') sample: 7 Chebyshev-spaced interior t' crossed
/// with {tᵢ, t_f} and 3 Chebyshev-spaced interior t.
struct SamplePoints {
  std::vector<double> t;
  std::vector<double> t_prime;
};
SamplePoints structure_samples(double t_initial, double t_final);

/// Closed-form relations of the continuum Green's function, sorted by name.
std::vector<CheckResult> run_structure_suite(const LevelSystem& sys, const StructureOptions& opts = {},
                                             const ComponentFn& components = {});

struct ConvergenceReport {
  std::vector<int> n_slices;
  std::vector<double> dt;
  std::vector<double> errors;       // max off-equal-time |G_disc − G_cont|
  std::vector<double> error_bounds; // 5·δt·(1 + ‖ε‖·T)
  std::vector<double> z_deviations; // |Z_N − 1|
  std::vector<Complex> partition;   // Z_N
  std::optional<double> fitted_order;  // empty when errors sit at roundoff
  double t_initial = 0.0;
  double t_final = 1.0;
};

struct OracleOptions {
  DiscreteOptions discrete;
  double order_min = 0.8;
  double order_max = 1.2;
  double roundoff_floor = 1e-12;
  double monotone_slack = 0.10;
  int monotone_from = 32;
};

/// Compares the inverted discrete contour matrix with the continuum contour
/// components for each grid, tracking |Z − 1|, and fits the order.
ConvergenceReport run_oracle_suite(const LevelSystem& sys, const std::vector<TimeGrid>& grids,
                                   const OracleOptions& opts = {});

/// Max off-equal-time error of one discrete Green's function against the continuum.
double oracle_error(const DiscreteGf& gf, const FreeGreenFunction& cont);

/// Least-squares slope of log(error) against log(N), negated.
double fitted_order(const std::vector<int>& n_slices, const std::vector<double>& errors);

/// Spectral norm of a Hermitian ε (largest |eigenvalue|).
double spectral_norm(const ComplexMatrix& epsilon);

/// Pass/fail assessment of a convergence report.
std::vector<CheckResult> convergence_checks(const ConvergenceReport& report, const OracleOptions& opts = {});

bool all_passed(const std::vector<CheckResult>& checks) noexcept;

/// Random valid system: Hermitian ε with entries of modulus ≲ `energy_scale`,
/// n̄ = V diag(λ) V† with λ uniform in [0, occupation_max) (fermions capped below 1).
LevelSystem sample_system(Statistics stat, Index levels, std::mt19937_64& rng, double energy_scale = 2.0,
                          double occupation_max = 3.0);

// JSON report, schema version 1.
inline constexpr int kReportSchema = 1;

nlohmann::json to_json(const CheckResult& check);
nlohmann::json to_json(const ConvergenceReport& report, const std::vector<CheckResult>& checks);
nlohmann::json system_to_json(const LevelSystem& sys);
nlohmann::json verification_report(const LevelSystem& sys, const std::vector<CheckResult>& structure,
                                   const std::optional<ConvergenceReport>& convergence,
                                   const OracleOptions& opts = {});

}  // namespace keldysh
