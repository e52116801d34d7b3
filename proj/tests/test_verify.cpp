#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "keldysh/verify.hpp"

using namespace keldysh;

namespace {

ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

const CheckResult& find(const std::vector<CheckResult>& checks, const std::string& name) {
  const auto it = std::ranges::find(checks, name, &CheckResult::name);
  REQUIRE(it != checks.end());
  return *it;
}

std::vector<TimeGrid> grids(std::initializer_list<int> ns, double tf = 1.0) {
  std::vector<TimeGrid> out;
  for (int n : ns) out.emplace_back(0.0, tf, n);
  return out;
}

}  // namespace

TEST_CASE("structure sample points") {
  const SamplePoints s = structure_samples(0.0, 2.0);
  REQUIRE(s.t.size() == 5);
  REQUIRE(s.t_prime.size() == 7);
  CHECK(s.t.front() == 0.0);
  CHECK(s.t.back() == 2.0);
  CHECK(std::ranges::is_sorted(s.t_prime));
  for (double tp : s.t_prime) {
    CHECK(tp > 0.0);
    CHECK(tp < 2.0);
  }
  CHECK(s.t_prime[3] == doctest::Approx(1.0));
}

TEST_CASE("structure suite") {
  SUBCASE("boson level passes every check") {
    const auto checks = run_structure_suite(LevelSystem::single_level(1.0, 0.7, Statistics::boson()));
    CHECK(checks.size() == 11);
    CHECK(all_passed(checks));
    CHECK(std::ranges::is_sorted(checks, {}, &CheckResult::name));
    for (const auto& c : checks) {
      CHECK(c.applicable);
      CHECK(c.passed == (c.observed <= c.threshold));
      CHECK(c.threshold == 1e-12);
    }
  }
  SUBCASE("fermion at half filling: Keldysh vanishes, FDT reads 0 = 0") {
    const auto sys = LevelSystem::single_level(1.0, 0.5, Statistics::fermion());
    CHECK(max_abs(FreeGreenFunction(sys).keldysh(0.8, 0.2, 0.0)) == 0.0);
    const auto checks = run_structure_suite(sys);
    CHECK(all_passed(checks));
    CHECK(find(checks, "fdt_proportionality").applicable);
    CHECK(find(checks, "fdt_proportionality").observed == 0.0);
  }
  SUBCASE("corrupted Keldysh component is caught") {
    const auto sys = LevelSystem::single_level(1.0, 0.7, Statistics::boson());
    const auto checks = run_structure_suite(sys, {}, corrupted_keldysh_components(sys));
    CHECK_FALSE(all_passed(checks));
    CHECK_FALSE(find(checks, "keldysh_anti_hermitian").passed);
    CHECK(find(checks, "causality").passed);
    CHECK(find(checks, "zero_block").passed);
  }
  SUBCASE("non-commuting levels skip FDT") {
    const LevelSystem sys{mat2(1.0, 0.3, 0.3, 2.0), mat2(0.4, 0.1, 0.1, 0.2), Statistics::fermion()};
    const auto checks = run_structure_suite(sys);
    CHECK(all_passed(checks));
    CHECK_FALSE(find(checks, "fdt_proportionality").applicable);
  }
  SUBCASE("shifted contour") {
    StructureOptions opts;
    opts.t_initial = -2.0;
    opts.t_final = 3.5;
    std::mt19937_64 rng(77);
    CHECK(all_passed(run_structure_suite(sample_system(Statistics::boson(), 3, rng), opts)));
  }
  SUBCASE("deterministic") {
    std::mt19937_64 a(123), b(123);
    const auto first = run_structure_suite(sample_system(Statistics::fermion(), 2, a));
    const auto second = run_structure_suite(sample_system(Statistics::fermion(), 2, b));
    REQUIRE(first.size() == second.size());
    for (std::size_t k = 0; k < first.size(); ++k) {
      CHECK(first[k].name == second[k].name);
      CHECK(first[k].observed == second[k].observed);
      CHECK(first[k].passed == second[k].passed);
    }
  }
}

TEST_CASE("sample_system produces valid draws") {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 30; ++k) {
    const Statistics stat = k % 2 ? Statistics::fermion() : Statistics::boson();
    const LevelSystem sys = sample_system(stat, 1 + k % 3, rng);
    CHECK_NOTHROW(validate_system(sys));
    if (!stat.is_boson()) CHECK(hermitian_eigen(sys.nbar).values.maxCoeff() < 1.0);
  }
}

TEST_CASE("oracle suite") {
  SUBCASE("boson level converges at first order") {
    const auto sys = LevelSystem::single_level(1.0, 1.0, Statistics::boson());
    const ConvergenceReport r = run_oracle_suite(sys, grids({32, 64, 128}));
    REQUIRE(r.fitted_order.has_value());
    CHECK(*r.fitted_order >= 0.8);
    CHECK(*r.fitted_order <= 1.2);
    for (std::size_t k = 0; k < 3; ++k) CHECK(r.errors[k] <= r.error_bounds[k]);
    CHECK(r.errors[1] < r.errors[0]);
    CHECK(r.errors[2] < r.errors[1]);
    CHECK(all_passed(convergence_checks(r)));
  }
  SUBCASE("static system is exact: order not applicable") {
    const auto sys = LevelSystem::single_level(0.0, 0.6, Statistics::fermion());
    const ConvergenceReport r = run_oracle_suite(sys, grids({8, 16, 32}));
    CHECK_FALSE(r.fitted_order.has_value());
    for (double e : r.errors) CHECK(e <= 1e-12);
    for (double z : r.z_deviations) CHECK(z <= 1e-13);
    const auto checks = convergence_checks(r);
    CHECK(all_passed(checks));
    CHECK_FALSE(find(checks, "convergence_order").applicable);
  }
  SUBCASE("non-commuting fermion pair") {
    const LevelSystem sys{mat2(1.0, 0.3, 0.3, 2.0), mat2(0.4, Complex(0.1, 0.05), Complex(0.1, -0.05), 0.2),
                          Statistics::fermion()};
    const ConvergenceReport r = run_oracle_suite(sys, grids({32, 64, 128}));
    REQUIRE(r.fitted_order.has_value());
    CHECK(*r.fitted_order >= 0.8);
    CHECK(*r.fitted_order <= 1.2);
    CHECK(r.z_deviations[1] < r.z_deviations[0]);
    CHECK(r.z_deviations[2] < r.z_deviations[1]);
    CHECK(all_passed(convergence_checks(r)));
  }
  SUBCASE("errors shrink by about two per refinement") {
    const auto sys = LevelSystem::single_level(1.0, 0.3, Statistics::boson());
    const ConvergenceReport r = run_oracle_suite(sys, grids({32, 64, 128}));
    for (std::size_t k = 1; k < 3; ++k) {
      const double ratio = r.errors[k - 1] / r.errors[k];
      CHECK(ratio >= 1.7);
      CHECK(ratio <= 2.3);
    }
  }
  SUBCASE("invalid grid sequences") {
    const auto sys = LevelSystem::single_level(1.0, 0.3, Statistics::boson());
    CHECK_THROWS_AS(run_oracle_suite(sys, grids({16})), Error);
    CHECK_THROWS_AS(run_oracle_suite(sys, grids({16, 16})), Error);
    CHECK_THROWS_AS(run_oracle_suite(sys, grids({32, 16})), Error);
    CHECK_THROWS_AS(run_oracle_suite(sys, {TimeGrid(0.0, 1.0, 8), TimeGrid(0.0, 2.0, 16)}), Error);
  }
}

TEST_CASE("convergence checks on synthetic reports") {
  ConvergenceReport r;
  r.n_slices = {32, 64, 128};
  r.dt = {1.0 / 32, 1.0 / 64, 1.0 / 128};
  r.errors = {0.1, 0.05, 0.025};
  r.error_bounds = {1.0, 0.5, 0.25};
  r.z_deviations = {0.032, 0.016, 0.008};
  r.partition = {1.032, 1.016, 1.008};
  r.fitted_order = fitted_order(r.n_slices, r.errors);
  CHECK(*r.fitted_order == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(all_passed(convergence_checks(r)));

  SUBCASE("wiggle within ten percent is tolerated") {
    r.errors = {0.1, 0.105, 0.05};
    r.fitted_order = 0.95;
    CHECK(find(convergence_checks(r), "error_monotone").passed);
    r.errors = {0.1, 0.115, 0.05};
    CHECK_FALSE(find(convergence_checks(r), "error_monotone").passed);
  }
  SUBCASE("second-order decay fails the order window") {
    r.errors = {0.1, 0.025, 0.00625};
    r.fitted_order = fitted_order(r.n_slices, r.errors);
    CHECK(*r.fitted_order == doctest::Approx(2.0));
    CHECK_FALSE(find(convergence_checks(r), "convergence_order").passed);
  }
  SUBCASE("partition deviation above C/N fails") {
    r.z_deviations = {0.032, 0.02, 0.008};
    CHECK_FALSE(find(convergence_checks(r), "partition_function").passed);
  }
  SUBCASE("order fit rejects non-positive errors") {
    CHECK_THROWS_AS(fitted_order({8, 16}, {0.1, 0.0}), Error);
    CHECK_THROWS_AS(fitted_order({8}, {0.1}), Error);
  }
}

TEST_CASE("spectral norm") {
  CHECK(spectral_norm(mat2(0.0, 1.0, 1.0, 0.0)) == doctest::Approx(1.0));
  CHECK(spectral_norm(mat2(-3.0, 0.0, 0.0, 2.0)) == doctest::Approx(3.0));
}

TEST_CASE("verification report JSON") {
  const auto sys = LevelSystem::single_level(1.0, 1.0, Statistics::boson());
  const auto structure = run_structure_suite(sys);
  const auto conv = run_oracle_suite(sys, grids({16, 32}));
  const nlohmann::json report = verification_report(sys, structure, conv);
  CHECK(report.at("schema") == 1);
  CHECK(report.at("passed") == true);
  CHECK(report.at("system").at("statistics") == "boson");
  CHECK(report.at("system").at("epsilon").at("data") == nlohmann::json::array({1.0, 0.0}));
  CHECK(report.at("structure").size() == 11);
  CHECK(report.at("structure")[0].at("name") == "boundary_final");
  CHECK(report.at("convergence").at("n_slices") == nlohmann::json::array({16, 32}));
  CHECK(report.at("convergence").at("checks").size() == 4);

  const nlohmann::json bare = verification_report(sys, structure, std::nullopt);
  CHECK(bare.at("convergence").is_null());

  const auto bad = run_structure_suite(sys, {}, corrupted_keldysh_components(sys));
  CHECK(verification_report(sys, bad, std::nullopt).at("passed") == false);
}
