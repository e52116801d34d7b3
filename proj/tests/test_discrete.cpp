#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "keldysh/discrete.hpp"
#include "keldysh/verify.hpp"
#include "oracles.hpp"

using namespace keldysh;

namespace {

constexpr Complex I1{0.0, 1.0};

ComplexMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  ComplexMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected keldysh::Error");
  return ErrorCode::InvalidArgument;
}

// Rotated combinations of the discrete contour blocks at slots (n, m), both
// in 1..N−1 so every branch pair exists.
struct Rotated {
  ComplexMatrix retarded, advanced, keldysh, zero;
};

Rotated rotate(const DiscreteGf& gf, int n, int m) {
  const ComplexMatrix pp = extract_component(gf, ContourComponent::PlusPlus, n, m).value;
  const ComplexMatrix pm = extract_component(gf, ContourComponent::PlusMinus, n, m).value;
  const ComplexMatrix mp = extract_component(gf, ContourComponent::MinusPlus, n, m).value;
  const ComplexMatrix mm = extract_component(gf, ContourComponent::MinusMinus, n, m).value;
  return {0.5 * (pp - pm + mp - mm), 0.5 * (pp + pm - mp - mm), pp + mm, 0.5 * (pp + mm - pm - mp)};
}

double bound(const LevelSystem& sys, const TimeGrid& g) {
  return 5.0 * g.dt() * (1.0 + spectral_norm(sys.epsilon) * g.duration());
}

}  // namespace

TEST_CASE("contour layout") {
  const ContourLayout layout(4, 2);
  CHECK(layout.dimension() == 16);
  CHECK(layout.position({Branch::Forward, 1}) == 0);
  CHECK(layout.position({Branch::Forward, 4}) == 3);
  CHECK(layout.position({Branch::Backward, 3}) == 4);
  CHECK(layout.position({Branch::Backward, 0}) == 7);
  CHECK_FALSE(layout.valid({Branch::Forward, 0}));
  CHECK_FALSE(layout.valid({Branch::Backward, 4}));
  CHECK(code_of([&] { layout.position({Branch::Forward, 0}); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { layout.index_at(8); }) == ErrorCode::IndexOutOfRange);
  for (Index p = 0; p < layout.n_positions(); ++p) CHECK(layout.position(layout.index_at(p)) == p);
}

TEST_CASE("build_contour_matrix small examples") {
  const TimeGrid g(0.0, 1.0, 2);
  ComplexMatrix vacuum(4, 4);
  vacuum << 1, 0, 0, 0, -1, 1, 0, 0, 0, -1, 1, 0, 0, 0, -1, 1;
  SUBCASE("static vacuum") {
    const auto cm = build_contour_matrix(LevelSystem::single_level(0.0, 0.0, Statistics::boson()), g);
    CHECK(max_abs(cm.matrix - vacuum) == 0.0);
  }
  SUBCASE("static boson with n = 1 adds the corner -1/2") {
    const auto cm = build_contour_matrix(LevelSystem::single_level(0.0, 1.0, Statistics::boson()), g);
    ComplexMatrix expected = vacuum;
    expected(0, 3) = -0.5;
    CHECK(max_abs(cm.matrix - expected) < 1e-16);
  }
  SUBCASE("fermion corner carries the statistics sign") {
    const auto cm = build_contour_matrix(LevelSystem::single_level(0.0, 0.2, Statistics::fermion()), g);
    CHECK(std::abs(cm.matrix(0, 3) - 0.25) < 1e-16);
  }
  SUBCASE("time_of") {
    const auto cm = build_contour_matrix(LevelSystem::single_level(1.0, 0.0, Statistics::boson()), g);
    CHECK(cm.time_of({Branch::Forward, 2}) == 1.0);
    CHECK(cm.time_of({Branch::Backward, 0}) == 0.0);
  }
}

TEST_CASE("band-plus-corner block pattern") {
  std::mt19937_64 rng(5);
  for (Statistics stat : {Statistics::boson(), Statistics::fermion()}) {
    for (Index d : {1, 2, 3}) {
      const LevelSystem sys = sample_system(stat, d, rng);
      const int n = 6;
      const auto cm = build_contour_matrix(sys, TimeGrid(0.0, 1.0, n));
      int diagonal = 0, sub = 0, corner = 0, other = 0;
      for (Index r = 0; r < 2 * n; ++r)
        for (Index c = 0; c < 2 * n; ++c) {
          if (max_abs(cm.matrix.block(r * d, c * d, d, d)) == 0.0) continue;
          if (r == c) ++diagonal;
          else if (r == c + 1) ++sub;
          else if (r == 0 && c == 2 * n - 1) ++corner;
          else ++other;
        }
      CHECK(diagonal == 2 * n);
      CHECK(sub == 2 * n - 1);
      CHECK(corner == 1);
      CHECK(other == 0);
    }
  }
}

TEST_CASE("discrete_green against the path-sum inverse") {
  SUBCASE("static vacuum is lower-triangular -i") {
    const auto gf = discrete_green(LevelSystem::single_level(0.0, 0.0, Statistics::boson()), TimeGrid(0.0, 1.0, 5));
    for (Index r = 0; r < 10; ++r)
      for (Index c = 0; c < 10; ++c) CHECK(gf.values(r, c) == (r >= c ? -I1 : Complex(0.0)));
    CHECK(gf.determinant == Complex(1.0));
  }
  SUBCASE("single level, both statistics") {
    for (Statistics stat : {Statistics::boson(), Statistics::fermion()}) {
      for (double n : {0.0, 0.3, 0.8}) {
        const double eps = -1.3;
        const TimeGrid g(0.0, 2.0, 9);
        const auto gf = discrete_green(LevelSystem::single_level(eps, n, stat), g);
        const oracle::CycleMatrix cyc =
            oracle::single_level_contour(eps, rho_from_nbar(n, stat), stat.zeta(), 9, g.dt());
        CHECK(max_abs(gf.values - (-I1) * cyc.inverse()) <= 1e-12);
        CHECK(std::abs(gf.determinant - cyc.determinant()) <= 1e-12);
      }
    }
  }
}

TEST_CASE("fermion at half filling converges within 5 dt") {
  const LevelSystem sys = LevelSystem::single_level(1.0, 0.5, Statistics::fermion());
  const TimeGrid g(0.0, 1.0, 64);
  const double err = oracle_error(discrete_green(sys, g), FreeGreenFunction(sys));
  CHECK(err <= 5.0 * g.dt());
}

TEST_CASE("discrete_partition_function") {
  SUBCASE("exactly one without dynamics or without occupation") {
    for (Statistics stat : {Statistics::boson(), Statistics::fermion()}) {
      for (int n : {1, 2, 7, 64}) {
        const TimeGrid g(0.0, 1.0, n);
        CHECK(std::abs(discrete_partition_function(LevelSystem::single_level(0.0, 0.4, stat), g) - 1.0) <= 1e-13);
        CHECK(std::abs(discrete_partition_function(LevelSystem::single_level(2.5, 0.0, stat), g) - 1.0) <= 1e-13);
        const LevelSystem static_pair{ComplexMatrix::Zero(2, 2), mat2(0.4, 0.1, 0.1, 0.2), stat};
        CHECK(std::abs(discrete_partition_function(static_pair, g) - 1.0) <= 1e-13);
      }
    }
  }
  SUBCASE("closed form for one level") {
    for (Statistics stat : {Statistics::boson(), Statistics::fermion()})
      for (int n : {4, 16, 50}) {
        const double eps = 0.9, nbar = 0.6, dt = 1.5 / n;
        const Complex z =
            discrete_partition_function(LevelSystem::single_level(eps, nbar, stat), TimeGrid(0.0, 1.5, n));
        const double expected = oracle::single_level_partition(eps, rho_from_nbar(nbar, stat), stat.zeta(), n, dt);
        CHECK(std::abs(z - expected) <= 1e-12 * std::abs(expected));
      }
  }
  SUBCASE("deviation at least halves under refinement") {
    const LevelSystem sys = LevelSystem::single_level(1.0, 1.0, Statistics::boson());
    double previous = INFINITY;
    for (int n : {16, 32, 64, 128}) {
      const double dev = std::abs(discrete_partition_function(sys, TimeGrid(0.0, 1.0, n)) - 1.0);
      CHECK(dev <= 0.5 * previous * (1.0 + 1e-9));
      previous = dev;
    }
  }
  SUBCASE("diagonal system factorizes into levels") {
    RealVector eps(2), n(2);
    eps << 0.5, -1.5;
    n << 0.3, 0.7;
    for (Statistics stat : {Statistics::boson(), Statistics::fermion()}) {
      const TimeGrid g(0.0, 1.0, 12);
      const Complex z = discrete_partition_function(LevelSystem::diagonal(eps, n, stat), g);
      const Complex z0 = discrete_partition_function(LevelSystem::single_level(eps(0), n(0), stat), g);
      const Complex z1 = discrete_partition_function(LevelSystem::single_level(eps(1), n(1), stat), g);
      CHECK(std::abs(z - z0 * z1) <= 1e-12);
    }
  }
}

TEST_CASE("extract_component") {
  std::mt19937_64 rng(8);
  const LevelSystem sys = sample_system(Statistics::boson(), 2, rng);
  const int n = 5;
  const auto gf = discrete_green(sys, TimeGrid(0.0, 1.0, n));
  SUBCASE("branches") {
    CHECK(branches_of(ContourComponent::MinusPlus) == std::pair{Branch::Backward, Branch::Forward});
    const auto blk = extract_component(gf, ContourComponent::MinusPlus, 2, 3);
    CHECK(max_abs(blk.value - gf.values.block(2 * (2 * n - 1 - 2), 2 * 2, 2, 2)) == 0.0);
    CHECK(blk.t == doctest::Approx(0.4));
    CHECK(blk.t_prime == doctest::Approx(0.6));
  }
  SUBCASE("tiles the matrix exactly once") {
    std::multiset<std::pair<Index, Index>> seen;
    ComplexMatrix assembled = ComplexMatrix::Zero(gf.values.rows(), gf.values.cols());
    for (ContourComponent c : {ContourComponent::PlusPlus, ContourComponent::PlusMinus, ContourComponent::MinusPlus,
                               ContourComponent::MinusMinus}) {
      const auto [rb, cb] = branches_of(c);
      for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b) {
          if (!gf.layout.valid({rb, a}) || !gf.layout.valid({cb, b})) continue;
          const Index r = gf.layout.position({rb, a}), col = gf.layout.position({cb, b});
          seen.insert({r, col});
          assembled.block(r * 2, col * 2, 2, 2) = extract_component(gf, c, a, b).value;
        }
    }
    CHECK(seen.size() == static_cast<std::size_t>(4 * n * n));
    for (const auto& key : seen) CHECK(seen.count(key) == 1);
    CHECK(max_abs(assembled - gf.values) == 0.0);
  }
  SUBCASE("invalid slots") {
    CHECK(code_of([&] { extract_component(gf, ContourComponent::PlusPlus, 0, 1); }) == ErrorCode::IndexOutOfRange);
    CHECK(code_of([&] { extract_component(gf, ContourComponent::MinusMinus, 1, n); }) ==
          ErrorCode::IndexOutOfRange);
  }
}

TEST_CASE("grid cap") {
  DiscreteOptions opts;
  opts.max_dimension = 64;
  const auto sys = LevelSystem::single_level(1.0, 0.2, Statistics::boson());
  CHECK_NOTHROW(build_contour_matrix(sys, TimeGrid(0.0, 1.0, 32), opts));
  CHECK(code_of([&] { build_contour_matrix(sys, TimeGrid(0.0, 1.0, 33), opts); }) == ErrorCode::GridTooLarge);
  CHECK(code_of([&] { discrete_green(sys, TimeGrid(0.0, 1.0, 5000)); }) == ErrorCode::GridTooLarge);
}

TEST_CASE("discrete properties") {
  const ComplexMatrix eps = mat2(1.0, 0.3, 0.3, 2.0);
  const ComplexMatrix nb = mat2(0.4, 0.1, 0.1, 0.2);

  SUBCASE("zero block emerges at first order") {
    for (Statistics stat : {Statistics::boson(), Statistics::fermion()}) {
      const LevelSystem sys{eps, nb, stat};
      double previous = INFINITY;
      for (int n : {32, 64}) {
        const TimeGrid g(0.0, 1.0, n);
        const auto gf = discrete_green(sys, g);
        double worst = 0.0;
        for (int a = 1; a < n; ++a)
          for (int b = 1; b < n; ++b)
            if (a != b) worst = std::max(worst, max_abs(rotate(gf, a, b).zero));
        CHECK(worst <= bound(sys, g));
        CHECK(worst <= 0.6 * previous);
        previous = worst;
      }
    }
  }

  SUBCASE("retarded and advanced do not depend on the occupation") {
    // Only G^K carries the occupation in the continuum; at finite N the
    // rotated R/A combinations agree up to the discretization error.
    for (Statistics stat : {Statistics::boson(), Statistics::fermion()}) {
      const TimeGrid g(0.0, 1.0, 48);
      const std::vector<double> occupations =
          stat.is_boson() ? std::vector<double>{0.0, 0.5, 3.0} : std::vector<double>{0.0, 0.5, 0.9};
      std::vector<DiscreteGf> gfs;
      LevelSystem sys = LevelSystem::single_level(1.0, 0.0, stat);
      for (double n : occupations) {
        sys.nbar(0, 0) = n;
        gfs.push_back(discrete_green(sys, g));
      }
      double spread = 0.0;
      for (int a = 1; a < 48; ++a)
        for (int b = 1; b < 48; ++b) {
          if (a == b) continue;
          const Rotated ref = rotate(gfs[0], a, b);
          for (std::size_t k = 1; k < gfs.size(); ++k) {
            const Rotated r = rotate(gfs[k], a, b);
            spread = std::max({spread, max_abs(r.retarded - ref.retarded), max_abs(r.advanced - ref.advanced)});
          }
        }
      CHECK(spread <= 2.0 * bound(sys, g));
    }
  }

  SUBCASE("Keldysh combination scales with 1 + 2 zeta n") {
    for (Statistics stat : {Statistics::boson(), Statistics::fermion()}) {
      const double n = 0.3;
      const LevelSystem sys = LevelSystem::single_level(0.8, n, stat);
      const TimeGrid g(0.0, 1.0, 64);
      const auto gf = discrete_green(sys, g);
      const FreeGreenFunction cont(sys);
      double worst = 0.0;
      for (int a = 1; a < 64; a += 3)
        for (int b = 1; b < 64; b += 5) {
          if (a == b) continue;
          const Rotated r = rotate(gf, a, b);
          const ComplexMatrix spectral = cont.retarded(g.time(a), g.time(b)) - cont.advanced(g.time(a), g.time(b));
          worst = std::max(worst, max_abs(r.keldysh - (1.0 + 2.0 * stat.zeta() * n) * spectral));
        }
      CHECK(worst <= 2.0 * bound(sys, g));
    }
  }
}
