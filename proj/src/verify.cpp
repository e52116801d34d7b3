#include "keldysh/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace keldysh {

namespace {

constexpr Complex kI{0.0, 1.0};

double relative_gap(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
  return max_abs(lhs - rhs) / std::max(1.0, max_abs(rhs));
}

std::vector<double> chebyshev_interior(double lo, double hi, int count) {
  std::vector<double> out;
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (int k = count - 1; k >= 0; --k)
    out.push_back(mid + half * std::cos((2 * k + 1) * std::numbers::pi / (2.0 * count)));
  return out;
}

CheckResult make_check(std::string name, double observed, double threshold, std::string details = {}) {
  return {std::move(name), observed <= threshold, observed, threshold, std::move(details), true};
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

ComponentFn continuum_components(const LevelSystem& sys) {
  auto gf = std::make_shared<const FreeGreenFunction>(sys);
  return [gf](KeldyshComponent c, double t, double tp, double t_ref) { return gf->component(c, t, tp, t_ref); };
}

ComponentFn corrupted_keldysh_components(const LevelSystem& sys) {
  auto gf = std::make_shared<const FreeGreenFunction>(sys);
  return [gf](KeldyshComponent c, double t, double tp, double t_ref) {
    ComplexMatrix out = gf->component(c, t, tp, t_ref);
    if (c == KeldyshComponent::Keldysh && t > tp) out = -out;
    return out;
  };
}

SamplePoints structure_samples(double t_initial, double t_final) {
  SamplePoints s;
  s.t_prime = chebyshev_interior(t_initial, t_final, 7);
  s.t.push_back(t_initial);
  for (double t : chebyshev_interior(t_initial, t_final, 3)) s.t.push_back(t);
  s.t.push_back(t_final);
  return s;
}

std::vector<CheckResult> run_structure_suite(const LevelSystem& input, const StructureOptions& opts,
                                             const ComponentFn& provided) {
  const LevelSystem sys = validate_system(input, opts.tolerances);
  const ComponentFn g = provided ? provided : continuum_components(sys);
  const FreeGreenFunction reference(sys, opts.tolerances);
  const Statistics stat = sys.statistics;
  const Index d = sys.dimension();
  const ComplexMatrix identity = ComplexMatrix::Identity(d, d);
  const ComplexMatrix zero = ComplexMatrix::Zero(d, d);
  const double ti = opts.t_initial;
  const double tf = opts.t_final;
  const double thr = opts.threshold;
  const SamplePoints samples = structure_samples(ti, tf);

  // Every ordered pair drawn from the union of both sample sets.
  std::vector<double> times = samples.t;
  times.insert(times.end(), samples.t_prime.begin(), samples.t_prime.end());

  auto R = [&](double t, double tp) { return g(KeldyshComponent::Retarded, t, tp, ti); };
  auto A = [&](double t, double tp) { return g(KeldyshComponent::Advanced, t, tp, ti); };
  auto K = [&](double t, double tp) { return g(KeldyshComponent::Keldysh, t, tp, ti); };
  auto block = [&](int row, int col, double t, double tp) { return g(rotated_layout(stat, row, col), t, tp, ti); };

  std::vector<CheckResult> out;

  {
    double worst = 0.0;
    for (double t : times)
      for (double tp : times) {
        if (t < tp) worst = std::max(worst, max_abs(R(t, tp)));
        if (t > tp) worst = std::max(worst, max_abs(A(t, tp)));
      }
    out.push_back(make_check("causality", worst, thr, "max |G^R| for t<t' and |G^A| for t>t'"));
  }
  {
    double worst = 0.0;
    for (double t : times) worst = std::max(worst, relative_gap(R(t, t) - A(t, t), -kI * identity));
    out.push_back(make_check("equal_time_jump", worst, thr, "G^R(t,t) - G^A(t,t) = -i I"));
  }
  {
    double conj = 0.0, anti = 0.0;
    for (double t : times)
      for (double tp : times) {
        conj = std::max(conj, relative_gap(R(t, tp).adjoint(), A(tp, t)));
        anti = std::max(anti, relative_gap(K(t, tp).adjoint(), -K(tp, t)));
      }
    out.push_back(make_check("conjugation", conj, thr, "G^R(t,t')^dagger = G^A(t',t)"));
    out.push_back(make_check("keldysh_anti_hermitian", anti, thr, "G^K(t,t')^dagger = -G^K(t',t)"));
  }
  {
    double worst = 0.0;
    for (double t : times)
      for (double tp : times) worst = std::max(worst, max_abs(g(KeldyshComponent::Zero, t, tp, ti)));
    out.push_back(make_check("zero_block", worst, thr, stat.is_boson() ? "G^qq = 0" : "G^21 = 0"));
  }
  {
    const ComplexMatrix commutator = sys.epsilon * sys.nbar.transpose() - sys.nbar.transpose() * sys.epsilon;
    const double comm = max_abs(commutator);
    if (comm > 1e-12) {
      CheckResult skipped{"fdt_proportionality", true, 0.0, thr,
                          "not applicable: ||[epsilon, nbar^T]||_max = " + format_double(comm), false};
      out.push_back(std::move(skipped));
    } else {
      double worst = 0.0;
      for (double t : times)
        for (double tp : times)
          if (t != tp) worst = std::max(worst, relative_gap(K(t, tp), reference.keldysh_weight() * (R(t, tp) - A(t, tp))));
      out.push_back(make_check("fdt_proportionality", worst, thr, "G^K = (I + 2 zeta nbar^T)(G^R - G^A), t != t'"));
    }
  }
  {
    double worst = 0.0;
    for (double t : times)
      for (double tp : times)
        if (t > tp) {
          const ComplexMatrix u = kI * R(t, tp);
          worst = std::max(worst, max_abs(u * u.adjoint() - identity));
        }
    out.push_back(make_check("unitarity", worst, thr, "i G^R(t,t') unitary for t > t'"));
  }
  {
    double fin = 0.0, ini = 0.0;
    const ComplexMatrix& weight = reference.keldysh_weight();
    for (double tp : samples.t_prime)
      for (int col = 0; col < 2; ++col) {
        fin = std::max(fin, max_abs(block(1, col, tf, tp)));
        ini = std::max(ini, relative_gap(block(0, col, ti, tp), -(weight * block(1, col, ti, tp))));
      }
    out.push_back(make_check("boundary_final", fin, thr,
                             stat.is_boson() ? "G^{q,alpha}(t_f,t') = 0" : "G^{2,a}(t_f,t') = 0"));
    out.push_back(make_check("boundary_initial", ini, thr,
                             stat.is_boson() ? "G^{cl,alpha}(t_i,t') = -(I + 2 nbar^T) G^{q,alpha}(t_i,t')"
                                             : "G^{1,a}(t_i,t') = -(I - 2 nbar^T) G^{2,a}(t_i,t')"));
  }
  {
    const SolutionConstants k = fix_constants(sys, ti, tf, opts.tolerances);
    double worst = 0.0;
    for (double t : times)
      for (double tp : times)
        for (int row = 0; row < 2; ++row)
          for (int col = 0; col < 2; ++col)
            worst = std::max(worst, relative_gap(general_solution(sys, k, row, col, t, tp, ti), block(row, col, t, tp)));
    out.push_back(make_check("constants_consistency", worst, thr, "general solution with fixed constants"));
  }
  {
    double worst = 0.0;
    for (double t : times)
      for (double tp : times) {
        const ComplexMatrix pp = reference.contour(ContourComponent::PlusPlus, t, tp, ti);
        const ComplexMatrix pm = reference.contour(ContourComponent::PlusMinus, t, tp, ti);
        const ComplexMatrix mp = reference.contour(ContourComponent::MinusPlus, t, tp, ti);
        const ComplexMatrix mm = reference.contour(ContourComponent::MinusMinus, t, tp, ti);
        worst = std::max({worst, relative_gap(pp - pm, R(t, tp)), relative_gap(pp - mp, A(t, tp)),
                          relative_gap(pp + mm, K(t, tp)), max_abs(pp + mm - pm - mp)});
      }
    out.push_back(make_check("contour_basis", worst, thr, "contour components rotate back to R, A, K"));
  }

  std::ranges::sort(out, {}, &CheckResult::name);
  return out;
}

// ---------------------------------------------------------------------------

double spectral_norm(const ComplexMatrix& epsilon) {
  const RealVector ev = hermitian_eigen(epsilon).values;
  return ev.cwiseAbs().maxCoeff();
}

double oracle_error(const DiscreteGf& gf, const FreeGreenFunction& cont) {
  const ContourLayout& layout = gf.layout;
  const Index d = layout.levels();
  const double ti = gf.grid.t_initial();
  double worst = 0.0;
  for (Index p = 0; p < layout.n_positions(); ++p) {
    const ContourIndex row = layout.index_at(p);
    for (Index q = 0; q < layout.n_positions(); ++q) {
      const ContourIndex col = layout.index_at(q);
      if (row.branch == col.branch && row.slot == col.slot) continue;
      const bool row_fwd = row.branch == Branch::Forward;
      const bool col_fwd = col.branch == Branch::Forward;
      const ContourComponent comp = row_fwd ? (col_fwd ? ContourComponent::PlusPlus : ContourComponent::PlusMinus)
                                            : (col_fwd ? ContourComponent::MinusPlus : ContourComponent::MinusMinus);
      const ComplexMatrix expected = cont.contour(comp, gf.grid.time(row.slot), gf.grid.time(col.slot), ti);
      worst = std::max(worst, max_abs(gf.values.block(p * d, q * d, d, d) - expected));
    }
  }
  return worst;
}

double fitted_order(const std::vector<int>& n_slices, const std::vector<double>& errors) {
  if (n_slices.size() != errors.size() || n_slices.size() < 2)
    throw Error(ErrorCode::InvalidArgument, "order fit needs at least two (N, error) pairs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(n_slices.size());
  for (std::size_t k = 0; k < n_slices.size(); ++k) {
    if (!(errors[k] > 0.0)) throw Error(ErrorCode::InvalidArgument, "order fit needs positive errors");
    const double x = std::log(static_cast<double>(n_slices[k]));
    const double y = std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return -slope;
}

ConvergenceReport run_oracle_suite(const LevelSystem& input, const std::vector<TimeGrid>& grids,
                                   const OracleOptions& opts) {
  if (grids.size() < 2) throw Error(ErrorCode::InvalidArgument, "convergence study needs at least two grids");
  for (std::size_t k = 1; k < grids.size(); ++k) {
    if (grids[k].n_slices() <= grids[k - 1].n_slices())
      throw Error(ErrorCode::InvalidArgument, "grid sizes must be strictly increasing");
    if (grids[k].t_initial() != grids[0].t_initial() || grids[k].t_final() != grids[0].t_final())
      throw Error(ErrorCode::InvalidArgument, "all grids must share the same contour endpoints");
  }

  const LevelSystem sys = validate_system(input, opts.discrete.tolerances);
  const FreeGreenFunction cont(sys, opts.discrete.tolerances);
  const double energy = spectral_norm(sys.epsilon);

  ConvergenceReport report;
  report.t_initial = grids[0].t_initial();
  report.t_final = grids[0].t_final();
  for (const TimeGrid& grid : grids) {
    const DiscreteGf gf = discrete_green(sys, grid, opts.discrete);
    const Complex z = partition_from_determinant(sys, gf.determinant, opts.discrete.tolerances);
    report.n_slices.push_back(grid.n_slices());
    report.dt.push_back(grid.dt());
    report.errors.push_back(oracle_error(gf, cont));
    report.error_bounds.push_back(5.0 * grid.dt() * (1.0 + energy * grid.duration()));
    report.partition.push_back(z);
    report.z_deviations.push_back(std::abs(z - 1.0));
  }
  const double largest = *std::ranges::max_element(report.errors);
  if (largest > opts.roundoff_floor) report.fitted_order = fitted_order(report.n_slices, report.errors);
  return report;
}

std::vector<CheckResult> convergence_checks(const ConvergenceReport& r, const OracleOptions& opts) {
  std::vector<CheckResult> out;
  const std::size_t m = r.errors.size();

  {
    double worst = 0.0;
    for (std::size_t k = 0; k < m; ++k) worst = std::max(worst, r.errors[k] / r.error_bounds[k]);
    out.push_back(make_check("oracle_error_bound", worst, 1.0, "max_N error / (5 dt (1 + ||eps|| T))"));
  }

  if (r.fitted_order) {
    const double center = 0.5 * (opts.order_min + opts.order_max);
    const double half = 0.5 * (opts.order_max - opts.order_min);
    out.push_back(make_check("convergence_order", std::abs(*r.fitted_order - center), half,
                             "fitted order " + format_double(*r.fitted_order)));
  } else {
    out.push_back({"convergence_order", true, 0.0, 0.0, "not applicable: errors at roundoff", false});
  }

  if (r.fitted_order) {
    double worst = 0.0;
    for (std::size_t k = 1; k < m; ++k)
      if (r.n_slices[k - 1] >= opts.monotone_from) worst = std::max(worst, r.errors[k] / r.errors[k - 1]);
    out.push_back(make_check("error_monotone", worst, 1.0 + opts.monotone_slack,
                             "max error ratio between successive grids"));
  } else {
    out.push_back({"error_monotone", true, 0.0, 0.0, "not applicable: errors at roundoff", false});
  }

  {
    const double exact_floor = 1e-13;
    const double largest = *std::ranges::max_element(r.z_deviations);
    if (largest <= exact_floor) {
      out.push_back(make_check("partition_function", largest, exact_floor, "Z = 1 to roundoff"));
    } else {
      const double c = r.n_slices[0] * r.z_deviations[0];
      double worst = 0.0;
      for (std::size_t k = 1; k < m; ++k) worst = std::max(worst, r.z_deviations[k] * r.n_slices[k] / c);
      out.push_back(make_check("partition_function", worst, 1.0,
                               "max_N |Z_N - 1| N / C, C = " + format_double(c) + " from the coarsest grid"));
    }
  }

  std::ranges::sort(out, {}, &CheckResult::name);
  return out;
}

bool all_passed(const std::vector<CheckResult>& checks) noexcept {
  return std::ranges::all_of(checks, [](const CheckResult& c) { return c.passed; });
}

LevelSystem sample_system(Statistics stat, Index levels, std::mt19937_64& rng, double energy_scale,
                          double occupation_max) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto random_matrix = [&] {
    ComplexMatrix m(levels, levels);
    for (Index i = 0; i < levels; ++i)
      for (Index j = 0; j < levels; ++j) m(i, j) = Complex(unit(rng), unit(rng));
    return m;
  };

  LevelSystem sys;
  sys.statistics = stat;
  const ComplexMatrix a = random_matrix();
  sys.epsilon = 0.5 * energy_scale * (a + a.adjoint()) / 2.0;
  if (levels == 1) sys.epsilon(0, 0) = Complex(energy_scale * unit(rng), 0.0);

  const double cap = stat.is_boson() ? occupation_max : std::min(occupation_max, 0.95);
  std::uniform_real_distribution<double> occupation(0.0, cap);
  Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix());
  const ComplexMatrix q = qr.householderQ();
  RealVector lambda(levels);
  for (Index k = 0; k < levels; ++k) lambda(k) = occupation(rng);
  sys.nbar = q * lambda.cast<Complex>().asDiagonal() * q.adjoint();
  sys.nbar = 0.5 * (sys.nbar + sys.nbar.adjoint()).eval();
  return sys;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json complex_pair(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json matrix_json(const ComplexMatrix& m) {
  nlohmann::json data = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      data.push_back(m(i, j).real());
      data.push_back(m(i, j).imag());
    }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

}  // namespace

nlohmann::json to_json(const CheckResult& c) {
  return {{"name", c.name},         {"passed", c.passed},       {"applicable", c.applicable},
          {"observed", c.observed}, {"threshold", c.threshold}, {"details", c.details}};
}

nlohmann::json to_json(const ConvergenceReport& r, const std::vector<CheckResult>& checks) {
  nlohmann::json partition = nlohmann::json::array();
  for (Complex z : r.partition) partition.push_back(complex_pair(z));
  nlohmann::json check_list = nlohmann::json::array();
  for (const auto& c : checks) check_list.push_back(to_json(c));
  return {{"t_initial", r.t_initial},
          {"t_final", r.t_final},
          {"n_slices", r.n_slices},
          {"dt", r.dt},
          {"errors", r.errors},
          {"error_bounds", r.error_bounds},
          {"partition", std::move(partition)},
          {"z_deviations", r.z_deviations},
          {"fitted_order", r.fitted_order ? nlohmann::json(*r.fitted_order) : nlohmann::json(nullptr)},
          {"checks", std::move(check_list)}};
}

nlohmann::json system_to_json(const LevelSystem& sys) {
  return {{"statistics", to_string(sys.statistics)},
          {"dimension", sys.dimension()},
          {"epsilon", matrix_json(sys.epsilon)},
          {"nbar", matrix_json(sys.nbar)}};
}

nlohmann::json verification_report(const LevelSystem& sys, const std::vector<CheckResult>& structure,
                                   const std::optional<ConvergenceReport>& convergence, const OracleOptions& opts) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : structure) checks.push_back(to_json(c));
  bool passed = all_passed(structure);
  nlohmann::json conv = nullptr;
  if (convergence) {
    const auto conv_checks = convergence_checks(*convergence, opts);
    passed = passed && all_passed(conv_checks);
    conv = to_json(*convergence, conv_checks);
  }
  return {{"schema", kReportSchema},
          {"system", system_to_json(sys)},
          {"structure", std::move(checks)},
          {"convergence", std::move(conv)},
          {"passed", passed}};
}

}  // namespace keldysh
