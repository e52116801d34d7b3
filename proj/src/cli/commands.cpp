#include "cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "keldysh/discrete.hpp"
#include "keldysh/verify.hpp"

namespace keldysh::cli {

using nlohmann::json;

namespace {

// 17 significant digits round-trips every double.
std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void require_within_cap(const RunConfig& cfg, int n) {
  const Index dim = 2 * static_cast<Index>(n) * cfg.epsilon.rows();
  if (dim > cfg.max_dimension)
    throw Error(ErrorCode::GridTooLarge, "N = " + std::to_string(n) + " gives contour dimension " +
                                             std::to_string(dim) + " above the cap " +
                                             std::to_string(cfg.max_dimension));
}

std::vector<int> refinements(const RunConfig& cfg) {
  return cfg.n_list.empty() ? std::vector<int>{cfg.n_slices} : cfg.n_list;
}

DiscreteOptions discrete_options(const RunConfig& cfg) {
  DiscreteOptions opts;
  opts.max_dimension = cfg.max_dimension;
  opts.tolerances = cfg.tolerances;
  return opts;
}

std::vector<TimeGrid> oracle_grids(const RunConfig& cfg) {
  std::vector<TimeGrid> grids;
  for (int n : cfg.n_list) {
    require_within_cap(cfg, n);
    grids.push_back(cfg.grid(n));
  }
  return grids;
}

void print_summary(std::ostream& log, const char* what, const std::vector<CheckResult>& checks) {
  std::size_t passed = 0;
  for (const auto& c : checks) {
    passed += c.passed;
    if (!c.passed) log << "FAIL " << c.name << ": observed " << c.observed << " > " << c.threshold << "\n";
  }
  log << what << ": " << passed << "/" << checks.size() << " checks passed\n";
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Singular:
    case ErrorCode::DegenerateBoundarySystem: return kExitNumericalError;
    default: return kExitConfigError;
  }
}

int cmd_gf(const RunConfig& cfg, std::ostream& out) {
  const FreeGreenFunction gf(cfg.system(), cfg.tolerances);
  const TimeGrid grid = cfg.grid();
  const int n = grid.n_slices();
  const Index d = gf.dimension();
  const bool csv = cfg.output.format == OutputFormat::Csv;

  json records = json::array();
  if (csv) out << "t,t_prime,component,row,col,re,im\n";
  for (const ComponentSpec& comp : cfg.output.components) {
    for (int a = 0; a <= n; ++a) {
      const double t = grid.time(a);
      for (int b = 0; b <= n; ++b) {
        const double tp = grid.time(b);
        const ComplexMatrix value = std::visit(
            [&](auto which) -> ComplexMatrix {
              if constexpr (std::is_same_v<decltype(which), KeldyshComponent>)
                return gf.component(which, t, tp, grid.t_initial());
              else
                return gf.contour(which, t, tp, grid.t_initial());
            },
            comp.which);
        for (Index r = 0; r < d; ++r)
          for (Index c = 0; c < d; ++c) {
            const Complex z = value(r, c);
            if (csv) {
              out << num(t) << ',' << num(tp) << ',' << comp.name << ',' << r << ',' << c << ',' << num(z.real())
                  << ',' << num(z.imag()) << '\n';
            } else {
              records.push_back({{"t", t},   {"t_prime", tp},     {"component", comp.name},
                                 {"row", r}, {"col", c},          {"re", z.real()},
                                 {"im", z.imag()}});
            }
          }
      }
    }
  }
  if (!csv) out << json{{"schema", kReportSchema}, {"records", std::move(records)}}.dump(2) << '\n';
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& log, const VerifyFlags& flags) {
  const LevelSystem sys = cfg.system();
  require_within_cap(cfg, cfg.n_slices);
  const std::vector<TimeGrid> grids = oracle_grids(cfg);

  StructureOptions sopts;
  sopts.t_initial = cfg.t_initial;
  sopts.t_final = cfg.t_final;
  sopts.threshold = cfg.structure_threshold;
  sopts.tolerances = cfg.tolerances;
  const ComponentFn components = flags.corrupt_keldysh ? corrupted_keldysh_components(sys) : ComponentFn{};
  const std::vector<CheckResult> structure = run_structure_suite(sys, sopts, components);
  print_summary(log, "structure", structure);

  OracleOptions oopts;
  oopts.discrete = discrete_options(cfg);
  std::optional<ConvergenceReport> convergence;
  if (grids.size() >= 2) {
    convergence = run_oracle_suite(sys, grids, oopts);
    print_summary(log, "convergence", convergence_checks(*convergence, oopts));
  }

  const json report = verification_report(sys, structure, convergence, oopts);
  out << report.dump(2) << '\n';
  return report.at("passed").get<bool>() ? kExitOk : kExitVerificationFailed;
}

int cmd_z(const RunConfig& cfg, std::ostream& out) {
  const LevelSystem sys = cfg.system();
  const DiscreteOptions opts = discrete_options(cfg);
  const bool csv = cfg.output.format == OutputFormat::Csv;
  json rows = json::array();
  if (csv) out << "n_slices,re,im,abs_deviation\n";
  for (int n : refinements(cfg)) {
    require_within_cap(cfg, n);
    const Complex z = discrete_partition_function(sys, cfg.grid(n), opts);
    const double dev = std::abs(z - 1.0);
    if (csv)
      out << n << ',' << num(z.real()) << ',' << num(z.imag()) << ',' << num(dev) << '\n';
    else
      rows.push_back({{"n_slices", n}, {"re", z.real()}, {"im", z.imag()}, {"abs_deviation", dev}});
  }
  if (!csv) out << json{{"schema", kReportSchema}, {"partition", std::move(rows)}}.dump(2) << '\n';
  return kExitOk;
}

int cmd_converge(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  if (cfg.n_list.size() < 2) throw ConfigError("converge: grid.n_list needs at least two grid sizes");
  const LevelSystem sys = cfg.system();
  OracleOptions oopts;
  oopts.discrete = discrete_options(cfg);
  const ConvergenceReport report = run_oracle_suite(sys, oracle_grids(cfg), oopts);
  const std::vector<CheckResult> checks = convergence_checks(report, oopts);
  print_summary(log, "convergence", checks);

  if (cfg.output.format == OutputFormat::Csv) {
    out << "n_slices,dt,error,error_bound,z_re,z_im,z_deviation\n";
    for (std::size_t k = 0; k < report.n_slices.size(); ++k)
      out << report.n_slices[k] << ',' << num(report.dt[k]) << ',' << num(report.errors[k]) << ','
          << num(report.error_bounds[k]) << ',' << num(report.partition[k].real()) << ','
          << num(report.partition[k].imag()) << ',' << num(report.z_deviations[k]) << '\n';
  } else {
    out << verification_report(sys, {}, report, oopts).dump(2) << '\n';
  }
  return all_passed(checks) ? kExitOk : kExitVerificationFailed;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-time-contour Green's functions for non-interacting bosons and fermions"};
  app.name("keldysh");
  app.require_subcommand(1);

  std::string config_path;
  VerifyFlags flags;
  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->allow_extras();
    return sub;
  };
  CLI::App* gf = add("gf", "Tabulate Green's function components on the (t, t') grid");
  CLI::App* verify = add("verify", "Run the structure suite (and the oracle suite if grid.n_list is set)");
  CLI::App* z = add("z", "Discrete partition function for each grid size");
  CLI::App* converge = add("converge", "Convergence of the discrete oracle over grid.n_list");
  verify->add_flag("--corrupt-keldysh", flags.corrupt_keldysh)->group("");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    json doc = load_config_file(config_path);
    const std::vector<std::string> extras = active->remaining();
    for (std::size_t k = 0; k < extras.size(); ++k) {
      const std::string& token = extras[k];
      if (token.rfind("--", 0) != 0) throw ConfigError("unexpected argument \"" + token + "\"");
      const std::string key = token.substr(2);
      const std::size_t eq = key.find('=');
      if (eq != std::string::npos) {
        apply_override(doc, key.substr(0, eq), key.substr(eq + 1));
      } else {
        if (k + 1 >= extras.size()) throw ConfigError("override " + token + " needs a value");
        apply_override(doc, key, extras[++k]);
      }
    }
    const RunConfig cfg = parse_config(doc);

    std::ofstream file;
    std::ostream* sink = &out;
    if (cfg.output.path != "-") {
      file.open(cfg.output.path);
      if (!file) throw ConfigError("cannot open output path " + cfg.output.path);
      sink = &file;
    }

    int code = kExitOk;
    if (active == gf) code = cmd_gf(cfg, *sink);
    else if (active == verify) code = cmd_verify(cfg, *sink, err, flags);
    else if (active == z) code = cmd_z(cfg, *sink);
    else if (active == converge) code = cmd_converge(cfg, *sink, err);
    sink->flush();
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    err << (code == kExitConfigError ? "config error: " : "numerical error: ") << e.what() << '\n';
    return code;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumericalError;
  }
}

}  // namespace keldysh::cli
