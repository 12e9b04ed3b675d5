#include "open_dgd/bounds.hpp"
#include "open_dgd/dgd.hpp"
#include "open_dgd/io.hpp"
#include "open_dgd/kernels.hpp"
#include "open_dgd/open_system.hpp"
#include "open_dgd/worst_case.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

namespace fs = std::filesystem;
using odgd::io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

// Raised for bad flag values that CLI11 cannot validate on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string instance;
  std::string schedule;
  int iters = 1000;
  std::optional<double> rho;
  std::optional<double> eta;
  std::uint64_t seed = 0;
  std::string out;
  std::string kappas = "10,100,1000";
  int n = 2;
  int jobs = 0;

  int count = 1000;
  int restarts = 16;
  int budget = 20000;
  double alpha = 1.0;
  double beta = 1.0;
  double lambda_n = 0.0;
};

fs::path output_dir(const Config& cfg) {
  if (!cfg.out.empty()) return cfg.out;
  if (const char* env = std::getenv("OPEN_DGD_OUT"); env && *env) return env;
  return "out";
}

std::vector<double> parse_kappas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("--kappas: cannot parse \"" + item + "\"");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw UsageError("--kappas: cannot parse \"" + item + "\"");
    }
    if (!(v >= 1.0) || !std::isfinite(v)) throw UsageError("--kappas: each kappa must be >= 1");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--kappas: grid is empty");
  return out;
}

odgd::io::InstanceFile load(const Config& cfg) {
  if (cfg.instance.empty()) throw UsageError("--instance is required");
  odgd::io::InstanceFile file = odgd::io::load_instance(cfg.instance);
  try {
    if (cfg.rho) file.instance = file.instance.with_rho(*cfg.rho);
    if (cfg.eta) file.instance = file.instance.with_eta(*cfg.eta);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return file;
}

Json envelope_json(const odgd::StabilityEnvelope& env) {
  return Json{{"kappa", env.kappa},
              {"kappa_rho", env.kappa_rho},
              {"b", env.b},
              {"R", env.R},
              {"branch", env.small_kappa_branch ? "kappa_rho<3" : "kappa_rho>=3"}};
}

void write_json(const fs::path& path, const Json& j) {
  odgd::io::write_text(path, j.dump(2) + "\n");
}

void warn_all(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_simulate(const Config& cfg) {
  const odgd::io::InstanceFile file = load(cfg);
  const odgd::ProblemInstance& inst = file.instance;
  if (cfg.iters < 0) throw UsageError("--iters must be nonnegative");
  const odgd::StackedState x0 =
      file.x0 ? *file.x0 : odgd::StackedState(inst.agents(), inst.dim());
  const fs::path out = output_dir(cfg);
  const odgd::StabilityEnvelope env = odgd::stability_radius(inst);

  Json summary{{"instance", cfg.instance},
               {"fingerprint", file.fingerprint},
               {"iterations", cfg.iters},
               {"agents", inst.agents()},
               {"dim", inst.dim()},
               {"rho", inst.rho()},
               {"eta", inst.eta()},
               {"eta_within_limit", inst.eta_within_limit()},
               {"envelope", envelope_json(env)}};
  bool pass = true;

  if (!cfg.schedule.empty()) {
    const odgd::EventSchedule schedule = odgd::io::load_schedule(cfg.schedule);
    try {
      schedule.validate(inst.params(), inst.agents());
    } catch (const std::invalid_argument& e) {
      throw odgd::io::ParseError(cfg.schedule + ": " + e.what());
    }
    const odgd::OpenTrace trace = odgd::simulate_open(inst, x0, schedule, cfg.iters);
    warn_all(trace.warnings);
    odgd::io::write_text(out / "trace.csv", odgd::io::open_trace_csv(trace));
    const odgd::CheckRecord stab = odgd::check_stability_envelope(trace, env);
    const auto& last = trace.records.back();
    summary["schedule"] = cfg.schedule;
    summary["schedule_mode"] = odgd::to_string(schedule.mode());
    summary["terminal_norm_x"] = last.base.norm_x;
    summary["terminal_dist_to_min"] = last.base.dist_to_min;
    summary["max_norm"] = trace.max_norm;
    summary["max_norm_after_entry"] = trace.max_norm_after_entry;
    summary["entry_k"] = trace.entry_k;
    summary["total_events"] = trace.total_events;
    summary["inside_ball_violations"] = trace.violations;
    summary["pass"] = Json{{"stability", stab.pass}};
    summary["warnings"] = trace.warnings;
    pass = stab.pass;
  } else {
    const odgd::DGDTrace trace = odgd::run(inst, x0, cfg.iters);
    warn_all(trace.warnings);
    odgd::io::write_text(out / "trace.csv", odgd::io::trace_csv(trace));
    const int contraction =
        odgd::contraction_violations(trace, inst.eta(), inst.params().alpha);
    int entry = -1;
    int violations = 0;
    double max_norm = 0.0;
    for (const auto& r : trace.records) {
      max_norm = std::max(max_norm, r.norm_x);
      if (entry < 0 && r.norm_x <= env.R) entry = r.k;
      if (entry >= 0 && r.k > entry && r.norm_x > env.R + odgd::kBallSlack) ++violations;
    }
    const auto& last = trace.records.back();
    summary["terminal_norm_x"] = last.norm_x;
    summary["terminal_dist_to_min"] = last.dist_to_min;
    summary["terminal_gradient_norm"] = trace.terminal_gradient_norm;
    summary["max_norm"] = max_norm;
    summary["entry_k"] = entry;
    summary["inside_ball_violations"] = violations;
    summary["contraction_violations"] = contraction;
    // Contraction is only guaranteed for admissible step sizes.
    const bool contraction_ok = contraction == 0 || !inst.eta_within_limit();
    summary["pass"] = Json{{"stability", violations == 0}, {"contraction", contraction_ok}};
    summary["warnings"] = trace.warnings;
    pass = violations == 0 && contraction_ok;
  }
  write_json(out / "summary.json", summary);
  std::cout << fmt::format("wrote {} and {}\n", (out / "trace.csv").string(),
                           (out / "summary.json").string());
  return pass ? kExitOk : kExitCheckFailure;
}

odgd::BoundsReport verify_instance(const Config& cfg) {
  const odgd::io::InstanceFile file = load(cfg);
  const odgd::ProblemInstance& inst = file.instance;
  odgd::BoundsReport report = odgd::check_membership(inst);
  if (!report.all_pass()) {
    // Bounds assume membership; evaluating them on a corrupted instance is meaningless.
    report.fingerprint = file.fingerprint;
    return report;
  }
  report.append(odgd::check_localization(inst));
  if (file.swap) {
    std::vector<odgd::QuadraticFunction> common;
    for (int i = 0; i < inst.agents(); ++i) {
      if (i != file.swap->agent) common.push_back(inst.functions()[static_cast<size_t>(i)]);
    }
    const odgd::FunctionClassParams& p = inst.params();
    const odgd::QuadraticFunction& fb = file.swap->function;
    const odgd::MembershipReport m = odgd::validate_membership(fb, p);
    report.add(odgd::make_check("swap_membership", m.ok() ? 0.0 : 1.0, 0.0));
    if (m.ok()) {
      report.append(odgd::check_sensitivity(
          common, inst.functions()[static_cast<size_t>(file.swap->agent)], fb, p));
    }
  }
  if (!cfg.schedule.empty()) {
    const odgd::EventSchedule schedule = odgd::io::load_schedule(cfg.schedule);
    try {
      schedule.validate(inst.params(), inst.agents());
    } catch (const std::invalid_argument& e) {
      throw odgd::io::ParseError(cfg.schedule + ": " + e.what());
    }
    const odgd::StackedState x0 =
        file.x0 ? *file.x0 : odgd::StackedState(inst.agents(), inst.dim());
    const odgd::OpenTrace trace =
        odgd::simulate_open(inst, x0, schedule, cfg.iters, {false, false});
    report.add(odgd::check_stability_envelope(trace, trace.envelope));
  }
  report.fingerprint = file.fingerprint;
  return report;
}

int cmd_verify(const Config& cfg) {
  odgd::BoundsReport report;
  if (!cfg.instance.empty()) {
    report = verify_instance(cfg);
  } else {
    if (cfg.count < 1) throw UsageError("--count must be positive");
    odgd::BatchConfig batch;
    batch.cells = odgd::default_grid();
    const int cells = static_cast<int>(batch.cells.size());
    batch.instances_per_cell = (cfg.count + cells - 1) / cells;
    batch.seed = cfg.seed;
    const odgd::BatchResult result = odgd::verify_batch(batch);
    report = result.as_report();
    report.fingerprint = odgd::fingerprint_of(
        fmt::format("batch:seed={}:per_cell={}", cfg.seed, batch.instances_per_cell));
    std::cout << fmt::format("{} instances, {} checks, {} failures\n",
                             batch.instances_per_cell * cells, result.checks, result.failures);
  }
  const fs::path out = output_dir(cfg);
  odgd::io::write_text(out / "report.csv", odgd::io::report_csv(report));
  write_json(out / "report.json", odgd::io::report_json(report));
  for (const auto& c : report.checks) {
    if (!c.pass) {
      std::cerr << fmt::format("FAIL {}: observed {} bound {}\n", c.name,
                               odgd::io::format_double(c.observed),
                               odgd::io::format_double(c.bound));
    }
  }
  std::cout << fmt::format("{} of {} checks pass; wrote {}\n",
                           report.checks.size() - report.failures(), report.checks.size(),
                           (out / "report.csv").string());
  return report.all_pass() ? kExitOk : kExitCheckFailure;
}

int cmd_worstcase(const Config& cfg) {
  const std::vector<double> kappas = parse_kappas(cfg.kappas);
  if (cfg.n < 2) throw UsageError("--n must be >= 2");
  if (cfg.restarts < 1) throw UsageError("--restarts must be positive");
  if (cfg.budget < 1) throw UsageError("--budget must be positive");
  odgd::SearchParams params;
  params.restarts = cfg.restarts;
  params.budget = cfg.budget;
  params.seed = cfg.seed;
  const std::vector<odgd::ScalingRow> rows = odgd::scaling_report(cfg.n, kappas, params);
  const fs::path out = output_dir(cfg);
  odgd::io::write_text(out / "scaling.csv", odgd::io::scaling_csv(rows));
  bool pass = true;
  for (const auto& r : rows) {
    // Every common function at f1 reproduces the two-agent construction value.
    const double lower = (r.kappa - 1.0) / (2.0 * r.sqrt_kappa);
    const bool ok = r.best_value >= lower - 1e-9 * (1.0 + lower) &&
                    r.best_value <= r.sensitivity_bound + 1e-9 * (1.0 + r.sensitivity_bound);
    pass = pass && ok;
    std::cout << fmt::format("kappa={:g} best={:.6f} best/sqrt(kappa)={:.6f} bound={:.6f}{}\n",
                             r.kappa, r.best_value, r.ratio_to_sqrt_kappa, r.sensitivity_bound,
                             ok ? "" : "  FAIL");
  }
  return pass ? kExitOk : kExitCheckFailure;
}

int cmd_localize(const Config& cfg) {
  double alpha = cfg.alpha;
  double beta = cfg.beta;
  double rho = cfg.rho.value_or(0.0);
  double lambda_n = cfg.lambda_n;
  int n = cfg.n;
  if (!cfg.instance.empty()) {
    const odgd::io::InstanceFile file = load(cfg);
    alpha = file.instance.params().alpha;
    beta = file.instance.params().beta;
    rho = file.instance.rho();
    lambda_n = file.instance.network().lambda_max();
    n = file.instance.agents();
  }
  if (!(alpha > 0.0) || !(beta >= alpha)) throw UsageError("need 0 < alpha <= beta");
  if (!(rho >= 0.0) || !(lambda_n >= 0.0)) throw UsageError("rho and lambda_n must be >= 0");
  if (n < 1) throw UsageError("--n must be positive");
  const odgd::StabilityEnvelope env = odgd::stability_radius(alpha, beta, rho, lambda_n, n);
  std::cout << fmt::format("R_kappa {}\n", odgd::io::format_double(
                                               odgd::formulas::localization_radius(env.kappa)));
  std::cout << fmt::format("R {}\n", odgd::io::format_double(env.R));
  std::cout << fmt::format("kappa_rho {}\n", odgd::io::format_double(env.kappa_rho));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized gradient descent in open multi-agent systems"};
  app.require_subcommand(1);
  Config cfg;

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
    sub->add_option("--out", cfg.out, "Output directory (default $OPEN_DGD_OUT or ./out)");
    sub->add_option("--jobs", cfg.jobs, "Maximum worker threads (0 = runtime default)")
        ->check(CLI::NonNegativeNumber);
  };
  auto add_instance = [&cfg](CLI::App* sub) {
    sub->add_option("--instance", cfg.instance, "Instance JSON");
    sub->add_option("--schedule", cfg.schedule, "Event schedule JSON");
    sub->add_option("--iters", cfg.iters, "Iterations")->capture_default_str();
    sub->add_option("--rho", cfg.rho, "Override the penalty rho");
    sub->add_option("--eta", cfg.eta, "Override the step size");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Run DGD and write trace.csv, summary.json");
  add_instance(simulate);
  add_common(simulate);

  CLI::App* verify = app.add_subcommand("verify", "Check every bound; write report.csv, report.json");
  add_instance(verify);
  add_common(verify);
  verify->add_option("--count", cfg.count, "Random instances when no --instance is given")
      ->capture_default_str();

  CLI::App* worstcase = app.add_subcommand("worstcase", "Worst-case search; write scaling.csv");
  add_common(worstcase);
  worstcase->add_option("--n", cfg.n, "Functions per sum")->capture_default_str();
  worstcase->add_option("--kappas", cfg.kappas, "Comma-separated kappa grid")
      ->capture_default_str();
  worstcase->add_option("--restarts", cfg.restarts, "Multi-start count")->capture_default_str();
  worstcase->add_option("--budget", cfg.budget, "Evaluations per restart")
      ->capture_default_str();

  CLI::App* localize = app.add_subcommand("localize", "Print R_kappa, R and kappa_rho");
  localize->add_option("--instance", cfg.instance, "Instance JSON (overrides the flags below)");
  localize->add_option("--alpha", cfg.alpha, "Strong convexity")->capture_default_str();
  localize->add_option("--beta", cfg.beta, "Smoothness")->capture_default_str();
  localize->add_option("--rho", cfg.rho, "Penalty");
  localize->add_option("--lambda-n", cfg.lambda_n, "Largest Laplacian eigenvalue")
      ->capture_default_str();
  localize->add_option("--n", cfg.n, "Agents")->capture_default_str();
  localize->add_option("--jobs", cfg.jobs, "Ignored; accepted for uniformity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (cfg.jobs > 0) odgd::kernels::set_threads(cfg.jobs);

  try {
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    if (worstcase->parsed()) return cmd_worstcase(cfg);
    if (localize->parsed()) return cmd_localize(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const odgd::io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
  return kExitUsage;
}
