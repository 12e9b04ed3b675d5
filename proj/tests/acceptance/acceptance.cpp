// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Ground truth comes from dense solves written here rather than the library's
// own minimizer routines.

#include "open_dgd/bounds.hpp"
#include "open_dgd/dgd.hpp"
#include "open_dgd/open_system.hpp"
#include "open_dgd/random_instances.hpp"
#include "open_dgd/worst_case.hpp"

#include "../cli_harness.hpp"

#include <fmt/format.h>

#include <Eigen/QR>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace {

using namespace odgd;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Householder QR of the summed system; no Cholesky, no refinement.
Vector oracle_minimizer_f(const std::vector<QuadraticFunction>& fs) {
  const int d = fs.front().dimension();
  Matrix h = Matrix::Zero(d, d);
  Vector rhs = Vector::Zero(d);
  for (const auto& f : fs) {
    h += f.hessian();
    rhs += f.hessian() * f.minimizer();
  }
  return h.colPivHouseholderQr().solve(rhs);
}

Vector oracle_minimizer_F_rho(const ProblemInstance& inst) {
  const int n = inst.agents(), d = inst.dim();
  const Matrix& lap = inst.network().laplacian();
  Matrix h = Matrix::Zero(n * d, n * d);
  Vector rhs(n * d);
  for (int i = 0; i < n; ++i) {
    const auto& f = inst.functions()[static_cast<size_t>(i)];
    h.block(i * d, i * d, d, d) += f.hessian();
    rhs.segment(i * d, d) = f.hessian() * f.minimizer();
    for (int j = 0; j < n; ++j) {
      for (int a = 0; a < d; ++a) h(i * d + a, j * d + a) += inst.rho() * lap(i, j);
    }
  }
  return h.colPivHouseholderQr().solve(rhs);
}

const std::vector<BatchCell>& grid() {
  static const std::vector<BatchCell> cells = default_grid();
  return cells;
}

Outcome localization() {
  int instances = 0, failures = 0;
  double worst = -1e300;
  std::uniform_real_distribution<double> log_rho(std::log(1e-2), std::log(1e3));
  while (instances < 1000) {
    for (const BatchCell& cell : grid()) {
      if (instances >= 1000) break;
      Rng rng = make_stream(1001, static_cast<std::uint64_t>(instances));
      const FunctionClassParams p{1.0, cell.kappa, cell.dim};
      std::bernoulli_distribution coin(0.5);
      const RandomQuadraticOptions opt{coin(rng), coin(rng)};
      std::vector<QuadraticFunction> fs;
      for (int i = 0; i < cell.agents; ++i) fs.push_back(random_quadratic(p, rng, opt));
      const ProblemInstance inst(fs, Network(random_adjacency(cell.agents, rng)),
                                 std::exp(log_rho(rng)), std::nullopt, p);
      const double radius = 1.0 + std::sqrt(cell.kappa);
      const double slack = 1e-9;
      const double xf = oracle_minimizer_f(fs).norm();
      const Vector xr = oracle_minimizer_F_rho(inst);
      double block = 0.0;
      for (int i = 0; i < cell.agents; ++i) block = std::max(block, xr.segment(i * cell.dim, cell.dim).norm());
      worst = std::max({worst, xf / radius, block / radius});
      if (xf > radius + slack || block > radius + slack) ++failures;
      // The library's report must agree with the oracle verdict.
      if (!check_localization(inst).all_pass()) ++failures;
      ++instances;
    }
  }
  return {failures == 0, fmt::format("{} instances, {} failures, max ||x||/R_kappa = {:.4f}", instances,
                                     failures, worst)};
}

Outcome example_reproduction() {
  const ExamplePair ex = make_example_pair(100.0);
  const Vector a = oracle_minimizer_f({ex.f1, ex.f2});
  const Vector b = oracle_minimizer_f({ex.f1, ex.fb});
  const Vector la = exact_minimizer_f(std::vector<QuadraticFunction>{ex.f1, ex.f2});
  const Vector lb = exact_minimizer_f(std::vector<QuadraticFunction>{ex.f1, ex.fb});
  const double err = std::max({std::abs(a[0]), std::abs(a[1] - 4.95), std::abs(b[0]), std::abs(b[1]),
                               std::abs(la[0]), std::abs(la[1] - 4.95), std::abs(lb[0]), std::abs(lb[1])});
  return {err <= 1e-9, fmt::format("argmin(f1+f2) = ({:.12f}, {:.12f}), argmin(f1+fb) = ({:.1e}, {:.1e}), "
                                   "max error {:.1e}",
                                   la[0], la[1], lb[0], lb[1], err)};
}

Outcome sensitivity() {
  BatchConfig cfg;
  cfg.cells = grid();
  cfg.instances_per_cell = 1000;
  cfg.seed = 1003;
  cfg.localization = false;
  cfg.sensitivity = true;
  const BatchResult res = verify_batch(cfg);

  // Spot-check a subset of the batch against the oracle solve.
  int oracle_fail = 0;
  for (std::uint64_t idx = 0; idx < 2000; idx += 7) {
    const BatchCell& cell = grid()[static_cast<size_t>(idx) / 1000 * 17 % grid().size()];
    Rng rng = make_stream(1004, idx);
    const FunctionClassParams p{1.0, cell.kappa, cell.dim};
    std::vector<QuadraticFunction> common;
    for (int i = 0; i + 1 < cell.agents; ++i) common.push_back(random_quadratic(p, rng, {true, true}));
    const QuadraticFunction fa = random_quadratic(p, rng, {true, true});
    const QuadraticFunction fb = random_quadratic(p, rng, {true, true});
    std::vector<QuadraticFunction> sa = common, sb = common;
    sa.push_back(fa);
    sb.push_back(fb);
    const double gap = (oracle_minimizer_f(sa) - oracle_minimizer_f(sb)).norm();
    if (gap > formulas::sensitivity(cell.agents, cell.kappa).min() * (1 + 1e-9)) ++oracle_fail;
  }

  bool identity = true;
  for (int n = 2; n <= 10; ++n) {
    for (const double kappa : {1.0, 10.0, 100.0, 1000.0}) {
      const auto m = formulas::sensitivity(n, kappa);
      const auto s = formulas::single_change(n, kappa);
      identity = identity && m.without_n == 2 * s.without_n && m.sqrt_n == 2 * s.sqrt_n &&
                 m.linear_n == 2 * s.linear_n && m.min() == 2 * s.min();
    }
  }
  const std::size_t instances = cfg.cells.size() * static_cast<std::size_t>(cfg.instances_per_cell);
  return {res.all_pass() && oracle_fail == 0 && identity,
          fmt::format("{} instances, {} checks, {} failures; oracle spot-check failures {}; "
                      "main = 2 x single-change identity {}",
                      instances, res.checks, res.failures, oracle_fail, identity ? "exact" : "BROKEN")};
}

Outcome contraction() {
  int violations = 0;
  double worst_ratio = 0.0;
  for (int t = 0; t < 100; ++t) {
    Rng rng = make_stream(1005, static_cast<std::uint64_t>(t));
    const BatchCell& cell = grid()[static_cast<size_t>(t * 13) % grid().size()];
    std::uniform_real_distribution<double> log_rho(std::log(1e-2), std::log(1e2));
    const ProblemInstance inst =
        random_instance({cell.agents, {1.0, cell.kappa, cell.dim}, std::exp(log_rho(rng))}, rng);
    std::normal_distribution<double> g;
    Vector x0(inst.agents() * inst.dim());
    for (auto& v : x0) v = 3.0 * g(rng);
    const DGDTrace trace = run(inst, StackedState(inst.agents(), inst.dim(), x0), 100, {true});
    const Vector star = oracle_minimizer_F_rho(inst);
    const double q = 1.0 - inst.eta() * inst.params().alpha;
    for (size_t k = 0; k + 1 < trace.iterates.size(); ++k) {
      const double before = (trace.iterates[k].values() - star).squaredNorm();
      const double after = (trace.iterates[k + 1].values() - star).squaredNorm();
      if (after > q * before + 1e-12) ++violations;
      if (before > 1e-20) worst_ratio = std::max(worst_ratio, after / (q * before));
    }
  }
  return {violations == 0,
          fmt::format("100 instances x 100 steps, {} violations, max observed ratio to (1 - eta alpha) {:.6f}",
                      violations, worst_ratio)};
}

Outcome form_equivalence() {
  double worst = 0.0;
  int tested = 0;
  for (int t = 0; t < 100; ++t) {
    Rng rng = make_stream(1006, static_cast<std::uint64_t>(t));
    const BatchCell& cell = grid()[static_cast<size_t>(t * 29) % grid().size()];
    std::uniform_real_distribution<double> log_rho(std::log(1e-2), std::log(1e2));
    const ProblemInstance inst =
        random_instance({cell.agents, {1.0, cell.kappa, cell.dim}, std::exp(log_rho(rng))}, rng);
    std::normal_distribution<double> g;
    Vector x(inst.agents() * inst.dim());
    for (auto& v : x) v = 2.0 * g(rng);
    const StackedState s(inst.agents(), inst.dim(), x);
    const Vector a = dgd_step(inst, s).values();
    const Vector b = dgd_step_mixing(inst, s).values();
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    ++tested;
  }
  return {worst <= 1e-12, fmt::format("{} instances, max coordinate difference {:.2e}", tested, worst)};
}

Outcome stability() {
  const double targets[] = {1.0, 3.0, 10.0, 100.0};
  constexpr int kSchedules = 1000;
  constexpr int kSteps = 10000;
  std::vector<int> violations(kSchedules, 0);
  std::vector<double> ratio(kSchedules, 0.0);
  std::vector<int> small_branch(kSchedules, 0);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < kSchedules; ++s) {
    Rng rng = make_stream(1007, static_cast<std::uint64_t>(s));
    const double kappa_rho = targets[s % 4];
    const int n = 2 + (s / 4) % 5;
    const int d = 1 + (s / 20) % 2;
    const Network net(random_adjacency(n, rng));
    // Split kappa_rho between the functions and the penalty.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double beta = kappa_rho == 1.0 ? 1.0 : 1.0 + u(rng) * (kappa_rho - 1.0);
    const double rho = kappa_rho == 1.0 ? 0.0 : (kappa_rho - beta) / net.lambda_max();
    const FunctionClassParams p{1.0, beta, d};
    std::vector<QuadraticFunction> fs;
    for (int i = 0; i < n; ++i) fs.push_back(random_quadratic(p, rng, {true, true}));
    const ProblemInstance inst(fs, net, rho, std::nullopt, p);
    const StabilityEnvelope env = stability_radius(inst);
    const StackedState x0(n, d, env.R * random_on_sphere(n * d, rng));
    const EventSchedule schedule = s % 5 == 4 ? EventSchedule::adversarial_worst_effort(1, static_cast<std::uint64_t>(s), 4)
                                              : EventSchedule::adversarial_random(1 + s % 3, static_cast<std::uint64_t>(s));
    const OpenTrace trace = simulate_open(inst, x0, schedule, kSteps, {false, false});
    violations[static_cast<size_t>(s)] = trace.violations + (trace.entry_k != 0 ? 1 : 0);
    ratio[static_cast<size_t>(s)] = trace.max_norm_after_entry / env.R;
    small_branch[static_cast<size_t>(s)] = env.small_kappa_branch ? 1 : 0;
  }
  int total = 0, small = 0;
  double worst = 0.0;
  for (int s = 0; s < kSchedules; ++s) {
    total += violations[static_cast<size_t>(s)];
    small += small_branch[static_cast<size_t>(s)];
    worst = std::max(worst, ratio[static_cast<size_t>(s)]);
  }
  const bool both = small > 0 && small < kSchedules;
  return {total == 0 && both && worst <= 1.0 + 1e-9,
          fmt::format("{} schedules x {} steps, {} violations, max ||x||/R = {:.6f}, small-branch runs {} / large {}",
                      kSchedules, kSteps, total, worst, small, kSchedules - small)};
}

Outcome gradient_step_invariance() {
  Rng rng = make_stream(1008, 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> log_k3(std::log(3.0), std::log(1e4));
  std::uniform_real_distribution<double> log_k1(0.0, std::log(1e4));
  std::uniform_real_distribution<double> log_s(std::log(0.1), std::log(20.0));
  std::uniform_int_distribution<int> dim(1, 5);
  int large_fail = 0, small_fail = 0;
  double large_worst = 0.0, small_worst = 0.0;
  for (int t = 0; t < 20000; ++t) {
    const bool large = t % 2 == 0;
    const double kappa = std::exp(large ? log_k3(rng) : log_k1(rng));
    const double alpha = std::exp(log_s(rng));
    const double b = std::exp(log_s(rng));
    const int d = dim(rng);
    const QuadraticFunction base = random_quadratic({alpha, alpha * kappa, d}, rng, {u(rng) < 0.7, u(rng) < 0.7});
    const QuadraticFunction g(base.hessian(), base.minimizer() * b);
    const double eta = 1.0 / (alpha * kappa);
    if (large) {
      const double outer = (1.0 + std::sqrt(2.0 * kappa)) * b;
      const double r = u(rng) < 0.3 ? outer : b + u(rng) * (outer - b);
      const Vector x = r * random_on_sphere(d, rng);
      const double ratio = (x - eta * g.gradient(x)).norm() / outer;
      large_worst = std::max(large_worst, ratio);
      if (ratio > 1.0 + 1e-12) ++large_fail;
    } else {
      const Vector x = b * (u(rng) < 0.5 ? random_on_sphere(d, rng) : random_in_ball(d, rng));
      const double ratio = (x - eta * g.gradient(x)).norm() / (3.0 * b);
      small_worst = std::max(small_worst, ratio);
      if (ratio > 1.0 + 1e-12) ++small_fail;
    }
  }
  return {large_fail == 0 && small_fail == 0,
          fmt::format("10000 + 10000 samples; large-kappa annulus: {} violations (max ratio {:.4f}); "
                      "small-x: {} violations (max ratio {:.4f})",
                      large_fail, large_worst, small_fail, small_worst)};
}

Outcome scaling() {
  const std::vector<double> kappas{10.0, 100.0, 1000.0};
  const SearchParams params;  // default budget
  const auto rows = scaling_report(2, kappas, params);
  bool lower = true;
  double lo = 1e300, hi = 0.0;
  std::string values;
  for (const auto& r : rows) {
    const double construction = (r.kappa - 1.0) / (2.0 * std::sqrt(r.kappa));
    lower = lower && r.best_value >= construction * (1.0 - 1e-15);
    lo = std::min(lo, r.ratio_to_sqrt_kappa);
    hi = std::max(hi, r.ratio_to_sqrt_kappa);
    values += fmt::format(" kappa={:g}: best={:.4f} (construction {:.4f}, ratio {:.4f});", r.kappa, r.best_value,
                          construction, r.ratio_to_sqrt_kappa);
  }
  return {lower && hi < 2.0 * lo, fmt::format("{} max/min ratio {:.4f}", values, hi / lo)};
}

Outcome gradient_fd() {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Rng rng = make_stream(1009, static_cast<std::uint64_t>(t));
    const BatchCell& cell = grid()[static_cast<size_t>(t * 31) % grid().size()];
    std::uniform_real_distribution<double> log_rho(std::log(1e-2), std::log(1e2));
    const ProblemInstance inst =
        random_instance({cell.agents, {1.0, cell.kappa, cell.dim}, std::exp(log_rho(rng))}, rng);
    std::normal_distribution<double> g;
    const int m = inst.agents() * inst.dim();
    Vector x(m);
    for (auto& v : x) v = 2.0 * g(rng);
    const Vector grad = F_rho_gradient(inst, StackedState(inst.agents(), inst.dim(), x)).values();
    Vector fd(m);
    for (int i = 0; i < m; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd[i] = (F_rho_value(inst, StackedState(inst.agents(), inst.dim(), xp)) -
               F_rho_value(inst, StackedState(inst.agents(), inst.dim(), xm))) /
              (2 * h);
    }
    worst = std::max(worst, (fd - grad).norm() / std::max(grad.norm(), 1e-12));
  }
  return {worst <= 1e-6, fmt::format("100 pairs, max relative error {:.2e}", worst)};
}

Outcome determinism() {
  namespace t = odgd::testing;
  struct Cmd {
    std::string name;
    std::string args;
    std::vector<std::string> files;
  };
  const std::vector<Cmd> cmds{
      {"simulate", "simulate --instance " + t::fixture("two_agent.json") + " --iters 300", {"trace.csv", "summary.json"}},
      {"simulate+schedule",
       "simulate --instance " + t::fixture("complete_k5.json") + " --schedule " + t::fixture("adversarial_random.json") +
           " --iters 300 --seed 4",
       {"trace.csv", "summary.json"}},
      {"verify", "verify --count 300 --seed 7", {"report.csv", "report.json"}},
      {"verify+instance",
       "verify --instance " + t::fixture("two_agent.json") + " --schedule " + t::fixture("paper_swap.json"),
       {"report.csv", "report.json"}},
      {"worstcase", "worstcase --n 2 --kappas 10,100 --seed 3 --budget 3000", {"scaling.csv"}},
      {"localize", "localize --instance " + t::fixture("complete_k10.json"), {}},
  };
  std::vector<std::string> mismatched;
  for (const Cmd& c : cmds) {
    std::vector<std::string> outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const auto dir = t::fresh_dir("acceptance_det_" + std::to_string(rep));
      const t::CliResult r = t::run_cli(c.args + (c.files.empty() ? "" : " --out " + dir.string()));
      outputs[rep].push_back(std::to_string(r.code));
      // Paths in stdout differ between the two directories.
      outputs[rep].push_back(c.files.empty() ? r.output : "");
      for (const auto& f : c.files) outputs[rep].push_back(t::read_file(dir / f));
      if (r.code != 0) outputs[rep].push_back("nonzero exit " + r.output);
      t::fs::remove_all(dir);
    }
    bool same = outputs[0] == outputs[1];
    for (const auto& s : outputs[0]) same = same && s.rfind("nonzero exit", 0) != 0;
    if (!same) mismatched.push_back(c.name);
  }
  std::string names;
  for (const auto& m : mismatched) names += " " + m;
  return {mismatched.empty(), fmt::format("{} subcommand runs compared byte-for-byte{}", cmds.size(),
                                          mismatched.empty() ? "" : "; mismatched:" + names)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"localization", localization},
      {"example minimizers", example_reproduction},
      {"sensitivity bounds", sensitivity},
      {"per-step contraction", contraction},
      {"form equivalence", form_equivalence},
      {"ball invariance", stability},
      {"gradient-step invariance", gradient_step_invariance},
      {"sqrt(kappa) scaling", scaling},
      {"gradient finite differences", gradient_fd},
      {"CLI determinism", determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    fmt::print("{} [{:2}] {}: {} ({:.1f}s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail, secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  fmt::print("{} of {} criteria pass\n", criteria.size() - static_cast<size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
