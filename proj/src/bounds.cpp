#include "open_dgd/bounds.hpp"

#include "open_dgd/random_instances.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>

namespace odgd {

CheckRecord make_check(std::string name, double observed, double bound) {
  CheckRecord r;
  r.name = std::move(name);
  r.observed = observed;
  r.bound = bound;
  r.margin = bound - observed;
  r.pass = observed <= bound + tol::kBound * (1.0 + std::abs(bound));
  return r;
}

void BoundsReport::append(const BoundsReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

bool BoundsReport::all_pass() const { return failures() == 0; }

std::size_t BoundsReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const CheckRecord& c) { return !c.pass; }));
}

std::string fingerprint_of(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return fmt::format("{:016x}", h);
}

namespace formulas {

double localization_radius(double kappa) { return 1.0 + std::sqrt(kappa); }

double BoundTriple::min() const { return std::min({without_n, sqrt_n, linear_n}); }

BoundTriple sensitivity(int n, double kappa) {
  if (n < 2) throw std::invalid_argument("sensitivity bound needs n >= 2");
  const double s = std::sqrt(kappa);
  return BoundTriple{4.0 + 4.0 * s, (4.0 * s + 2.0 * kappa) / std::sqrt(n - 1.0),
                     (4.0 * kappa + 2.0 * kappa * s) / n};
}

BoundTriple single_change(int n, double kappa) {
  if (n < 2) throw std::invalid_argument("single-change bound needs n >= 2");
  const double s = std::sqrt(kappa);
  return BoundTriple{2.0 + 2.0 * s, (2.0 * s + kappa) / std::sqrt(n - 1.0),
                     (2.0 * kappa + kappa * s) / n};
}

double two_function(double alpha1, double alpha2, double beta2, double r1, double r2) {
  return beta2 * (r1 + r2) / (alpha1 + alpha2);
}

}  // namespace formulas

BoundsReport check_localization(std::span<const QuadraticFunction> functions, double kappa) {
  BoundsReport rep;
  const Vector x = exact_minimizer_f(functions);
  rep.add(make_check("localization_f", x.norm(), formulas::localization_radius(kappa)));
  return rep;
}

BoundsReport check_localization(const ProblemInstance& inst) {
  const double kappa = inst.params().kappa();
  BoundsReport rep = check_localization(inst.functions(), kappa);
  const StackedState x = exact_minimizer_F_rho(inst);
  rep.add(make_check("localization_F_rho_blocks", x.max_block_norm(),
                     formulas::localization_radius(kappa)));
  return rep;
}

BoundsReport check_membership(const ProblemInstance& inst) {
  BoundsReport rep;
  const auto& p = inst.params();
  const auto reports = inst.membership();
  for (size_t i = 0; i < reports.size(); ++i) {
    const auto& m = reports[i];
    rep.add(make_check(fmt::format("membership_strong_convexity[{}]", i), p.alpha,
                       m.min_eigenvalue));
    rep.add(make_check(fmt::format("membership_smoothness[{}]", i), m.max_eigenvalue, p.beta));
    rep.add(make_check(fmt::format("membership_unit_ball[{}]", i), m.minimizer_norm, 1.0));
    // make_check's slack differs slightly from the membership slack; the
    // membership verdict wins.
    if (!m.strongly_convex) rep.checks[rep.checks.size() - 3].pass = false;
    if (!m.smooth) rep.checks[rep.checks.size() - 2].pass = false;
    if (!m.in_unit_ball) rep.checks[rep.checks.size() - 1].pass = false;
  }
  return rep;
}

CheckRecord check_two_function_bound(const TwoFunctionParams& p1, const TwoFunctionParams& p2,
                                     const QuadraticFunction& g1, const QuadraticFunction& g2) {
  if (g1.dimension() != g2.dimension()) throw DimensionError("g1 and g2 dimensions differ");
  const auto check = [](const TwoFunctionParams& p, const QuadraticFunction& g, const char* tag) {
    if (!(p.alpha > 0.0) || !(p.beta >= p.alpha) || !(p.radius >= 0.0)) {
      throw std::invalid_argument(fmt::format("{}: invalid constants", tag));
    }
    if (g.min_eigenvalue() < p.alpha * (1.0 - tol::kEigenRelative) ||
        g.max_eigenvalue() > p.beta * (1.0 + tol::kEigenRelative)) {
      throw std::invalid_argument(fmt::format("{}: spectrum outside [alpha, beta]", tag));
    }
    if (g.minimizer_norm() > p.radius + tol::kBound * (1.0 + p.radius)) {
      throw std::invalid_argument(fmt::format("{}: minimizer outside its ball", tag));
    }
  };
  check(p1, g1, "g1");
  check(p2, g2, "g2");
  QuadraticSum sum(g1.dimension());
  sum.add(g1).add(g2);
  const double observed = (sum.minimizer() - g1.minimizer()).norm();
  return make_check("two_function",
                    observed, formulas::two_function(p1.alpha, p2.alpha, p2.beta, p1.radius, p2.radius));
}

BoundsReport check_sensitivity(std::span<const QuadraticFunction> common,
                               const QuadraticFunction& fa, const QuadraticFunction& fb,
                               const FunctionClassParams& params) {
  if (common.empty()) throw std::invalid_argument("sensitivity needs at least one common function");
  const int n = static_cast<int>(common.size()) + 1;
  const double kappa = params.kappa();
  QuadraticSum rest(fa.dimension());
  for (const auto& f : common) rest.add(f);
  const Vector x_minus = rest.minimizer();
  const Vector xa = rest.plus(fa).minimizer();
  const Vector xb = rest.plus(fb).minimizer();

  BoundsReport rep;
  const double dab = (xa - xb).norm();
  const double da = (xa - x_minus).norm();
  const double db = (xb - x_minus).norm();
  rep.add(make_check("sensitivity", dab, formulas::sensitivity(n, kappa).min()));
  const double single = formulas::single_change(n, kappa).min();
  rep.add(make_check("single_change_a", da, single));
  rep.add(make_check("single_change_b", db, single));
  rep.add(make_check("triangle", dab, da + db));

  const QuadraticFunction f_minus(rest.hessian(), x_minus);
  const TwoFunctionParams p_minus{(n - 1) * params.alpha, (n - 1) * params.beta,
                                  formulas::localization_radius(kappa)};
  const TwoFunctionParams p_new{params.alpha, params.beta, 1.0};
  CheckRecord ra = check_two_function_bound(p_minus, p_new, f_minus, fa);
  ra.name = "two_function_a";
  rep.add(ra);
  CheckRecord rb = check_two_function_bound(p_minus, p_new, f_minus, fb);
  rb.name = "two_function_b";
  rep.add(rb);
  return rep;
}

CheckRecord check_stability_envelope(const OpenTrace& trace, const StabilityEnvelope& envelope) {
  CheckRecord r = make_check("stability_envelope", trace.max_norm_after_entry, envelope.R);
  r.pass = trace.violations == 0 &&
           trace.max_norm_after_entry <= envelope.R + kBallSlack;
  return r;
}

std::vector<BatchCell> default_grid() {
  std::vector<BatchCell> cells;
  for (int n = 2; n <= 10; ++n) {
    for (const int d : {1, 2, 5}) {
      for (const double kappa : {1.0, 10.0, 100.0, 1000.0}) cells.push_back(BatchCell{n, d, kappa});
    }
  }
  return cells;
}

BoundsReport verify_random_instance(const BatchCell& cell, std::uint64_t seed,
                                    std::uint64_t index, bool localization, bool sensitivity) {
  Rng rng = make_stream(seed, index);
  FunctionClassParams params{1.0, cell.kappa, cell.dim};
  std::bernoulli_distribution coin(0.5);
  RandomQuadraticOptions opt;
  opt.pin_extremes = coin(rng);
  opt.minimizer_on_sphere = coin(rng);

  std::vector<QuadraticFunction> fs;
  fs.reserve(static_cast<size_t>(cell.agents) + 1);
  for (int i = 0; i <= cell.agents; ++i) fs.push_back(random_quadratic(params, rng, opt));
  const QuadraticFunction fb = fs.back();
  fs.pop_back();

  BoundsReport rep;
  if (localization) {
    std::uniform_real_distribution<double> log_rho(std::log(1e-2), std::log(1e3));
    const double rho = std::exp(log_rho(rng));
    ProblemInstance inst(fs, Network(random_adjacency(cell.agents, rng)), rho, std::nullopt,
                         params);
    rep.append(check_localization(inst));
  }
  if (sensitivity) {
    const std::span<const QuadraticFunction> all(fs);
    rep.append(check_sensitivity(all.first(all.size() - 1), all.back(), fb, params));
  }
  return rep;
}

namespace {

struct Job {
  size_t cell;
  std::uint64_t index;
};

std::vector<Job> jobs_for(const BatchConfig& config) {
  if (config.instances_per_cell < 1) throw std::invalid_argument("instances_per_cell must be >= 1");
  std::vector<Job> jobs;
  jobs.reserve(config.cells.size() * static_cast<size_t>(config.instances_per_cell));
  std::uint64_t index = 0;
  for (size_t c = 0; c < config.cells.size(); ++c) {
    for (int i = 0; i < config.instances_per_cell; ++i) jobs.push_back(Job{c, index++});
  }
  return jobs;
}

BatchResult reduce(const BatchConfig& config, const std::vector<Job>& jobs,
                   const std::vector<BoundsReport>& reports) {
  BatchResult out;
  out.cells.resize(config.cells.size());
  std::vector<std::map<std::string, size_t>> slot(config.cells.size());
  for (size_t c = 0; c < config.cells.size(); ++c) out.cells[c].cell = config.cells[c];
  for (size_t j = 0; j < jobs.size(); ++j) {
    CellSummary& cs = out.cells[jobs[j].cell];
    auto& names = slot[jobs[j].cell];
    for (const CheckRecord& rec : reports[j].checks) {
      ++cs.checks;
      if (!rec.pass) ++cs.failures;
      const auto it = names.find(rec.name);
      if (it == names.end()) {
        names.emplace(rec.name, cs.worst.size());
        cs.worst.push_back(rec);
      } else {
        CheckRecord& worst = cs.worst[it->second];
        const bool fail_first = !rec.pass && worst.pass;
        if (fail_first || (rec.pass == worst.pass && rec.margin < worst.margin)) worst = rec;
      }
    }
  }
  for (const auto& cs : out.cells) {
    out.checks += cs.checks;
    out.failures += cs.failures;
  }
  return out;
}

}  // namespace

BatchResult verify_batch(const BatchConfig& config) {
  const std::vector<Job> jobs = jobs_for(config);
  std::vector<BoundsReport> reports(jobs.size());
  std::exception_ptr failure;
  const auto count = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t j = 0; j < count; ++j) {
    try {
      const Job& job = jobs[static_cast<size_t>(j)];
      reports[static_cast<size_t>(j)] =
          verify_random_instance(config.cells[job.cell], config.seed, job.index,
                                 config.localization, config.sensitivity);
    } catch (...) {
#pragma omp critical
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return reduce(config, jobs, reports);
}

BatchResult verify_batch_serial(const BatchConfig& config) {
  const std::vector<Job> jobs = jobs_for(config);
  std::vector<BoundsReport> reports;
  reports.reserve(jobs.size());
  for (const Job& job : jobs) {
    reports.push_back(verify_random_instance(config.cells[job.cell], config.seed, job.index,
                                             config.localization, config.sensitivity));
  }
  return reduce(config, jobs, reports);
}

BoundsReport BatchResult::as_report() const {
  BoundsReport rep;
  for (const auto& cs : cells) {
    for (const auto& w : cs.worst) {
      CheckRecord r = w;
      r.name = fmt::format("{}[n={},d={},kappa={}]", w.name, cs.cell.agents, cs.cell.dim,
                           cs.cell.kappa);
      rep.add(std::move(r));
    }
  }
  return rep;
}

}  // namespace odgd
