#include "open_dgd/open_system.hpp"

#include "open_dgd/kernels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace odgd {

const char* to_string(ScheduleMode mode) {
  switch (mode) {
    case ScheduleMode::Scripted:
      return "scripted";
    case ScheduleMode::AdversarialRandom:
      return "adversarial_random";
    case ScheduleMode::AdversarialWorstEffort:
      return "adversarial_worst_effort";
  }
  return "unknown";
}

EventSchedule EventSchedule::scripted(std::vector<ScheduledEvent> events) {
  EventSchedule s;
  s.mode_ = ScheduleMode::Scripted;
  std::stable_sort(events.begin(), events.end(),
                   [](const ScheduledEvent& a, const ScheduledEvent& b) { return a.k < b.k; });
  for (const auto& e : events) {
    if (e.k < 0) throw std::invalid_argument("event iteration must be >= 0");
  }
  s.events_ = std::move(events);
  return s;
}

EventSchedule EventSchedule::adversarial_random(int period, std::uint64_t seed) {
  if (period < 1) throw std::invalid_argument("period must be >= 1");
  EventSchedule s;
  s.mode_ = ScheduleMode::AdversarialRandom;
  s.period_ = period;
  s.seed_ = seed;
  return s;
}

EventSchedule EventSchedule::adversarial_worst_effort(int period, std::uint64_t seed,
                                                      int candidates) {
  if (period < 1) throw std::invalid_argument("period must be >= 1");
  if (candidates < 1) throw std::invalid_argument("candidates must be >= 1");
  EventSchedule s;
  s.mode_ = ScheduleMode::AdversarialWorstEffort;
  s.period_ = period;
  s.seed_ = seed;
  s.candidates_ = candidates;
  return s;
}

void EventSchedule::validate(const FunctionClassParams& params, int agents) const {
  for (size_t idx = 0; idx < events_.size(); ++idx) {
    const auto& e = events_[idx];
    if (e.agent < 0 || e.agent >= agents) {
      throw std::invalid_argument(fmt::format("event {}: agent {} out of range", idx, e.agent));
    }
    const MembershipReport rep = validate_membership(e.function, params);
    if (!rep.ok()) {
      throw std::invalid_argument(fmt::format(
          "event {} (k = {}, agent {}): replacement function is not in the class "
          "(eigenvalues [{}, {}], minimizer norm {})",
          idx, e.k, e.agent, rep.min_eigenvalue, rep.max_eigenvalue, rep.minimizer_norm));
    }
  }
}

StabilityEnvelope stability_radius(double alpha, double beta, double rho, double lambda_n, int n) {
  if (!(alpha > 0.0) || !(beta >= alpha) || !(rho >= 0.0) || !(lambda_n >= 0.0) || n < 1) {
    throw std::invalid_argument("stability_radius: invalid parameters");
  }
  StabilityEnvelope env;
  env.kappa = beta / alpha;
  env.kappa_rho = (beta + rho * lambda_n) / alpha;
  env.b = std::sqrt(static_cast<double>(n)) * (1.0 + std::sqrt(env.kappa));
  env.small_kappa_branch = env.kappa_rho < 3.0;
  env.R = gradient_step_radius(env.kappa_rho, env.b);
  return env;
}

StabilityEnvelope stability_radius(const ProblemInstance& inst) {
  return stability_radius(inst.params().alpha, inst.params().beta, inst.rho(),
                          inst.network().lambda_max(), inst.agents());
}

double gradient_step_radius(double kappa_bar, double b) {
  if (kappa_bar < 3.0) return (1.0 + std::sqrt(6.0)) * b;
  return (1.0 + std::sqrt(2.0 * kappa_bar)) * b;
}

Vector gradient_step(const QuadraticFunction& g, const Vector& x, double eta) {
  return x - eta * g.gradient(x);
}

namespace {

// Structured candidates for the greedy adversary: minimizer at the unit-sphere
// point nearest x_i (or opposite), Hessian with the weak axis along the
// residual or rotated 45 degrees from it to produce a sideways push.
std::vector<QuadraticFunction> structured_candidates(const FunctionClassParams& p,
                                                     const Vector& xi, Rng& rng) {
  std::vector<QuadraticFunction> out;
  const int d = p.dim;
  Vector dir = xi.norm() > 1e-12 ? Vector(xi / xi.norm()) : random_on_sphere(d, rng);
  for (const double side : {1.0, -1.0}) {
    const Vector c = side * dir;
    Vector r = xi - c;
    if (r.norm() < 1e-12) r = random_on_sphere(d, rng);
    r.normalize();
    if (d == 1) {
      out.push_back(QuadraticFunction::isotropic(1, p.alpha, c));
      out.push_back(QuadraticFunction::isotropic(1, p.beta, c));
      continue;
    }
    // Orthonormal basis whose first column is r.
    Matrix basis = random_rotation(d, rng);
    basis.col(0) = r;
    Eigen::HouseholderQR<Matrix> qr(basis);
    Matrix q = qr.householderQ();
    if (q.col(0).dot(r) < 0.0) q.col(0) *= -1.0;
    Vector lambda = Vector::Constant(d, p.beta);
    lambda[0] = p.alpha;
    out.push_back(QuadraticFunction::from_spectrum(q, lambda, c));
    for (const double tilt : {std::numbers::pi / 4, -std::numbers::pi / 4}) {
      Matrix tilted = q;
      tilted.col(0) = std::cos(tilt) * q.col(0) + std::sin(tilt) * q.col(1);
      tilted.col(1) = -std::sin(tilt) * q.col(0) + std::cos(tilt) * q.col(1);
      out.push_back(QuadraticFunction::from_spectrum(tilted, lambda, c));
    }
  }
  return out;
}

RandomQuadraticOptions random_adversary_options(Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  RandomQuadraticOptions opt;
  opt.pin_extremes = coin(rng);
  opt.minimizer_on_sphere = coin(rng);
  return opt;
}

struct MinimizerCache {
  Vector f_min;
  Vector F_rho_min;
  bool valid = false;
};

}  // namespace

OpenTrace simulate_open(const ProblemInstance& inst, const StackedState& x0,
                        const EventSchedule& schedule, int iterations,
                        const OpenOptions& options) {
  if (x0.agents() != inst.agents() || x0.dim() != inst.dim()) {
    throw DimensionError("initial state shape does not match the instance");
  }
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  const int n = inst.agents();
  const int d = inst.dim();
  const FunctionClassParams& params = inst.params();
  schedule.validate(params, n);

  OpenTrace trace;
  trace.envelope = stability_radius(inst);
  if (!inst.eta_within_limit()) {
    trace.warnings.push_back(fmt::format(
        "eta = {} exceeds 1/(beta + rho lambda_n) = {}; the stability radius does not apply",
        inst.eta(), inst.default_eta()));
  }
  const double R = trace.envelope.R;
  const Network& net = inst.network();

  std::vector<QuadraticFunction> fs = inst.functions();
  Rng rng = make_stream(schedule.seed(), 0x5eedu);
  size_t next_event = 0;
  MinimizerCache cache;

  Vector x = x0.values();
  Vector next(x.size());
  if (options.record_trace) trace.records.reserve(static_cast<size_t>(iterations) + 1);

  for (int k = 0;; ++k) {
    int events = 0;
    switch (schedule.mode()) {
      case ScheduleMode::Scripted: {
        const auto& evs = schedule.events();
        while (next_event < evs.size() && evs[next_event].k == k) {
          fs[static_cast<size_t>(evs[next_event].agent)] = evs[next_event].function;
          ++next_event;
          ++events;
        }
        break;
      }
      case ScheduleMode::AdversarialRandom:
        if (k % schedule.period() == 0) {
          for (int i = 0; i < n; ++i) {
            const RandomQuadraticOptions opt = random_adversary_options(rng);
            fs[static_cast<size_t>(i)] = random_quadratic(params, rng, opt);
          }
          events = n;
        }
        break;
      case ScheduleMode::AdversarialWorstEffort:
        if (k % schedule.period() == 0) {
          // Coupling term evaluated at the current state; each agent then
          // picks its function greedily.
          Vector coupling(x.size());
          kernels::laplacian_apply_serial(net, x, d, coupling);
          for (int i = 0; i < n; ++i) {
            const Vector xi = x.segment(i * d, d);
            const Vector base = xi - inst.eta() * inst.rho() * coupling.segment(i * d, d);
            std::vector<QuadraticFunction> cands = structured_candidates(params, xi, rng);
            for (int c = 0; c < schedule.candidates(); ++c) {
              RandomQuadraticOptions opt;
              opt.pin_extremes = true;
              opt.minimizer_on_sphere = true;
              cands.push_back(random_quadratic(params, rng, opt));
            }
            size_t best = 0;
            double best_norm = -1.0;
            for (size_t c = 0; c < cands.size(); ++c) {
              const double norm = (base - inst.eta() * cands[c].gradient(xi)).norm();
              if (norm > best_norm) {
                best_norm = norm;
                best = c;
              }
            }
            fs[static_cast<size_t>(i)] = std::move(cands[best]);
          }
          events = n;
        }
        break;
    }
    trace.total_events += events;
    if (events > 0) cache.valid = false;

    const double norm = x.norm();
    trace.max_norm = std::max(trace.max_norm, norm);
    const bool inside = norm <= R + kBallSlack;
    if (trace.entry_k < 0 && inside) trace.entry_k = k;
    if (trace.entry_k >= 0) {
      trace.max_norm_after_entry = std::max(trace.max_norm_after_entry, norm);
      if (!inside) ++trace.violations;
    }

    if (options.record_trace) {
      if (options.track_minimizer && !cache.valid) {
        cache.f_min = exact_minimizer_f(fs);
        cache.F_rho_min = exact_minimizer_F_rho(inst.with_functions(fs)).values();
        cache.valid = true;
      }
      OpenTraceRecord rec;
      rec.base = record_state(fs, net, inst.rho(), k, x, d,
                              options.track_minimizer ? &cache.F_rho_min : nullptr);
      rec.event_count = events;
      rec.inst_min_norm = options.track_minimizer ? cache.f_min.norm()
                                                  : std::numeric_limits<double>::quiet_NaN();
      rec.inside_ball = inside;
      trace.records.push_back(rec);
    }

    if (k == iterations) break;
    kernels::dgd_step_parallel(fs, net, inst.rho(), inst.eta(), x, d, next);
    x.swap(next);
  }
  trace.final_state = StackedState(n, d, x);
  return trace;
}

namespace {

ProbeResult probe_one(const ProblemInstance& inst, const StackedState& x0,
                      const ProbeOptions& options, int restart) {
  const std::uint64_t stream_seed = make_stream(options.seed, static_cast<std::uint64_t>(restart))();
  ScheduleMode mode = options.mode.value_or(restart % 2 == 0 ? ScheduleMode::AdversarialRandom
                                                             : ScheduleMode::AdversarialWorstEffort);
  const EventSchedule schedule =
      mode == ScheduleMode::AdversarialWorstEffort
          ? EventSchedule::adversarial_worst_effort(options.period, stream_seed)
          : EventSchedule::adversarial_random(options.period, stream_seed);
  OpenOptions opt;
  opt.record_trace = false;
  opt.track_minimizer = false;
  const OpenTrace t = simulate_open(inst, x0, schedule, options.iterations, opt);
  ProbeResult r;
  r.R = t.envelope.R;
  r.restarts = 1;
  r.violations = t.violations;
  r.entered = t.entry_k >= 0 ? 1 : 0;
  r.worst_norm_after_entry = t.max_norm_after_entry;
  return r;
}

ProbeResult merge(const std::vector<ProbeResult>& parts, double R) {
  ProbeResult out;
  out.R = R;
  for (const auto& p : parts) {
    out.worst_norm_after_entry = std::max(out.worst_norm_after_entry, p.worst_norm_after_entry);
    out.violations += p.violations;
    out.entered += p.entered;
    out.restarts += p.restarts;
  }
  out.ratio = out.worst_norm_after_entry / R;
  return out;
}

void check_probe(const ProbeOptions& options) {
  if (options.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (options.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
}

}  // namespace

ProbeResult adversarial_probe(const ProblemInstance& inst, const StackedState& x0,
                              const ProbeOptions& options) {
  check_probe(options);
  std::vector<ProbeResult> parts(static_cast<size_t>(options.restarts));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < options.restarts; ++r) {
    try {
      parts[static_cast<size_t>(r)] = probe_one(inst, x0, options, r);
    } catch (...) {
#pragma omp critical
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return merge(parts, stability_radius(inst).R);
}

ProbeResult adversarial_probe_serial(const ProblemInstance& inst, const StackedState& x0,
                                     const ProbeOptions& options) {
  check_probe(options);
  std::vector<ProbeResult> parts;
  for (int r = 0; r < options.restarts; ++r) parts.push_back(probe_one(inst, x0, options, r));
  return merge(parts, stability_radius(inst).R);
}

}  // namespace odgd
