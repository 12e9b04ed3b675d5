#pragma once

// DGD with time-varying local objectives f_i^k.  Agents never leave the
// stacked state; arrivals, departures and adversarial changes are all
// replacements of f_i by another member of F(alpha, beta).

#include "open_dgd/dgd.hpp"
#include "open_dgd/random_instances.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace odgd {

enum class ScheduleMode { Scripted, AdversarialRandom, AdversarialWorstEffort };

const char* to_string(ScheduleMode mode);

struct ScheduledEvent {
  int k = 0;
  int agent = 0;
  QuadraticFunction function;
};

/// Iteration-indexed function replacements.  An event at iteration k sets
/// f_i^k (the function used in the step from x^k to x^{k+1}) and persists
/// until the agent's next event.  Adversarial modes generate their events on
/// the fly from a seeded stream: every `period` iterations all n functions are
/// replaced.
class EventSchedule {
 public:
  EventSchedule() = default;

  static EventSchedule scripted(std::vector<ScheduledEvent> events);
  static EventSchedule adversarial_random(int period, std::uint64_t seed);
  // Greedy adversary: each agent picks, among `candidates` random members and
  // a few structured ones, the function that maximizes its next block norm.
  static EventSchedule adversarial_worst_effort(int period, std::uint64_t seed,
                                                int candidates = 8);

  ScheduleMode mode() const { return mode_; }
  const std::vector<ScheduledEvent>& events() const { return events_; }
  int period() const { return period_; }
  std::uint64_t seed() const { return seed_; }
  int candidates() const { return candidates_; }
  bool empty() const { return mode_ == ScheduleMode::Scripted && events_.empty(); }

  // Throws std::invalid_argument if a scripted function is not a member of
  // the class or targets an agent outside [0, agents).
  void validate(const FunctionClassParams& params, int agents) const;

 private:
  ScheduleMode mode_ = ScheduleMode::Scripted;
  std::vector<ScheduledEvent> events_;
  int period_ = 1;
  std::uint64_t seed_ = 0;
  int candidates_ = 8;
};

struct StabilityEnvelope {
  double kappa = 1.0;
  double kappa_rho = 1.0;
  double b = 0.0;  // sqrt(n) (1 + sqrt(kappa)), bound on ||argmin F_rho^k||
  double R = 0.0;
  bool small_kappa_branch = false;  // kappa_rho < 3
};

StabilityEnvelope stability_radius(double alpha, double beta, double rho, double lambda_n, int n);
StabilityEnvelope stability_radius(const ProblemInstance& inst);

// Radius of the ball kept invariant by one gradient step on a function with
// condition number kappa_bar whose minimizer has norm <= b.
double gradient_step_radius(double kappa_bar, double b);
Vector gradient_step(const QuadraticFunction& g, const Vector& x, double eta);

struct OpenTraceRecord {
  TraceRecord base;  // dist_to_min is to the current F_rho^k minimizer
  int event_count = 0;
  double inst_min_norm = 0.0;  // ||argmin sum_i f_i^k||; NaN when untracked
  bool inside_ball = false;    // ||x^k|| <= R + kBallSlack
};

struct OpenTrace {
  std::vector<OpenTraceRecord> records;
  StabilityEnvelope envelope;
  int entry_k = -1;  // first k with ||x^k|| <= R + kBallSlack, -1 if never
  int violations = 0;  // k > entry_k with ||x^k|| > R + kBallSlack
  double max_norm_after_entry = 0.0;
  double max_norm = 0.0;
  int total_events = 0;
  StackedState final_state;
  std::vector<std::string> warnings;
};

inline constexpr double kBallSlack = 1e-9;

struct OpenOptions {
  bool record_trace = true;
  // Exact solves of the instantaneous minimizers whenever functions change.
  bool track_minimizer = true;
};

OpenTrace simulate_open(const ProblemInstance& inst, const StackedState& x0,
                        const EventSchedule& schedule, int iterations,
                        const OpenOptions& options = {});

struct ProbeOptions {
  int iterations = 1000;
  int restarts = 8;
  std::uint64_t seed = 0;
  int period = 1;
  // Restarts alternate random / worst-effort adversaries unless fixed here.
  std::optional<ScheduleMode> mode;
};

struct ProbeResult {
  double worst_norm_after_entry = 0.0;
  double R = 0.0;
  double ratio = 0.0;  // worst_norm_after_entry / R
  int violations = 0;
  int entered = 0;  // restarts that reached the ball
  int restarts = 0;
};

// Restarts run concurrently (OpenMP); the max-reduction is taken in restart
// order so the result is independent of scheduling.
ProbeResult adversarial_probe(const ProblemInstance& inst, const StackedState& x0,
                              const ProbeOptions& options);
ProbeResult adversarial_probe_serial(const ProblemInstance& inst, const StackedState& x0,
                                     const ProbeOptions& options);

}  // namespace odgd
