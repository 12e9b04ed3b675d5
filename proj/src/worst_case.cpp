#include "open_dgd/worst_case.hpp"

#include "open_dgd/bounds.hpp"
#include "open_dgd/penalized_objective.hpp"
#include "open_dgd/random_instances.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>

namespace odgd {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap(double value, double lo, double period) {
  double v = std::fmod(value - lo, period);
  if (v <= 0.0) v += period;
  return lo + v;  // in (lo, lo + period]
}

// Canonical coordinates: angle in (-pi/2, pi/2], radius in [0, 1],
// polar angle in (-pi, pi].
Vector normalize(const SearchSpace& space, Vector point) {
  for (int j = 0; j <= space.agents; ++j) {
    point[3 * j] = wrap(point[3 * j], -kPi / 2, kPi);
    point[3 * j + 1] = std::clamp(point[3 * j + 1], 0.0, 1.0);
    point[3 * j + 2] = wrap(point[3 * j + 2], -kPi, 2 * kPi);
  }
  return point;
}

QuadraticFunction expand(const SearchSpace& space, const Vector& p, int j) {
  const double r = std::clamp(p[3 * j + 1], 0.0, 1.0);
  const double theta = p[3 * j + 2];
  Vector c(2);
  c << r * std::cos(theta), r * std::sin(theta);
  return QuadraticFunction::from_spectrum(rotation2d(p[3 * j]), Eigen::Vector2d(space.kappa, 1.0),
                                          std::move(c));
}

}  // namespace

void SearchSpace::validate() const {
  if (agents < 2) throw std::invalid_argument("worst-case search needs n >= 2");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be >= 1");
  if (dim != 2) throw std::invalid_argument("worst-case search supports d = 2 only");
}

DecodedPoint decode(const SearchSpace& space, const Vector& point) {
  space.validate();
  if (point.size() != space.coordinates()) {
    throw DimensionError("search point has " + std::to_string(point.size()) +
                         " coordinates, expected " + std::to_string(space.coordinates()));
  }
  if (!point.allFinite()) throw std::invalid_argument("search point is not finite");
  DecodedPoint out;
  out.common.reserve(static_cast<size_t>(space.agents) - 1);
  for (int j = 0; j + 1 < space.agents; ++j) out.common.push_back(expand(space, point, j));
  out.swap.push_back(expand(space, point, space.agents - 1));
  out.swap.push_back(expand(space, point, space.agents));
  return out;
}

double objective(const SearchSpace& space, const Vector& point) {
  const DecodedPoint dp = decode(space, point);
  QuadraticSum rest(2);
  for (const auto& f : dp.common) rest.add(f);
  return (rest.plus(dp.swap[0]).minimizer() - rest.plus(dp.swap[1]).minimizer()).norm();
}

Vector construction_start(const SearchSpace& space) {
  space.validate();
  const double phi = std::atan(1.0 / std::sqrt(space.kappa));
  Vector p(space.coordinates());
  for (int j = 0; j + 1 < space.agents; ++j) p.segment(3 * j, 3) << -phi, 1.0, kPi;
  p.segment(3 * (space.agents - 1), 3) << phi, 1.0, 0.0;
  p.segment(3 * space.agents, 3) << -phi, 1.0, 0.0;
  return p;
}

Vector random_start(const SearchSpace& space, std::uint64_t seed, std::uint64_t restart) {
  space.validate();
  Rng rng = make_stream(seed, restart);
  std::uniform_real_distribution<double> angle(-kPi / 2, kPi / 2);
  std::uniform_real_distribution<double> polar(-kPi, kPi);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::bernoulli_distribution on_sphere(0.5);
  Vector p(space.coordinates());
  for (int j = 0; j <= space.agents; ++j) {
    p[3 * j] = angle(rng);
    p[3 * j + 1] = on_sphere(rng) ? 1.0 : std::sqrt(unif(rng));
    p[3 * j + 2] = polar(rng);
  }
  return normalize(space, p);
}

LocalResult pattern_search(const SearchSpace& space, Vector start, int budget, double initial_step,
                           double min_step) {
  if (budget < 1) throw std::invalid_argument("budget must be positive");
  LocalResult res;
  res.point = normalize(space, std::move(start));
  res.value = objective(space, res.point);
  res.start_value = res.value;
  res.evaluations = 1;
  double step = initial_step;
  const int dims = space.coordinates();
  while (step >= min_step && res.evaluations < budget) {
    bool improved = false;
    for (int i = 0; i < dims && res.evaluations < budget; ++i) {
      for (const double dir : {1.0, -1.0}) {
        if (res.evaluations >= budget) break;
        Vector trial = res.point;
        trial[i] += dir * step;
        trial = normalize(space, trial);
        const double v = objective(space, trial);
        ++res.evaluations;
        if (v > res.value) {
          res.value = v;
          res.point = std::move(trial);
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return res;
}

namespace {

LocalResult run_restart(const SearchSpace& space, const SearchParams& params, int r) {
  Vector start = r == 0 ? construction_start(space)
                        : random_start(space, params.seed, static_cast<std::uint64_t>(r));
  return pattern_search(space, std::move(start), params.budget, params.initial_step,
                        params.min_step);
}

SearchResult reduce(const std::vector<LocalResult>& locals) {
  SearchResult out;
  double best = -1.0;
  for (size_t r = 0; r < locals.size(); ++r) {
    const LocalResult& l = locals[r];
    out.start_values.push_back(l.start_value);
    out.evaluations += l.evaluations;
    if (l.value > best) {
      best = l.value;
      out.best_point = l.point;
      out.best_value = l.value;
      out.best_restart = static_cast<int>(r);
    }
    out.history.push_back(out.best_value);
  }
  return out;
}

void check(const SearchSpace& space, const SearchParams& params) {
  space.validate();
  if (params.restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (params.budget < 1) throw std::invalid_argument("budget must be positive");
}

}  // namespace

SearchResult search(const SearchSpace& space, const SearchParams& params) {
  check(space, params);
  std::vector<LocalResult> locals(static_cast<size_t>(params.restarts));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < params.restarts; ++r) {
    try {
      locals[static_cast<size_t>(r)] = run_restart(space, params, r);
    } catch (...) {
#pragma omp critical
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return reduce(locals);
}

SearchResult search_serial(const SearchSpace& space, const SearchParams& params) {
  check(space, params);
  std::vector<LocalResult> locals;
  for (int r = 0; r < params.restarts; ++r) locals.push_back(run_restart(space, params, r));
  return reduce(locals);
}

std::vector<ScalingRow> scaling_report(int agents, const std::vector<double>& kappas,
                                       const SearchParams& params) {
  if (kappas.empty()) throw std::invalid_argument("kappa grid is empty");
  std::vector<ScalingRow> rows;
  for (const double kappa : kappas) {
    const SearchSpace space{agents, kappa, 2};
    const SearchResult res = search(space, params);
    ScalingRow row;
    row.kappa = kappa;
    row.sqrt_kappa = std::sqrt(kappa);
    row.agents = agents;
    row.best_value = res.best_value;
    row.ratio_to_sqrt_kappa = res.best_value / row.sqrt_kappa;
    row.sensitivity_bound = formulas::sensitivity(agents, kappa).min();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace odgd
