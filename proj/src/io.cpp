#include "open_dgd/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace odgd::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(where, "missing field \"" + key + "\"");
  return *it;
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

Vector vector_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = number(j[i], fmt::format("{}[{}]", where, i));
  }
  return v;
}

Matrix matrix_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
  const size_t rows = j.size();
  const Vector first = vector_from(j[0], where + "[0]");
  Matrix m(static_cast<Eigen::Index>(rows), first.size());
  for (size_t r = 0; r < rows; ++r) {
    const Vector row = vector_from(j[r], fmt::format("{}[{}]", where, r));
    if (row.size() != first.size()) fail(fmt::format("{}[{}]", where, r), "ragged matrix row");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <typename F>
auto rethrow_as_parse(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

QuadraticFunction function_from_json(const Json& j, const std::string& where) {
  const Json& type = field(j, "type", where);
  if (!type.is_string()) fail(where + ".type", "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "quadratic") {
    Matrix h = matrix_from(field(j, "hessian", where), where + ".hessian");
    Vector c = vector_from(field(j, "minimizer", where), where + ".minimizer");
    return rethrow_as_parse(where, [&] { return QuadraticFunction(std::move(h), std::move(c)); });
  }
  if (t == "rotated2d") {
    RotatedQuadratic2D r;
    r.phi = number(field(j, "phi", where), where + ".phi");
    r.sign = integer(field(j, "sign", where), where + ".sign");
    const Vector c = vector_from(field(j, "minimizer", where), where + ".minimizer");
    if (c.size() != 2) fail(where + ".minimizer", "rotated2d minimizer must have 2 entries");
    r.minimizer = c;
    r.alpha = number(field(j, "alpha", where), where + ".alpha");
    r.beta = number(field(j, "beta", where), where + ".beta");
    return rethrow_as_parse(where, [&] { return r.expand(); });
  }
  fail(where + ".type", "unknown function type \"" + t + "\"");
}

Json function_to_json(const QuadraticFunction& f) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < f.hessian().rows(); ++r) {
    rows.push_back(vector_json(f.hessian().row(r).transpose()));
  }
  return Json{{"type", "quadratic"}, {"hessian", rows}, {"minimizer", vector_json(f.minimizer())}};
}

Json function_to_json(const RotatedQuadratic2D& f) {
  return Json{{"type", "rotated2d"},
              {"phi", f.phi},
              {"sign", f.sign},
              {"minimizer", vector_json(Vector(f.minimizer))},
              {"alpha", f.alpha},
              {"beta", f.beta}};
}

Network network_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  if (j.contains("adjacency")) {
    Matrix a = matrix_from(j.at("adjacency"), where + ".adjacency");
    return rethrow_as_parse(where, [&] { return Network(std::move(a)); });
  }
  const std::string gw = where + ".generator";
  const Json& g = field(j, "generator", where);
  const Json& kind_j = field(g, "kind", gw);
  if (!kind_j.is_string()) fail(gw + ".kind", "expected a string");
  const std::string kind = kind_j.get<std::string>();
  const int n = integer(field(g, "n", gw), gw + ".n");
  const double edge = g.contains("edge_weight") ? number(g.at("edge_weight"), gw + ".edge_weight") : 1.0;
  const double self = g.contains("self_weight") ? number(g.at("self_weight"), gw + ".self_weight") : 1.0;
  return rethrow_as_parse(gw, [&] {
    if (kind == "complete") return Network(generators::complete(n, edge, self));
    if (kind == "path") return Network(generators::path(n, edge, self));
    if (kind == "cycle") return Network(generators::cycle(n, edge, self));
    if (kind == "erdos_renyi") {
      const double p = number(field(g, "p", gw), gw + ".p");
      const auto seed = g.contains("seed") ? g.at("seed").get<std::uint64_t>() : 0u;
      return Network(generators::erdos_renyi(n, p, seed, edge, self));
    }
    fail(gw + ".kind", "unknown generator \"" + kind + "\"");
  });
}

InstanceFile instance_from_json(const Json& j) {
  const std::string where = "instance";
  const Json& fj = field(j, "functions", where);
  if (!fj.is_array() || fj.empty()) fail("functions", "expected a non-empty array");
  std::vector<QuadraticFunction> fs;
  for (size_t i = 0; i < fj.size(); ++i) {
    fs.push_back(function_from_json(fj[i], fmt::format("functions[{}]", i)));
  }
  Network net = network_from_json(field(j, "network", where), "network");
  const double rho = number(field(j, "rho", where), "rho");
  std::optional<double> eta;
  if (j.contains("eta") && !j.at("eta").is_null()) eta = number(j.at("eta"), "eta");
  std::optional<FunctionClassParams> params;
  if (j.contains("alpha") || j.contains("beta")) {
    FunctionClassParams p;
    p.alpha = number(field(j, "alpha", where), "alpha");
    p.beta = number(field(j, "beta", where), "beta");
    p.dim = fs.front().dimension();
    params = p;
  }
  InstanceFile out{rethrow_as_parse(where, [&] {
                     return ProblemInstance(std::move(fs), std::move(net), rho, eta, params);
                   }),
                   std::nullopt, std::nullopt, fingerprint_of(j.dump())};
  const ProblemInstance& inst = out.instance;
  if (j.contains("swap")) {
    const Json& s = j.at("swap");
    const int agent = integer(field(s, "agent", "swap"), "swap.agent");
    if (agent < 0 || agent >= inst.agents()) fail("swap.agent", "agent index out of range");
    QuadraticFunction f = function_from_json(field(s, "function", "swap"), "swap.function");
    if (f.dimension() != inst.dim()) fail("swap.function", "dimension mismatch");
    out.swap = SwapSpec{agent, std::move(f)};
  }
  if (j.contains("x0")) {
    const Json& xj = j.at("x0");
    if (!xj.is_array() || static_cast<int>(xj.size()) != inst.agents()) {
      fail("x0", "expected one block per agent");
    }
    StackedState x(inst.agents(), inst.dim());
    for (int i = 0; i < inst.agents(); ++i) {
      const std::string w = fmt::format("x0[{}]", i);
      const Vector b = vector_from(xj[static_cast<size_t>(i)], w);
      if (b.size() != inst.dim()) fail(w, "block dimension mismatch");
      x.block(i) = b;
    }
    out.x0 = std::move(x);
  }
  return out;
}

InstanceFile load_instance(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  try {
    return instance_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

EventSchedule schedule_from_json(const Json& j) {
  const std::string where = "schedule";
  const Json& mode_j = field(j, "mode", where);
  if (!mode_j.is_string()) fail("mode", "expected a string");
  const std::string mode = mode_j.get<std::string>();
  if (mode == "scripted") {
    const Json& ev = field(j, "events", where);
    if (!ev.is_array()) fail("events", "expected an array");
    std::vector<ScheduledEvent> events;
    for (size_t i = 0; i < ev.size(); ++i) {
      const std::string w = fmt::format("events[{}]", i);
      const int k = integer(field(ev[i], "k", w), w + ".k");
      const int agent = integer(field(ev[i], "agent", w), w + ".agent");
      events.push_back(ScheduledEvent{k, agent, function_from_json(field(ev[i], "function", w),
                                                                   w + ".function")});
    }
    return rethrow_as_parse(where, [&] { return EventSchedule::scripted(std::move(events)); });
  }
  const int period = j.contains("period") ? integer(j.at("period"), "period") : 1;
  const std::uint64_t seed = j.contains("seed") ? j.at("seed").get<std::uint64_t>() : 0u;
  if (mode == "adversarial_random") {
    return rethrow_as_parse(where, [&] { return EventSchedule::adversarial_random(period, seed); });
  }
  if (mode == "adversarial_worst_effort") {
    const int candidates = j.contains("candidates") ? integer(j.at("candidates"), "candidates") : 8;
    return rethrow_as_parse(where, [&] {
      return EventSchedule::adversarial_worst_effort(period, seed, candidates);
    });
  }
  fail("mode", "unknown schedule mode \"" + mode + "\"");
}

EventSchedule load_schedule(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  try {
    return schedule_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Json schedule_to_json(const EventSchedule& s) {
  Json j{{"mode", to_string(s.mode())}};
  if (s.mode() == ScheduleMode::Scripted) {
    Json events = Json::array();
    for (const auto& e : s.events()) {
      events.push_back(Json{{"k", e.k}, {"agent", e.agent}, {"function", function_to_json(e.function)}});
    }
    j["events"] = events;
  } else {
    j["period"] = s.period();
    j["seed"] = s.seed();
    if (s.mode() == ScheduleMode::AdversarialWorstEffort) j["candidates"] = s.candidates();
  }
  return j;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

std::string trace_csv(const DGDTrace& trace) {
  std::string out = "k,norm_x,dist_to_min,F_rho,consensus_residual\n";
  for (const auto& r : trace.records) {
    out += fmt::format("{},{},{},{},{}\n", r.k, format_double(r.norm_x),
                       format_double(r.dist_to_min), format_double(r.F_rho),
                       format_double(r.consensus_residual));
  }
  return out;
}

std::string open_trace_csv(const OpenTrace& trace) {
  std::string out =
      "k,norm_x,dist_to_min,F_rho,consensus_residual,event_count,inst_min_norm,inside_ball\n";
  for (const auto& r : trace.records) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.base.k, format_double(r.base.norm_x),
                       format_double(r.base.dist_to_min), format_double(r.base.F_rho),
                       format_double(r.base.consensus_residual), r.event_count,
                       format_double(r.inst_min_norm), r.inside_ball ? 1 : 0);
  }
  return out;
}

std::string report_csv(const BoundsReport& report) {
  std::string out = "check,observed,bound,margin,pass\n";
  for (const auto& c : report.checks) {
    out += fmt::format("\"{}\",{},{},{},{}\n", c.name, format_double(c.observed),
                       format_double(c.bound), format_double(c.margin), c.pass ? 1 : 0);
  }
  return out;
}

Json report_json(const BoundsReport& report) {
  Json a = Json::array();
  for (const auto& c : report.checks) {
    a.push_back(Json{{"check", c.name},
                     {"observed", c.observed},
                     {"bound", c.bound},
                     {"margin", c.margin},
                     {"pass", c.pass},
                     {"fingerprint", report.fingerprint}});
  }
  return a;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
  std::string out = "kappa,sqrt_kappa,n,best_value,ratio_to_sqrt_kappa,theorem_bound\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{}\n", format_double(r.kappa), format_double(r.sqrt_kappa),
                       r.agents, format_double(r.best_value), format_double(r.ratio_to_sqrt_kappa),
                       format_double(r.sensitivity_bound));
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace odgd::io
