#pragma once

// JSON descriptors in, CSV/JSON artifacts out.

#include "open_dgd/bounds.hpp"
#include "open_dgd/dgd.hpp"
#include "open_dgd/open_system.hpp"
#include "open_dgd/worst_case.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace odgd::io {

using Json = nlohmann::json;

// Carries the file (if any) and the JSON field path of the offending value.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json read_json_file(const std::filesystem::path& path);

QuadraticFunction function_from_json(const Json& j, const std::string& where = "function");
Json function_to_json(const QuadraticFunction& f);
Json function_to_json(const RotatedQuadratic2D& f);

Network network_from_json(const Json& j, const std::string& where = "network");

// Replacement of one agent's function, used by the sensitivity check.
struct SwapSpec {
  int agent = 0;
  QuadraticFunction function;
};

struct InstanceFile {
  ProblemInstance instance;
  std::optional<SwapSpec> swap;
  std::optional<StackedState> x0;
  std::string fingerprint;
};

// {"functions": [...], "network": {...}, "rho": r, "eta": e} plus optional
// "alpha", "beta", "x0" (array of n blocks) and "swap": {"agent", "function"}.
InstanceFile instance_from_json(const Json& j);
InstanceFile load_instance(const std::filesystem::path& path);

// {"mode": "scripted", "events": [{"k", "agent", "function"}]} or
// {"mode": "adversarial_random", "period", "seed"} or
// {"mode": "adversarial_worst_effort", "period", "seed", "candidates"}.
EventSchedule schedule_from_json(const Json& j);
EventSchedule load_schedule(const std::filesystem::path& path);
Json schedule_to_json(const EventSchedule& s);

std::string format_double(double v);

std::string trace_csv(const DGDTrace& trace);
std::string open_trace_csv(const OpenTrace& trace);
std::string report_csv(const BoundsReport& report);
Json report_json(const BoundsReport& report);
std::string scaling_csv(const std::vector<ScalingRow>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace odgd::io
