#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cocyclelab/config.hpp"

namespace cocyclelab {

inline constexpr const char* kVersion = "0.1.0";

/// Exit statuses of run().
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitNumerical = 3, kExitRefusal = 4 };

const std::vector<std::string>& command_names();

struct RunRequest {
  std::string command;  // empty: [run] command
  Config config;
  /// Flag overrides, written into [run] before anything else is read.
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;  // else [run] out, else $COCYCLELAB_OUT, else "."
};

struct RunResult {
  int exit_code = kExitOk;
  std::string error_kind;  // "config", "numerical" or "refusal" when exit_code != 0
  std::string message;
  std::vector<std::string> files;
  std::string summary_json;
};

/// Runs one command. Human-readable key=value lines go to `log`. Output
/// files are <out>/<command>.csv and <out>/<command>.json (plus
/// command-specific extras); CSV bytes depend only on the config and seed.
RunResult run(const RunRequest& request, std::ostream& log);

/// "error=<kind> message=<text>" on one line.
std::string error_line(const RunResult& r);

struct SelftestCase {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<SelftestCase> cases;
  int failed = 0;
  double seconds = 0.0;
};

/// End-to-end suite of small known-answer cases. With corrupt_tolerance
/// every group is built with membership tolerance 0, so membership cases
/// must fail (negative control).
SelftestReport selftest(bool corrupt_tolerance = false);

}  // namespace cocyclelab
