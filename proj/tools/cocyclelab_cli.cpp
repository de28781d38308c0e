#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cocyclelab/runner.hpp"

using namespace cocyclelab;

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for linear cocycles over hyperbolic bases"};
  app.set_version_flag("--version", std::string(kVersion));

  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
  bool corrupt = false;

  std::vector<std::string> allowed = command_names();
  allowed.push_back("selftest");
  app.add_option("command", command, "Command to run")->required()->check(CLI::IsMember(allowed));
  app.add_option("-c,--config", config_path, "Experiment config file");
  app.add_option("--seed", seed, "Overrides run.seed");
  app.add_option("--threads", threads, "Overrides run.threads (outputs do not depend on it)");
  app.add_option("--out", out, "Output directory (default: run.out, $COCYCLELAB_OUT or .)");
  app.add_option("--set", overrides, "Override a config key: section.key=value")->take_all();
  app.add_flag("--corrupt-tolerance", corrupt, "selftest: build groups with membership tolerance 0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (command == "selftest") {
    const auto report = selftest(corrupt);
    for (const auto& c : report.cases)
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.passed ? "" : "  -- " + c.detail) << "\n";
    std::cout << "cases=" << report.cases.size() << " failed=" << report.failed << " seconds=" << report.seconds << "\n";
    return report.failed == 0 ? kExitOk : kExitFailure;
  }

  RunRequest req;
  req.command = command;
  req.seed = seed;
  req.threads = threads;
  req.out = out;
  try {
    if (!config_path.empty()) req.config = Config::load(config_path);
    for (const auto& s : overrides) req.config.set(s);
  } catch (const std::exception& e) {
    std::cerr << "error=config message=" << e.what() << "\n";
    return kExitConfig;
  }
  const auto result = run(req, std::cout);
  for (const auto& f : result.files) std::cout << "wrote " << f << "\n";
  if (result.exit_code != kExitOk) std::cerr << error_line(result) << "\n";
  return result.exit_code;
}
