#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/runner.hpp"

using namespace cocyclelab;

namespace {

std::filesystem::path scratch(const std::string& tag) {
  return std::filesystem::temp_directory_path() / ("cocyclelab-test-" + std::to_string(::getpid()) + "-" + tag);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_text(const std::string& command, const std::string& text, const std::string& tag, int threads = 1) {
  RunRequest req;
  req.command = command;
  req.config = Config::parse(text);
  req.out = scratch(tag).string();
  req.threads = threads;
  std::ostringstream log;
  return run(req, log);
}

const char* kDiag = "[base]\nkind = fullshift\n[cocycle]\nform = constant\nvalue = 2 0; 0 0.5\n[params]\nn = 1000\n";

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = Config::parse(
      "# comment\n[run]\nseed = 4\n; also a comment\n[group]\nfamily = SL  # trailing\n"
      "[cocycle]\nform = constant\nvalue = 1 2; 0 1\n[bump]\ncenter = torus:0,0\n[bump]\ncenter = torus:1/2,0\n");
  CHECK(cfg.get("group", "family") == "SL");
  CHECK(cfg.get("cocycle", "value") == "1 2; 0 1");
  CHECK(cfg.get_int("run", "seed", 0) == 4);
  CHECK(cfg.sections("bump").size() == 2);
  CHECK(cfg.get("bump", "center", cfg.sections("bump")[1]) == "torus:1/2,0");
  CHECK(cfg.get_double("params", "missing", 2.5) == 2.5);

  CHECK_THROWS_AS(Config::parse("[nope]\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[run]\n[run]\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[run]\nseed = 1\nseed = 2\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("seed = 1\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[run]\nseed\n"), ConfigError);
}

TEST_CASE("config values, overrides and consumption") {
  auto cfg = Config::parse("[params]\nn = 1e5\nflag = yes\nbad = 1.5\n[bump]\namplitude = 0\n");
  CHECK(cfg.get_int("params", "n", 0) == 100000);
  CHECK(cfg.get_bool("params", "flag", false));
  CHECK_THROWS_AS(cfg.get_int("params", "bad", 0), ConfigError);
  CHECK_THROWS_AS(cfg.require_consumed(), ConfigError);

  cfg.set("params.n=7");
  cfg.set("run.seed = 9");
  cfg.set("bump.0.amplitude=0.5");
  CHECK(cfg.get_int("params", "n", 0) == 7);
  CHECK(cfg.get_int("run", "seed", 0) == 9);
  CHECK(cfg.get_double("bump", "amplitude", 0.0, cfg.sections("bump")[0]) == 0.5);
  CHECK_THROWS_AS(cfg.set("bump.3.amplitude=1"), ConfigError);
  CHECK_THROWS_AS(cfg.set("nosuch.key=1"), ConfigError);
  CHECK_THROWS_AS(cfg.set("params.n"), ConfigError);

  try {
    Config::parse("[params]\nn = 1\ntypo = 2\n").require_consumed();
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("params.n") != std::string::npos);
    CHECK(std::string(e.what()).find("params.typo") != std::string::npos);
  }
}

TEST_CASE("config hash") {
  const auto a = Config::parse("[run]\nseed = 1\nthreads = 1\n[params]\nn = 10\n");
  auto b = Config::parse("[params]\nn = 10\n[run]\nthreads = 8\nseed = 1\nout = /tmp/x\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash_hex().size() == 16);
  b.set("run.seed=2");
  CHECK(a.hash() != b.hash());
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("building cocycles from config") {
  const auto build = [](const std::string& text) {
    const auto cfg = Config::parse(text);
    const auto sys = base_from_config(cfg);
    const auto g = group_from_config(cfg);
    auto a = cocycle_from_config(cfg, g, sys);
    cfg.require_consumed();
    return a;
  };
  const auto lc = build(
      "[base]\nkind = fullshift\n[cocycle]\nform = locally_constant\nwindow = 0\ntable.0 = 2 0; 0 0.5\n"
      "table.1 = 1 1; 0 1\n[bump]\ncenter = seq:2:0|0@0|0\nradius = 0.3\nlie = 1\namplitude = 0.1\n");
  const auto& t = std::get<LocallyConstantForm>(lc.form).table;
  REQUIRE(t.size() == 2);
  CHECK(t[1](0, 1).real() == 1.0);
  REQUIRE(lc.bumps.size() == 1);
  CHECK(lc.bumps[0].direction.isApprox(lie_basis(lc.group)[1]));

  const auto f = build("[cocycle]\nform = fourier\n[term]\ncoeff = 0 -1; 1 0\n[term]\nfx = 1\nsine = true\ncoeff = 0 -0.5; 0.5 0\n");
  CHECK(std::get<FourierTorusForm>(f.form).terms.size() == 2);
  CHECK(std::get<FourierTorusForm>(f.form).terms[1].sine);

  const auto r1 = build("[group]\nfamily = Sp\nd = 4\n[cocycle]\nform = random_fourier\nseed = 3\n");
  const auto r2 = build("[group]\nfamily = Sp\nd = 4\n[cocycle]\nform = random_fourier\nseed = 3\n");
  CHECK(evaluate(r1, TorusPoint::fixed(0.2, 0.3)) == evaluate(r2, TorusPoint::fixed(0.2, 0.3)));

  CHECK_THROWS_AS(build("[base]\nkind = fullshift\n[cocycle]\nform = locally_constant\nwindow = 0\ntable.0 = 1 0; 0 1\n"),
                  ConfigError);
  CHECK_THROWS_AS(build("[cocycle]\nform = constant\nvalue = 2 0; 0 2\n"), ConfigError);  // det 4
  CHECK_THROWS_AS(build("[cocycle]\nform = spline\n"), ConfigError);
  CHECK_THROWS_AS(build("[base]\nkind = torus\n[cocycle]\nform = identity\n"), ConfigError);
  CHECK_THROWS_AS(build("[group]\nfamily = Sp\nd = 3\n[cocycle]\nform = identity\n"), ConfigError);
  CHECK_THROWS_AS(build("[cocycle]\nform = identity\n[bump]\ncenter = torus:0,0\n"), ConfigError);  // no direction
}

TEST_CASE("run: lyap output schema and values") {
  const auto r = run_text("lyap", kDiag, "lyap");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.files.size() == 2);
  const std::string csv = slurp(r.files[0]);
  CHECK(csv.rfind("# schema=lyap/1\n# command=lyap config_hash=", 0) == 0);
  CHECK(csv.find("point,x0,n,lambda_1,lambda_2,sum_residual,window_drift\n") != std::string::npos);
  std::istringstream lines(csv);
  std::string line, last;
  while (std::getline(lines, line)) last = line;
  // x0 contains no commas on the shift; fields: point, x0, n, l1, l2, ...
  std::vector<std::string> fields;
  std::stringstream ls(last);
  for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
  REQUIRE(fields.size() == 7);
  CHECK(fields[2] == "1000");
  CHECK(std::abs(std::stod(fields[3]) - std::log(2.0)) < 1e-12);
  CHECK(std::abs(std::stod(fields[4]) + std::log(2.0)) < 1e-12);
  CHECK(r.summary_json.find("\"config_hash\"") != std::string::npos);
  CHECK(r.summary_json.find("\"wall_time_s\"") != std::string::npos);
  std::filesystem::remove_all(scratch("lyap"));
}

TEST_CASE("run: exit statuses") {
  SUBCASE("config errors exit 2") {
    auto r = run_text("lyap", "[group]\nfamily = Sp\nd = 3\n[cocycle]\nform = identity\n", "e1");
    CHECK(r.exit_code == kExitConfig);
    CHECK(r.message.find("even") != std::string::npos);
    CHECK(error_line(r).rfind("error=config message=", 0) == 0);
    CHECK(run_text("lyap", "[cocycle]\nform = identity\n[params]\nn = -1\n", "e2").exit_code == kExitConfig);
    CHECK(run_text("lyap", "[cocycle]\nform = identity\n[params]\nnn = 1\n", "e3").exit_code == kExitConfig);
    CHECK(run_text("nosuch", "[cocycle]\nform = identity\n", "e4").exit_code == kExitConfig);
    CHECK(run_text("lyap", "[params]\nn = 1\n", "e5").exit_code == kExitConfig);  // no [cocycle]
    CHECK(run_text("lyap", "[run]\ncommand = sweep\n[cocycle]\nform = identity\n", "e6").exit_code == kExitConfig);
  }
  SUBCASE("unknown keys are rejected before any output") {
    const auto dir = scratch("e7");
    std::filesystem::remove_all(dir);
    CHECK(run_text("lyap", "[cocycle]\nform = identity\n[params]\ntypo = 1\n", "e7").exit_code == kExitConfig);
    CHECK_FALSE(std::filesystem::exists(dir));
  }
  SUBCASE("refusal exits 4") {
    const auto r = run_text("disintegration",
                            "[base]\nkind = fullshift\n[cocycle]\nform = constant\n"
                            "value = 1.0512710963760241 0; 0 0.95122942450071402\n[params]\nlyap_n = 1000\n",
                            "e8");
    CHECK(r.exit_code == kExitRefusal);
    CHECK(r.error_kind == "refusal");
    const auto phi = run_text("phi-rank", "[base]\nkind = fullshift\n[cocycle]\nform = constant\nvalue = 4 0; 0 0.25\n", "e9");
    CHECK(phi.exit_code == kExitRefusal);
  }
  SUBCASE("numerical failure exits 3") {
    const auto r = run_text("holonomy",
                            "[cocycle]\nform = fourier\n[term]\ncoeff = 0 -1.1; 1.1 0\n[bump]\ncenter = torus:0,0\n"
                            "radius = 0.3\ndirection = 1 0; 0 -1\namplitude = 0.02\n[params]\nx = torus:0,0\nn_max = 2\n"
                            "stride = 1\ntol = 1e-15\n",
                            "e10");
    CHECK(r.exit_code == kExitNumerical);
    CHECK(r.error_kind == "numerical");
  }
  for (const char* tag : {"e1", "e2", "e3", "e4", "e5", "e6", "e7", "e8", "e9", "e10"}) std::filesystem::remove_all(scratch(tag));
}

TEST_CASE("run: outputs do not depend on threads") {
  const char* text = "[base]\nkind = fullshift\n[cocycle]\nform = locally_constant\nwindow = 0\n"
                     "table.0 = 2 1; 1 1\ntable.1 = 0 -1; 1 0\n[params]\nn = 2000\npoints = 5\ntrace_every = 100\n";
  const auto a = run_text("lyap", text, "t1", 1);
  const auto b = run_text("lyap", text, "t3", 3);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(a.files[0]) == slurp(b.files[0]));
  CHECK(slurp(a.files[1]) == slurp(b.files[1]));
  std::filesystem::remove_all(scratch("t1"));
  std::filesystem::remove_all(scratch("t3"));
}

TEST_CASE("run: output directory from the environment") {
  const auto dir = scratch("env");
  ::setenv("COCYCLELAB_OUT", dir.string().c_str(), 1);
  RunRequest req;
  req.command = "lyap";
  req.config = Config::parse(kDiag);
  std::ostringstream log;
  const auto r = run(req, log);
  ::unsetenv("COCYCLELAB_OUT");
  REQUIRE(r.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "lyap.csv"));
  CHECK(std::filesystem::exists(dir / "lyap.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("run: every command produces its schema") {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"holonomy", "[base]\nkind = fullshift\n[cocycle]\nform = locally_constant\nwindow = 1\n"
                   "table.000 = 1 0; 0 1\ntable.001 = 0 -1; 1 0\ntable.010 = 1 1; 0 1\ntable.011 = 1 0; 1 1\n"
                   "table.100 = 1 0; 0 1\ntable.101 = 0 -1; 1 0\ntable.110 = 1 1; 0 1\ntable.111 = 1 0; 1 1\n"},
      {"holonomy-deriv-check", "[base]\nkind = fullshift\n[cocycle]\nform = locally_constant\nwindow = 0\n"
                               "table.0 = 0.6 -0.8; 0.8 0.6\ntable.1 = 0 -1; 1 0\n[bump]\ncenter = seq:2:0|0@0|0\n"
                               "radius = 0.1875\nlie = 0\namplitude = 0.05\n"},
      {"domination", "[cocycle]\nform = constant\nvalue = 0.6 -0.8; 0.8 0.6\n"},
      {"phi-rank", "[base]\nkind = fullshift\n[cocycle]\nform = identity\n[params]\nmode = analytic\n"},
      {"invariant-measure", "[params]\ng1 = 2 0; 0 0.5\ng2 = 3 0; 0 0.33333333333333331\n"},
      {"disintegration", "[base]\nkind = fullshift\n[cocycle]\nform = constant\nvalue = 0.6 -0.8; 0.8 0.6\n"
                         "[params]\nn_iter = 400\nn_orbits = 8\nlyap_n = 1000\n"},
      {"sweep", "[cocycle]\nform = identity\n[params]\ntrials = 3\nn = 2000\nholder_samples = 10\n"},
  };
  const std::map<std::string, std::string> schema = {
      {"holonomy", "holonomy_gap"}, {"holonomy-deriv-check", "holonomy_deriv"}, {"domination", "domination"},
      {"phi-rank", "phi_rank"},     {"invariant-measure", "invariant_measure"},  {"disintegration", "disintegration"},
      {"sweep", "sweep"}};
  for (const auto& [cmd, text] : cases) {
    CAPTURE(cmd);
    const auto r = run_text(cmd, text, "schema");
    CAPTURE(r.message);
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(r.files[0]).rfind("# schema=" + schema.at(cmd) + "/1\n", 0) == 0);
    CHECK(r.files.back().find(cmd + ".json") != std::string::npos);
  }
  std::filesystem::remove_all(scratch("schema"));
}

TEST_CASE("selftest suite and negative control") {
  const auto ok = selftest();
  CHECK(ok.cases.size() >= 20);
  CHECK(ok.failed == 0);
  CHECK(ok.seconds < 60.0);
  const auto bad = selftest(true);
  int membership_failures = 0;
  for (const auto& c : bad.cases)
    if (!c.passed) {
      CHECK(c.name.rfind("membership", 0) == 0);
      ++membership_failures;
    }
  CHECK(membership_failures >= 5);
}
