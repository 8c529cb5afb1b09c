#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kppfront/cli.hpp"
#include "kppfront/errors.hpp"

using namespace kpp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kppfront-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "kppfront");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<fs::path> listing(const fs::path& dir) {
  std::vector<fs::path> out;
  if (fs::exists(dir))
    for (const auto& e : fs::directory_iterator(dir))
      out.push_back(e.path().filename());
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("defaults parse and hash stably") {
  const Config a = parse_config("");
  const Config b = parse_config("[physics]\nlewis = 1\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(parse_config("[physics]\nlewis = 2\n")));
  CHECK(config_hash(a).size() == 16);
  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("unknown keys are named") {
  try {
    parse_config("[physics]\nlewsi = 2\n");
    FAIL("no exception");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("lewsi") != std::string::npos);
  }
}

TEST_CASE("parse errors carry the line number") {
  try {
    parse_config("[geometry]\nL = 1\nthis is not ini\n", "bad.cfg");
    FAIL("no exception");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("bad.cfg:3") != std::string::npos);
  }
}

TEST_CASE("range violations are named") {
  CHECK_THROWS_WITH_AS(parse_config("[physics]\nlewis = -1\n"), doctest::Contains("lewis"), InvalidArgument);
  CHECK_THROWS_WITH_AS(parse_config("[geometry]\nN = 3\n"), doctest::Contains("N"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[experiment]\nsolver = magic\n"), InvalidArgument);
}

TEST_CASE("runs are deterministic and record the mesh") {
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  const auto cfg = scratch("detcfg") / "run.cfg";
  std::ofstream(cfg) << "[physics]\nflow = cosine\namplitude = 1\nheat_loss = 0\nreaction_a = 1\n"
                        "[experiment]\nwindow_points = 5\n";
  REQUIRE(invoke({"--quiet", "--config", cfg.string(), "--out", d1.string(), "minspeed"}) == 0);
  REQUIRE(invoke({"--quiet", "--config", cfg.string(), "--out", d2.string(), "minspeed"}) == 0);
  const auto files = listing(d1);
  REQUIRE(files == listing(d2));
  REQUIRE(files.size() == 4);
  for (const auto& f : files)
    if (f.string().find(".timing.") == std::string::npos)
      CHECK(slurp(d1 / f) == slurp(d2 / f));
  for (const auto& f : files)
    if (f.string().find(".meta.json") != std::string::npos) {
      const auto meta = nlohmann::json::parse(slurp(d1 / f));
      CHECK(meta["derived"]["N"].get<int>() == 256);
      CHECK(meta["config"]["physics.flow"] == "cosine");
    }
}

TEST_CASE("hypothesis violations exit 2 without output") {
  const auto out = scratch("viol") / "out";
  const auto cfg = scratch("violcfg") / "run.cfg";
  std::ofstream(cfg) << "[physics]\nreaction_a = 1\nq = 1\n[experiment]\nproblem = robin\n";
  CHECK(invoke({"--quiet", "--config", cfg.string(), "--out", out.string(), "minspeed"}) == 2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("usage errors exit 1") {
  CHECK(invoke({"--quiet"}) == 1);
  CHECK(invoke({"--quiet", "nonsense"}) == 1);
  CHECK(invoke({"--quiet", "--config", "/nonexistent/file.cfg", "minspeed"}) == 1);
}

}
