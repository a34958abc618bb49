#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run(const std::string& args, const std::string& stdout_to = "/dev/null") {
  std::string cmd = std::string(CKAM_CLI_PATH) + " " + args + " >" + stdout_to + " 2>/dev/null";
  int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ckam_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("resonances writes a hashed csv containing the golden convergent") {
  auto dir = scratch("res");
  REQUIRE(run("resonances --kmax 20 --output-dir " + dir.string()) == 0);
  auto csv = slurp(dir / "resonances.csv");
  CHECK(csv.rfind("# config_hash=", 0) == 0);
  CHECK(csv.find("\n3,-5,") != std::string::npos);
  auto manifest = slurp(dir / "manifest.json");
  CHECK(manifest.find("\"exit_code\": 0") != std::string::npos);
  CHECK(manifest.find("resonances.csv") != std::string::npos);
}

TEST_CASE("config round trip is byte identical") {
  auto dir = scratch("cfg");
  fs::create_directories(dir);
  auto cfg = dir / "in.json";
  REQUIRE(run("frame --k=-3,5 --tau 0.25 --seed 7 --output-dir " + (dir / "out").string() + " --dump-config",
              cfg.string()) == 0);
  REQUIRE(fs::file_size(cfg) > 0);
  REQUIRE(run("--config " + cfg.string()) == 0);
  CHECK(slurp(cfg) == slurp(dir / "out" / "config.json"));
  CHECK(slurp(dir / "out" / "frame.json").find("\"in_regime\"") != std::string::npos);
}

TEST_CASE("environment overrides the output directory") {
  auto dir = scratch("env");
  std::string cmd = "CKAM_OUTPUT_DIR=" + dir.string() + " " + CKAM_CLI_PATH + " frame >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "frame.json"));
}

TEST_CASE("destroy-check on the integrable fixture reports enters") {
  auto dir = scratch("destroy");
  REQUIRE(run("destroy-check --fixture integrable --trials 4 --K 256 --output-dir " + dir.string()) == 0);
  auto rep = slurp(dir / "destruction.json");
  CHECK(rep.find("\"verdict\": \"enters\"") != std::string::npos);
  CHECK(fs::exists(dir / "trials.csv"));
}

TEST_CASE("exit codes") {
  auto dir = scratch("codes");
  CHECK(run("--help") == 0);
  CHECK(run("--no-such-flag") == 64);
  CHECK(run("") == 64);
  CHECK(run("frame --k=1,x --output-dir " + dir.string()) == 64);
  CHECK(run("frame --k=1,2,3 --output-dir " + dir.string()) == 2);
  CHECK(run("build --output-dir " + dir.string()) == 2);  // golden k fails the enforced thresholds
  CHECK(run("--config /nonexistent/cfg.json") == 64);
}
