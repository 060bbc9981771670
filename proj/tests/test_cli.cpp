#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RENORM_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("renorm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& json) {
  const auto path = dir / "config.json";
  std::ofstream(path) << json;
  return path;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("identity with an empty corpus writes the header and exits 0") {
  const auto dir = scratch("empty");
  const auto cfg = write_config(dir, R"({"corpus_size": 0})");
  CHECK(run_cli("identity --config " + cfg.string() + " --out " + (dir / "out").string()) == 0);
  CHECK(slurp(dir / "out" / "identity.csv") == "trial,residual_relative,norm_pi1,norm_pi2,norm_pi3,norm_pi4\n");
}

TEST_CASE("the same seed twice gives byte-identical CSVs, also across thread counts") {
  const auto dir = scratch("det");
  const auto cfg = write_config(dir, R"({"corpus_size": 4, "j": 7})");
  const std::string base = "identity --config " + cfg.string() + " --seed 42 --out ";
  REQUIRE(run_cli(base + (dir / "a").string()) == 0);
  REQUIRE(run_cli(base + (dir / "b").string()) == 0);
  REQUIRE(run_cli(base + (dir / "c").string() + " --threads 3") == 0);
  const std::string a = slurp(dir / "a" / "identity.csv");
  CHECK(count_lines(a) == 5);
  CHECK(a == slurp(dir / "b" / "identity.csv"));
  CHECK(a == slurp(dir / "c" / "identity.csv"));
  REQUIRE(run_cli("identity --config " + cfg.string() + " --seed 43 --out " + (dir / "d").string()) == 0);
  CHECK(a != slurp(dir / "d" / "identity.csv"));
}

TEST_CASE("bounds with the default config has one row per operator and trial") {
  const auto dir = scratch("bounds");
  REQUIRE(run_cli("bounds --out " + dir.string()) == 0);
  // 3 families × 6 operators × 30 trials plus the header.
  CHECK(count_lines(slurp(dir / "bounds.csv")) == 3 * 6 * 30 + 1);
  CHECK(fs::exists(dir / "bounds_meta.json"));
}

TEST_CASE("config errors exit with code 2") {
  const auto dir = scratch("errors");
  CHECK(run_cli("identity --config " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("identity --config " + write_config(dir, R"({"colour": "blue"})").string()) == 2);
  CHECK(run_cli("structure --config " + write_config(dir, R"({"dim": 2})").string()) == 2);
  CHECK(run_cli("identity --config " + write_config(dir, "{not json").string()) == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("plot") == 2);
  CHECK(run_cli("identity --seed notanumber") == 2);
}

TEST_CASE("invariant failures exit with code 3") {
  const auto dir = scratch("invariant");
  const auto cfg = write_config(dir, R"({"corpus_size": 2, "j": 6, "tolerances": {"identity": 1e-30}})");
  CHECK(run_cli("identity --config " + cfg.string() + " --out " + (dir / "out").string()) == 3);
  CHECK(fs::exists(dir / "out" / "identity.csv"));
}

TEST_CASE("--dump-coeffs writes one listing per corpus function") {
  const auto dir = scratch("dump");
  const auto cfg = write_config(dir, R"({"corpus_size": 2, "j": 7})");
  REQUIRE(run_cli("structure --dump-coeffs --config " + cfg.string() + " --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "coeffs" / "structure_f_0.txt"));
  CHECK(fs::exists(dir / "coeffs" / "structure_f_1.txt"));
}
