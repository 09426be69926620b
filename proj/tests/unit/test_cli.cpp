#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "welfare");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = welfare::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kData = WELFARE_TEST_DATA;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("welfare_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("simulate reproduces the golden CSV and summary") {
  const auto dir = scratch("golden");
  const auto r = cli({"simulate", "--config", kData + "/golden_plan.json", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("golden.csv") != std::string::npos);
  CHECK(slurp(dir / "golden.csv") == slurp(kData + "/golden.csv"));
  CHECK(slurp(dir / "golden.summary.json") == slurp(kData + "/golden.summary.json"));
}

TEST_CASE("thread count does not change the output bytes") {
  const auto a = scratch("threads1"), b = scratch("threads4");
  REQUIRE(cli({"simulate", "--config", kData + "/golden_plan.json", "--out", a.string(), "--threads", "1"}).code == 0);
  REQUIRE(cli({"simulate", "--config", kData + "/golden_plan.json", "--out", b.string(), "--threads", "4"}).code == 0);
  CHECK(slurp(a / "golden.csv") == slurp(b / "golden.csv"));
}

TEST_CASE("overrides and seed") {
  const auto dir = scratch("override");
  const auto r = cli({"simulate", "--config", kData + "/golden_plan.json", "--override", "T=30", "--seed", "5",
                      "--out", dir.string(), "--quiet"});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const auto csv = slurp(dir / "golden.csv");
  CHECK(csv.find(",30,") != std::string::npos);
  CHECK(csv.find(",50,") == std::string::npos);
  CHECK(csv != slurp(kData + "/golden.csv"));
}

TEST_CASE("config errors exit with 2 and name the problem") {
  auto r = cli({"simulate", "--config", kData + "/golden_plan.json", "--override", "algorithm.lambda=null"});
  CHECK(r.code == 2);
  r = cli({"simulate", "--override", "algorithm.id=exp3", "--override", "environment.kind=uniform", "--override",
           "T=10"});
  CHECK(r.code == 2);
  CHECK(r.err.find("algorithm.lambda") != std::string::npos);
  r = cli({"simulate", "--config", "/nonexistent.json"});
  CHECK(r.code == 2);
  r = cli({"simulate", "--bogus-flag"});
  CHECK(r.code == 2);
  r = cli({});
  CHECK(r.code == 2);
  r = cli({"rates", "--config", kData + "/golden_plan.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("horizons") != std::string::npos);
}

TEST_CASE("runtime failures exit with 1") {
  const auto blocker = fs::temp_directory_path() / "welfare_cli_blocker";
  std::ofstream(blocker) << "x";
  const auto r = cli({"simulate", "--config", kData + "/golden_plan.json", "--out", (blocker / "sub").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("welfare_cli_blocker") != std::string::npos);
}

TEST_CASE("rates fits a sweep") {
  const auto dir = scratch("rates");
  const auto r = cli({"rates", "--config", kData + "/golden_plan.json", "--override", "T=100,1000,3000,10000",
                      "--out", dir.string(), "--quiet"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("slope ", 0) == 0);
  CHECK(r.out.find("r^2") != std::string::npos);
  CHECK(slurp(dir / "golden.summary.json").find("\"fitted\"") != std::string::npos);
}

TEST_CASE("verify passes by default and fails loudly when perturbed") {
  auto r = cli({"verify", "--quiet"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  r = cli({"verify", "--perturb", "1e-6", "--quiet"});
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL") != std::string::npos);
  r = cli({"verify", "--lambda", "0.95", "--epsilon", "1"});
  CHECK(r.code == 0);
  for (const char* name : {"c1 =", "c2 =", "c3 =", "C  ="}) CHECK(r.out.find(name) != std::string::npos);

  const auto rows = welfare::cli::verify_suite({0.5}, {0.0});
  for (const auto& row : rows) CHECK(row.pass);
}

TEST_CASE("help exits 0") {
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("the installed executable reports exit codes") {
  const char* bin = std::getenv("WELFARE_BIN");
  if (bin == nullptr) return;
  const std::string quiet = " >/dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system((std::string(bin) + " verify --quiet" + quiet).c_str())) == 0);
  CHECK(WEXITSTATUS(std::system((std::string(bin) + " simulate --config /nonexistent.json" + quiet).c_str())) == 2);
}
