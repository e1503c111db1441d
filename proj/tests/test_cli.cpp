#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "fermi/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path p = fs::temp_directory_path() / ("fermi_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const char* bin = std::getenv("FERMI_CLI");
  REQUIRE_MESSAGE(bin != nullptr, "FERMI_CLI must point at the fermi_cli binary");
  const fs::path out = scratch() / "stdout.txt";
  const std::string cmd = std::string(bin) + " " + args + " > " + out.string() + " 2> " + (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), slurp(out)};
}

fs::path write_model(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

int lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("model-validate exit codes") {
  const auto good = write_model("hubbard.json", R"({"L": 2, "interaction": [{"order": 2, "entries": [
      {"X": [0, 0], "Xi": [0, 1], "Phi": [0, 1], "re": 0.1}]}]})");
  CHECK(run("model-validate --model " + good.string()).code == 0);
  const auto bad = write_model("asym.json", R"({"interaction": [{"order": 2, "entries": [
      {"X": [1, 0], "Xi": [0, 1], "Phi": [1, 0], "re": 0.1, "im": 0.3}]}]})");
  CHECK(run("model-validate --model " + bad.string()).code == 1);
  CHECK(run("model-validate --model " + (scratch() / "missing.json").string()).code == 2);
  CHECK(run("model-validate --model " + write_model("broken.json", "{ not json").string()).code == 2);
  CHECK(run("no-such-command").code == 2);
}

TEST_CASE("verify suites") {
  CHECK(run("verify --suite covariance").code == 0);
  CHECK(run("verify --suite bogus").code == 2);
  const auto big = write_model("big.json", R"({"interaction": [{"order": 2, "entries": [
      {"X": [0, 0], "Xi": [0, 1], "Phi": [0, 1], "re": 1.0}]}]})");
  const Run r = run("verify --suite theorem --model " + big.string());
  CHECK(r.code == 1);
  CHECK(slurp(scratch() / "stderr.txt").find("smallness") != std::string::npos);
}

TEST_CASE("verify is deterministic") {
  const Run a = run("verify --suite all --seed 7");
  const Run b = run("verify --suite all --seed 7 --threads 1");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("suite,quantity,computed,bound,ratio,pass\n", 0) == 0);
}

TEST_CASE("tables") {
  const Run decay = run("table --kind covariance_decay --L 16");
  CHECK(decay.code == 0);
  CHECK(lines(decay.out) == 18);  // header and 17 rows

  const auto hub = write_model("small.json", R"({"L": 2, "interaction": [{"order": 2, "entries": [
      {"X": [0, 0], "Xi": [0, 1], "Phi": [0, 1], "re": 0.1}]}]})");
  const Run taylor = run("table --kind taylor --m-max 3 --model " + hub.string());
  CHECK(taylor.code == 0);
  CHECK(lines(taylor.out) == 5);

  const Run env = run("table --kind envelope --max-sep 3 --L 8");
  REQUIRE(env.code == 0);
  std::istringstream in(env.out);
  std::string line;
  std::getline(in, line);
  double prev = 1e300;
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string cell;
    for (int j = 0; j < 3; ++j) std::getline(cells, cell, ',');
    const double e = std::stod(cell);
    CHECK(e < prev);
    prev = e;
    ++rows;
  }
  CHECK(rows == 4);

  const Run json = run("table --kind taylor --m-max 1 --format json");
  CHECK(json.code == 0);
  CHECK(json.out.find("\"prop41_bound\"") != std::string::npos);
}

TEST_CASE("in-process entry point") {
  std::ostringstream out, err;
  const char* argv[] = {"fermi_cli", "verify", "--suite", "detbound", "--trials", "20"};
  CHECK(fermi::run_cli(6, argv, out, err) == 0);
  CHECK(out.str().find("detbound,") != std::string::npos);
}
