#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fermi/model_io.hpp"

namespace fermi {

struct RunConfig {
  std::string model_path;  // empty: default model without interaction
  std::optional<int> L, d;
  std::optional<double> beta;
  int half_steps = 1;
  int m_max = 3;
  int trials = 200;
  std::uint64_t seed = 7;
  double tol = 1e-8;
  std::string out_path;  // empty: stdout
  std::string format = "csv";
  unsigned threads = 0;
};

// One line of a verification report.
struct CheckRow {
  std::string suite;
  std::string quantity;
  double computed;
  std::optional<double> bound;  // empty for rows that are reported only
  bool pass;
};

// Model file with command-line overrides applied.
ModelFile resolve_model(const RunConfig& cfg);

std::vector<CheckRow> run_suite(const std::string& suite, const ModelFile& model, const RunConfig& cfg);

// Exit codes: 0 pass, 1 check failure or invariant violation, 2 usage or parse error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fermi
