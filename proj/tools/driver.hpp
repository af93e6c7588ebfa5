#pragma once

#include <optional>
#include <string>
#include <vector>

#include "serde.hpp"

namespace otcli {

struct RunConfig {
  std::string subcommand;

  std::string input;        // matrix / block triple / tree document
  std::string op;           // lazy: "<scenario>" or "<scenario>:<name>"
  std::string vector_path;  // lazy: support-list document
  std::string method = "both";  // cesaro route selection
  std::vector<double> values;   // construct targets
  int stable_dim = 0;
  long long power = 0;
  bool asymptotic = false;

  bool analyze = false;  // tree report sections
  bool asymptote = false;
  bool cyclic_vector = false;
  bool similarity = false;

  std::string scenario;  // repro; empty runs the whole registry
  bool list_only = false;

  int random_trials = 0;  // commutant randomized suite
  std::optional<unsigned> seed;

  double tol = 1e-3;
  long long max_n = 200000;
  long long truncation = 2000;
  int depth = 8;

  std::string output;  // empty writes to stdout
  std::string format = "json";
};

struct Verdict {
  std::string check;
  bool pass = false;
  std::string provenance;  // label recording how the expected value was fixed
  std::string detail;
};

struct Report {
  std::string scenario;
  json inputs;
  json values;
  json certificates;
  std::vector<Verdict> verdicts;

  bool pass() const;
};

json report_to_json(const Report& r);

// Dispatches on subcommand. Throws SchemaError on invalid configuration or
// inputs; module errors propagate verbatim.
Report run(const RunConfig& cfg);

// Stable scenario ids, each runnable standalone through the repro subcommand.
std::vector<std::string> repro_registry();

}  // namespace otcli
