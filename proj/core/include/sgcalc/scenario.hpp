#pragma once

#include "sgcalc/expr.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sgcalc {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kReportSchemaVersion = "sgcalc-report/1";

// Knobs shared by every task of a run; echoed verbatim in the report.
struct RunOptions {
  std::string out_dir;          // empty: compute everything, write nothing
  unsigned long long seed = 0;  // deterministic sampling seed
  double eps_ell = 1e-6;        // face ellipticity threshold
  double newton_tol = 1e-10;    // stationary solve tolerance
  int parallel = 4;             // quadrature worker threads
};

// Result of one scenario task. `pass` is the check's own verdict; a task may
// declare `expect: fail` (negative fixtures), so the run-level outcome is
// whether pass matched the expectation.
struct TaskOutcome {
  std::string task;     // task kind
  std::string subject;  // names the task ran on
  bool pass = false;
  bool expect_pass = true;
  bool met() const { return pass == expect_pass; }
  std::string verdict;  // one human-readable line
  std::vector<std::pair<std::string, double>> numbers;
  std::vector<std::pair<std::string, std::string>> notes;
  std::vector<std::string> artifacts;  // files written, relative to out_dir
  double wall_ms = 0.0;
};

struct RunReport {
  std::string scenario_name;
  Dims dims;
  RunOptions config;
  std::vector<TaskOutcome> tasks;
  bool all_met = false;
  // Serialized report (the content of report.json). Identical between runs
  // of the same scenario, seed, and flags except for the wall_ms fields.
  std::string json;
};

// Parses and validates the scenario, runs its tasks in order, and writes
// report.json plus per-task artifacts under opt.out_dir when set. Scenario
// level problems (malformed JSON, unknown names or task kinds, shape and
// dimension clashes) throw InvalidInput or ParseError before any task runs.
// A task whose check fails or throws is recorded as failed with the message
// kept in its notes; the remaining tasks still run.
RunReport run_scenario_text(const std::string& text, const RunOptions& opt = {});

// Same from a file path; the prefix "corpus:" resolves a bundled scenario.
RunReport run_scenario_file(const std::string& path, const RunOptions& opt = {});

struct CorpusEntry {
  std::string name;
  std::string summary;
  std::string text;  // the scenario document
};

// Bundled demonstration scenarios, each passing its declared expectations.
const std::vector<CorpusEntry>& corpus_list();

// Lookup by name; throws InvalidInput when the name is not bundled.
const CorpusEntry& corpus_get(const std::string& name);

// Plain-language description of what one task kind computes and checks;
// throws InvalidInput on unknown kinds.
std::string explain_task(const std::string& kind);

}  // namespace sgcalc
