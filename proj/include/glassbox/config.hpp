#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace glassbox {

// Everything a pipeline run needs. Text form: `[section]` headers and
// `key = value` lines; '#' starts a comment.
struct RunConfig {
  // [run]
  std::string domain = "number_theory";
  std::string output = "runs/default";
  std::string data_dir;  // empty: built-in data directory
  std::uint64_t seed = 1;
  int workers = 0;  // 0: hardware concurrency
  int rounds = 4;
  int epochs = 3;
  bool challenges = true;
  bool report_wall_time = false;  // wall time in rounds.csv (breaks byte-identical reruns)

  // [problems]
  int practice = 1000;  // unique problems generated, train plus test
  int test = 0;         // 0: practice / 10
  int problem_size_cap = 20;

  // [search]
  std::string practice_mode = "sample";  // sample | enumerate
  int practice_candidates = 2000;
  int eval_candidates = 20000;  // test and challenge problems, enumeration
  int size_cap = 20;
  double epsilon = 0.05;

  // [budget]
  int max_steps = 10000;
  int max_recursion = 100;

  // [model]
  double learning_rate = 0.1;
  double l2 = 1e-4;
  int train_epochs = 30;
  int batch_size = 32;

  int test_count() const { return test > 0 ? test : practice / 10; }
  // Throws Error naming the first invalid field.
  void validate() const;
};

RunConfig parse_config(std::string_view text, std::string_view origin = "<config>");
// Throws Error naming the path if it cannot be read.
RunConfig load_config(const std::string& path);
// Normalized text: every key, fixed order, shortest round-tripping numbers.
std::string config_to_text(const RunConfig& cfg);

}  // namespace glassbox
