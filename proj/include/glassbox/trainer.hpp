#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "glassbox/config.hpp"
#include "glassbox/domains.hpp"
#include "glassbox/model.hpp"
#include "glassbox/search.hpp"

namespace glassbox {

struct PracticeSet {
  std::vector<ProgramTree> train;
  std::vector<ProgramTree> test;
};

// Draws problems from the problem grammar under uniform rule probabilities,
// drops duplicates (by canonical key) and problems that cannot be practiced on
// (CompiledProblem::defect), until `m` remain; then a seeded shuffle puts
// `test_count` of them in the test set (0: m / 10). Throws Error if fewer than
// m / 2 distinct usable problems turn up.
PracticeSet generate_practice(int m, const DomainSpec& spec, std::uint64_t seed, int test_count = 0,
                              int size_cap = kDefaultSizeCap);

// Best known solution per practice problem.
class Corpus {
 public:
  struct Entry {
    ProgramTree problem;
    ProgramTree solution;
    int round = 0;
  };

  // Stores a score-1 solution if the problem is new or it is shorter than the
  // stored one. Returns whether the corpus changed.
  bool offer(const ProgramTree& problem, const ProgramTree& solution, int round);
  bool contains(const ProgramTree& problem) const;
  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::vector<Sample> samples(const Featurizer& featurizer) const;

 private:
  std::map<std::string, Entry> entries_;  // by problem key
};

struct TrainerSettings {
  SearchMode mode = SearchMode::Sample;
  int candidates = 2000;
  int epochs = 3;
  int size_cap = kDefaultSizeCap;
  double epsilon = kDefaultEpsilon;
  EvalBudget budget;
  TrainConfig model;
  int workers = 1;
  std::uint64_t seed = 1;
};

struct RoundOutcome {
  ModelParams params;
  long long candidates = 0;
  std::string warning;  // set when no practice problem was solved
};

// Algorithm-1-style TRAIN for one round: each epoch searches every practice
// problem with the current parameters, stores successes in the corpus, then
// refits on every corpus sample (warm start). `log` receives one line per
// corpus change.
// `compiled` may hold the practice problems already compiled (same order).
RoundOutcome train_round(Corpus& corpus, const std::vector<ProgramTree>& practice, const ModelParams& previous,
                         const DomainSpec& spec, const Featurizer& featurizer, const TrainerSettings& settings,
                         int round, std::ostream* log = nullptr, std::span<const CompiledProblem> compiled = {});

struct ChallengeOutcome {
  int index = 0;
  std::string domain;
  bool solved = false;
  int candidates = 0;
  double seconds = 0.0;
  std::string solution;  // rendered best candidate
};

struct RoundReport {
  int round = 0;
  std::string domain;
  double practice_frac = 0.0;  // practice problems with a stored solution
  double test_frac = 0.0;
  long long candidates = 0;  // scored this round, practice plus test
  double seconds = 0.0;
  std::vector<ChallengeOutcome> challenges;
};

// Solves each problem by enumeration; returns the solved fraction and adds the
// candidates used to *candidates.
double evaluate(const std::vector<ProgramTree>& problems, const ModelParams& params, const DomainSpec& spec,
                const Featurizer& featurizer, const SolveConfig& solve_cfg, int workers, long long* candidates,
                std::span<const CompiledProblem> compiled = {});

std::vector<CompiledProblem> compile_all(const std::vector<ProgramTree>& problems, const DomainSpec& spec,
                                         int workers = 1);

std::vector<ChallengeOutcome> run_challenges(const std::vector<ChallengeProblem>& challenges,
                                             const ModelParams& params, const DomainSpec& spec,
                                             const Featurizer& featurizer, const SolveConfig& solve_cfg,
                                             bool wall_time);

// Round 0 evaluates the uniform model; rounds 1..R train then evaluate. Writes
// rounds.csv, timing.csv, challenge.csv, corpus.log, config.toml and
// theta_round_<r>.txt into cfg.output.
std::vector<RoundReport> run_pipeline(const RunConfig& cfg,
                                      const std::function<void(const RoundReport&)>& on_round = {});

std::string rounds_csv_header();
std::string rounds_csv_row(const RoundReport& r);

// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);
int resolve_workers(int requested);

}  // namespace glassbox
