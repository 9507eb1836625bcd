#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "glassbox/features.hpp"
#include "glassbox/model.hpp"
#include "glassbox/random.hpp"
#include "glassbox/scorer.hpp"

namespace glassbox {

constexpr int kDefaultSizeCap = 20;
constexpr double kDefaultEpsilon = 0.05;

// Rule distribution at every context of the solution grammar for one problem:
// the model's prediction restricted to rules that can fill the context's
// nonterminal, renormalized, then mixed with eps of the uniform distribution
// over those rules.
class RuleDistributions {
 public:
  RuleDistributions(const ProgramTree& problem, const ModelParams& params, const Featurizer& featurizer,
                    const Grammar& solution_grammar, double eps = kDefaultEpsilon);
  // Uniform over the admissible rules of every context.
  static RuleDistributions uniform(const Grammar& solution_grammar);
  // From an arbitrary per-context distribution (then masked and smoothed).
  static RuleDistributions from_function(const Grammar& solution_grammar, const ContextDistribution& dist,
                                         double eps = 0.0);

  int context_count() const { return static_cast<int>(probs_.size()); }
  int context_id(const Context& ctx) const {
    return ctx.is_root() ? 0 : 1 + ctx.parent_rule * arity_ + ctx.child_index;
  }
  std::span<const double> probs(int context_id) const { return probs_[static_cast<std::size_t>(context_id)]; }
  std::span<const double> log_probs(int context_id) const { return logs_[static_cast<std::size_t>(context_id)]; }
  std::span<const double> at(const Context& ctx) const { return probs(context_id(ctx)); }
  ContextDistribution as_function() const;
  const Grammar& grammar() const { return *grammar_; }

 private:
  explicit RuleDistributions(const Grammar& g);
  void finish(std::size_t ctx, std::vector<double> raw, double eps);

  const Grammar* grammar_;
  int arity_;
  std::vector<std::vector<double>> probs_;
  std::vector<std::vector<double>> logs_;
};

// Top-down, depth-first, left-to-right sampling. nullopt if the tree would
// exceed `cap` nodes.
std::optional<ProgramTree> sample_tree(const RuleDistributions& dists, Rng& rng, int cap = kDefaultSizeCap);

// Complete trees in non-increasing log-probability, each at most once; equal
// log-probabilities come out in ascending canonical_key order. Best-first over
// partial derivations (expanded leftmost hole first) ranked by log-probability
// so far plus, for every open hole, the log-probability of the most likely
// subtree that could fill it. Siblings are generated lazily, in rank order.
class Enumerator {
 public:
  Enumerator(const RuleDistributions& dists, int cap = kDefaultSizeCap);

  std::optional<ProgramTree> next();
  double last_log_probability() const { return last_logp_; }
  std::size_t states_created() const { return states_.size(); }

 private:
  struct HoleNode {
    int context;
    int next;  // -1 ends the list
  };
  struct State {
    int parent;  // -1 for the empty derivation
    int rule;
    int holes;     // head of the hole list, leftmost hole first
    int size;      // nodes placed
    int min_left;  // minimum nodes still needed for the open holes
    double logp;
    double bound;  // sum of best completions over open holes
  };
  struct Entry {
    double priority;
    std::uint64_t seq;
    int state;  // Expand: parent state; Complete: the complete state
    int rank;   // Expand: which rule of the ranked list; -1 for Complete
    std::shared_ptr<const std::string> key;
  };
  struct Worse {
    bool operator()(const Entry& a, const Entry& b) const;
  };

  void push_expand(int state, int rank);
  ProgramTree materialize(int state) const;

  const RuleDistributions& dists_;
  const Grammar& g_;
  int cap_;
  std::vector<double> best_;                 // per context: best completion log-prob
  std::vector<std::vector<int>> ranked_;     // per context: admissible rules, best first
  std::vector<std::vector<double>> value_;   // per context: rank value of each ranked rule
  std::vector<int> ctx_min_;                 // per context: min subtree size
  std::vector<State> states_;
  std::vector<HoleNode> holes_;
  std::priority_queue<Entry, std::vector<Entry>, Worse> heap_;
  std::uint64_t seq_ = 0;
  double last_logp_ = 0.0;
};

std::vector<ProgramTree> enumerate_top(const RuleDistributions& dists, int k, int cap = kDefaultSizeCap);
std::vector<ProgramTree> enumerate_top(const ProgramTree& problem, const ModelParams& params,
                                       const Featurizer& featurizer, const Grammar& solution_grammar, int k,
                                       int cap = kDefaultSizeCap, double eps = kDefaultEpsilon);

enum class SearchMode { Enumerate, Sample };

struct SolveConfig {
  SearchMode mode = SearchMode::Enumerate;
  int candidates = 20'000;
  int size_cap = kDefaultSizeCap;
  double epsilon = kDefaultEpsilon;
  EvalBudget budget;
  std::uint64_t seed = 1;  // sampling mode only
  int workers = 1;         // scoring threads
  int batch = 256;         // candidates scored per parallel round
};

struct SolveResult {
  ProgramTree best;
  ScoreRecord record;
  int candidates_used = 0;  // up to and including the first success
  bool has_candidate = false;
  bool solved() const { return record.score == 1; }
};

// Scores candidates in generation order and stops at the first score-1
// candidate. Returns the best candidate seen (score, then size, then order).
SolveResult solve(const CompiledProblem& problem, const RuleDistributions& dists, const SolveConfig& cfg);
SolveResult solve(const CompiledProblem& problem, const ProgramTree& problem_tree, const ModelParams& params,
                  const Featurizer& featurizer, const Grammar& solution_grammar, const SolveConfig& cfg);

}  // namespace glassbox
