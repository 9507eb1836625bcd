#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "glassbox/domains.hpp"
#include "glassbox/interp.hpp"

namespace glassbox {

struct ScoreRecord {
  int score = -1;  // -1, 0 or 1
  double raw_total = 0.0;
  int inputs_evaluated = 0;
  int bottom_inputs = 0;
  std::optional<BottomReason> failure_reason;
};

inline bool is_success(const ScoreRecord& r) { return r.score == 1; }

// One element of the bounded input domain with everything needed to judge a
// candidate's output there.
struct ProblemInput {
  ValueVec args;               // what the candidate is applied to
  ValueVec range;              // EnumerateY: Y at this input
  std::vector<double> sigma;   // EnumerateY: sigma per element of range, NaN if undefined
  double best = 0.0;           // EnumerateY: max of sigma
  Value target;                // ClosedFormMatch: value to reproduce
  bool degenerate = false;     // sigma undefined on all of Y; skipped
};

// A problem evaluated once against its whole input domain, so that scoring a
// candidate only runs the candidate. Immutable after construction; shareable.
class CompiledProblem {
 public:
  // Throws Error if the problem is not wrapped in a known harness.
  CompiledProblem(const Expr& problem, std::uint64_t input_seed);
  CompiledProblem(const ProgramTree& problem, const DomainSpec& spec);

  Harness harness() const { return harness_; }
  Optimality optimality() const { return optimality_of(harness_); }
  // Why the problem cannot serve as a practice problem; empty if it can.
  // Rejected: scorers undefined somewhere on the domain, scorers under which
  // every output ties at every input, root equations that ignore y.
  const std::string& defect() const { return defect_; }
  bool admissible() const { return defect_.empty(); }
  // Inputs in evaluation order (a fixed shuffle of the canonical order).
  const std::vector<ProblemInput>& inputs() const { return inputs_; }
  const Value& objective() const { return objective_; }

  // Whether `out` is optimal at input i; adds the scorer's value for `out`
  // to *raw.
  bool judge(std::size_t i, const Value& out, double* raw) const;

 private:
  void build(const Expr& problem, std::uint64_t input_seed);

  Harness harness_ = Harness::Ntprog;
  Value objective_;
  std::vector<ProblemInput> inputs_;
  std::string defect_;
};

// Applies the candidate (which must evaluate to a function) to every input in
// order. The first input where it is not optimal decides the score: -1 if the
// candidate produced Bottom there, else 0. No such input: 1. With early_stop
// the scan ends at that input; without it every input is still run (raw_total,
// bottom_inputs then cover the whole domain) but the score is the same.
ScoreRecord score(const CompiledProblem& problem, const Expr& candidate, const EvalBudget& budget = {},
                  bool early_stop = true);
ScoreRecord score(const ProgramTree& problem, const ProgramTree& candidate, const DomainSpec& spec,
                  const EvalBudget& budget = {});

// a strictly preferable to b: higher score, then fewer nodes.
bool preferable(const ScoreRecord& a, int size_a, const ScoreRecord& b, int size_b);
// Index of the best candidate; ties go to the earliest. Requires non-empty.
std::size_t best_index(std::span<const ProgramTree> candidates, std::span<const ScoreRecord> records);
std::pair<ProgramTree, ScoreRecord> best_of(const std::vector<ProgramTree>& candidates, const CompiledProblem& problem,
                                            const Grammar& solution_grammar, const EvalBudget& budget = {});

}  // namespace glassbox
