#include "glassbox/scorer.hpp"

#include <cmath>
#include <limits>

#include "glassbox/error.hpp"
#include "glassbox/random.hpp"

namespace glassbox {

namespace {

constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

// Generous budget for running the problem itself; problems are trusted code.
EvalBudget problem_budget() { return EvalBudget(100'000, 1'000); }

Value apply_fresh(const Value& fn, const ValueVec& args, const EvalBudget& budget) {
  EvalBudget b = budget.fresh();
  Interpreter in(b);
  return in.apply(fn, args);
}

double numeric_or_nan(const Value& v) {
  if (v.is_bottom() || !v.is_number()) return kUndefined;
  double d = v.to_double();
  return std::isfinite(d) ? d : kUndefined;
}

}  // namespace

CompiledProblem::CompiledProblem(const Expr& problem, std::uint64_t input_seed) { build(problem, input_seed); }

CompiledProblem::CompiledProblem(const ProgramTree& problem, const DomainSpec& spec) {
  build(tree_to_expr(problem, spec.problem_grammar), spec.input_seed);
}

void CompiledProblem::build(const Expr& problem, std::uint64_t input_seed) {
  auto h = harness_of(problem);
  if (!h) throw Error("problem is not wrapped in a scoring harness: " + render(problem));
  harness_ = *h;
  EvalBudget budget = problem_budget();
  objective_ = eval(problem, budget);
  if (!objective_.is_closure()) {
    defect_ = "problem does not evaluate to a function";
    return;
  }

  std::vector<ValueVec> args = harness_inputs(harness_, input_seed);
  Rng order(mix_seed(input_seed, static_cast<std::uint64_t>(harness_)));
  order.shuffle(args);

  bool discriminating = false;
  for (auto& a : args) {
    ProblemInput in;
    in.args = std::move(a);
    switch (optimality()) {
      case Optimality::EnumerateY: {
        in.range = harness_range(harness_, in.args);
        in.best = -std::numeric_limits<double>::infinity();
        bool any = false, all = true;
        for (const Value& y : in.range) {
          ValueVec full = in.args;
          full.push_back(y);
          double s = numeric_or_nan(apply_fresh(objective_, full, budget));
          in.sigma.push_back(s);
          if (std::isnan(s)) {
            all = false;
          } else {
            any = true;
            in.best = std::max(in.best, s);
          }
        }
        in.degenerate = !any;
        if (!all && defect_.empty()) defect_ = "scorer is undefined somewhere on the domain";
        for (double s : in.sigma) discriminating = discriminating || (!std::isnan(s) && s != in.best);
        break;
      }
      case Optimality::ClosedFormMatch: {
        in.target = apply_fresh(objective_, in.args, budget);
        if (std::isnan(numeric_or_nan(in.target))) {
          in.degenerate = true;
          if (defect_.empty()) defect_ = "target is undefined somewhere on the domain";
        }
        discriminating = true;
        break;
      }
      case Optimality::ResidualTolerance: discriminating = true; break;
    }
    inputs_.push_back(std::move(in));
  }
  if (optimality() == Optimality::ResidualTolerance) {
    const ClosureData& d = *objective_.as_closure().data;
    if (d.params.size() != 2 || !free_variables(d.body).count(d.params[1])) defect_ = "equation does not mention y";
  }
  if (!discriminating && defect_.empty()) defect_ = "every output is optimal at every input";
}

bool CompiledProblem::judge(std::size_t i, const Value& out, double* raw) const {
  const ProblemInput& in = inputs_[i];
  switch (optimality()) {
    case Optimality::EnumerateY:
      for (std::size_t j = 0; j < in.range.size(); ++j) {
        if (!out.equals(in.range[j])) continue;
        double s = in.sigma[j];
        if (std::isnan(s)) return false;
        *raw += s;
        return s == in.best;
      }
      return false;
    case Optimality::ResidualTolerance: {
      if (!out.is_number()) return false;
      ValueVec full = in.args;
      full.push_back(out);
      double r = numeric_or_nan(apply_fresh(objective_, full, problem_budget()));
      if (std::isnan(r)) return false;
      *raw -= std::fabs(r);
      return std::fabs(r) <= kRootTolerance;
    }
    case Optimality::ClosedFormMatch: {
      if (!out.is_number()) return false;
      double gap = std::fabs(out.to_double() - in.target.to_double());
      if (!std::isfinite(gap)) return false;
      *raw -= gap;
      if (out.is_int() && in.target.is_int()) return out.as_int() == in.target.as_int();
      return gap <= kSumTolerance;
    }
  }
  return false;
}

ScoreRecord score(const CompiledProblem& problem, const Expr& candidate, const EvalBudget& budget,
                  bool early_stop) {
  ScoreRecord rec;
  EvalBudget b = budget.fresh();
  Value fn = eval(candidate, b);
  if (!fn.is_closure()) {
    rec.score = -1;
    rec.failure_reason = fn.is_bottom() ? fn.bottom_reason() : BottomReason::TypeError;
    rec.bottom_inputs = 1;
    return rec;
  }
  std::optional<int> decided;
  const auto& inputs = problem.inputs();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].degenerate) continue;
    ++rec.inputs_evaluated;
    Value out = apply_fresh(fn, inputs[i].args, budget);
    if (out.is_bottom()) {
      ++rec.bottom_inputs;
      if (!decided) {
        decided = -1;
        rec.failure_reason = out.bottom_reason();
      }
    } else if (!problem.judge(i, out, &rec.raw_total) && !decided) {
      decided = 0;
    }
    if (decided && early_stop) break;
  }
  rec.score = decided.value_or(1);
  return rec;
}

ScoreRecord score(const ProgramTree& problem, const ProgramTree& candidate, const DomainSpec& spec,
                  const EvalBudget& budget) {
  CompiledProblem p(problem, spec);
  return score(p, tree_to_expr(candidate, spec.solution_grammar), budget);
}

bool preferable(const ScoreRecord& a, int size_a, const ScoreRecord& b, int size_b) {
  if (a.score != b.score) return a.score > b.score;
  return size_a < size_b;
}

std::size_t best_index(std::span<const ProgramTree> candidates, std::span<const ScoreRecord> records) {
  if (candidates.empty() || candidates.size() != records.size()) throw Error("best_index: bad candidate set");
  std::size_t best = 0;
  int best_size = tree_size(candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    int size = tree_size(candidates[i]);
    if (preferable(records[i], size, records[best], best_size)) {
      best = i;
      best_size = size;
    }
  }
  return best;
}

std::pair<ProgramTree, ScoreRecord> best_of(const std::vector<ProgramTree>& candidates, const CompiledProblem& problem,
                                            const Grammar& solution_grammar, const EvalBudget& budget) {
  std::vector<ScoreRecord> records;
  records.reserve(candidates.size());
  for (const auto& c : candidates) records.push_back(score(problem, tree_to_expr(c, solution_grammar), budget));
  std::size_t i = best_index(candidates, records);
  return {candidates[i], records[i]};
}

}  // namespace glassbox
