#pragma once

#include <span>
#include <vector>

#include "glassbox/grammar.hpp"

namespace glassbox {

// phi(problem, context) = [bag of problem rules | parent rule one-hot |
// child index one-hot], width |P| + |S| + max arity of S.
class Featurizer {
 public:
  Featurizer(const Grammar& problem_grammar, const Grammar& solution_grammar);

  int dim() const { return problem_rules_ + solution_rules_ + max_arity_; }
  int problem_rules() const { return problem_rules_; }
  int solution_rules() const { return solution_rules_; }
  int max_arity() const { return max_arity_; }

  // Occurrence count of every problem rule.
  std::vector<double> bag(const ProgramTree& problem) const;
  std::vector<double> featurize(const ProgramTree& problem, const Context& ctx) const;
  // Overwrites the context segments of a vector that already holds the bag.
  void set_context(std::span<double> phi, const Context& ctx) const;

 private:
  int problem_rules_;
  int solution_rules_;
  int max_arity_;
};

struct Sample {
  std::vector<double> x;
  int label = 0;
};

// One sample per node of the solution: the node's rule, featurized at the
// node's context.
std::vector<Sample> extract_training_samples(const ProgramTree& problem, const ProgramTree& solution,
                                             const Featurizer& featurizer);

}  // namespace glassbox
