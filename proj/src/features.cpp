#include "glassbox/features.hpp"

#include <algorithm>

namespace glassbox {

Featurizer::Featurizer(const Grammar& problem_grammar, const Grammar& solution_grammar)
    : problem_rules_(problem_grammar.size()),
      solution_rules_(solution_grammar.size()),
      max_arity_(solution_grammar.max_arity()) {}

std::vector<double> Featurizer::bag(const ProgramTree& problem) const {
  std::vector<double> counts(static_cast<std::size_t>(problem_rules_), 0.0);
  for (int id : preorder_rules(problem)) counts.at(static_cast<std::size_t>(id)) += 1.0;
  return counts;
}

std::vector<double> Featurizer::featurize(const ProgramTree& problem, const Context& ctx) const {
  std::vector<double> phi = bag(problem);
  phi.resize(static_cast<std::size_t>(dim()), 0.0);
  set_context(phi, ctx);
  return phi;
}

void Featurizer::set_context(std::span<double> phi, const Context& ctx) const {
  auto tail = phi.subspan(static_cast<std::size_t>(problem_rules_));
  std::fill(tail.begin(), tail.end(), 0.0);
  if (ctx.is_root()) return;
  tail[static_cast<std::size_t>(ctx.parent_rule)] = 1.0;
  tail[static_cast<std::size_t>(solution_rules_ + ctx.child_index)] = 1.0;
}

std::vector<Sample> extract_training_samples(const ProgramTree& problem, const ProgramTree& solution,
                                             const Featurizer& featurizer) {
  std::vector<Sample> out;
  std::vector<double> base = featurizer.featurize(problem, Context::root());
  for_each_node(solution, [&](const ProgramTree& node, const Context& ctx) {
    Sample s{base, node.rule};
    featurizer.set_context(s.x, ctx);
    out.push_back(std::move(s));
  });
  return out;
}

}  // namespace glassbox
