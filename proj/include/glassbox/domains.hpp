#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glassbox/grammar.hpp"
#include "glassbox/value.hpp"

namespace glassbox {

// Scoring harness a problem is wrapped in; fixes inputs, outputs and what
// counts as optimal.
enum class Harness : std::uint8_t {
  Ntprog,    // sigma(m, n, y), m, n in 1..20, y in 1..max(m, n)
  Ntprog1,   // sigma(n, y), n in 4..50, y in 1..n
  Strprog,   // sigma(x, y), x a random 5-letter uppercase string, y a char of x
  Rootprog,  // f(x, y) = 0 for x in 0.5, 1.0, ..., 3.0
  Sumprog,   // closed form of g(n) for n in 1..30
};

enum class Optimality : std::uint8_t {
  EnumerateY,         // output maximizes sigma over the bounded range Y
  ResidualTolerance,  // |f(x, output)| <= 1e-6
  ClosedFormMatch,    // output equals the problem's own value at n
};

std::string_view to_string(Harness h);
Optimality optimality_of(Harness h);
// Harness named by the outermost call of a problem expression.
std::optional<Harness> harness_of(const Expr& problem);

constexpr double kRootTolerance = 1e-6;
constexpr double kSumTolerance = 1e-9;

// Argument tuples a candidate is applied to, in canonical order.
std::vector<ValueVec> harness_inputs(Harness h, std::uint64_t seed);
// Bounded output range Y at one input (EnumerateY harnesses only).
ValueVec harness_range(Harness h, const ValueVec& input);

struct DomainSpec {
  std::string name;
  Grammar problem_grammar;
  Grammar solution_grammar;
  // Single domains this one is made of; {name} unless name == "all".
  std::vector<std::string> members;
  std::uint64_t input_seed = 20240501;
};

std::string default_data_dir();
const std::vector<std::string>& domain_names();  // the four single domains
// name in domain_names() or "all". Throws Error for anything else.
DomainSpec load_domain(std::string_view name, const std::string& data_dir = default_data_dir());

struct ChallengeProblem {
  int index = 0;
  std::string domain;
  ProgramTree problem;  // over the domain's problem grammar
  std::string description;
};

// The ten hand-written problems, each over its own domain's problem grammar.
std::vector<ChallengeProblem> challenge_problems(const std::string& data_dir = default_data_dir());
// Same problems with trees mapped into `spec`'s problem grammar; those whose
// domain is not part of `spec` are dropped.
std::vector<ChallengeProblem> challenge_problems_for(const DomainSpec& spec,
                                                     const std::string& data_dir = default_data_dir());

// Best attainable score at one input. EnumerateY: max of sigma over Y, or
// nullopt if sigma is undefined on all of Y (degenerate input).
// ResidualTolerance: the tolerance. ClosedFormMatch: the target value.
std::optional<Value> known_optimum(const ProgramTree& problem, const ValueVec& input, const DomainSpec& spec);

}  // namespace glassbox
