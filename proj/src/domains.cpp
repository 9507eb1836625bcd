#include "glassbox/domains.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "glassbox/error.hpp"
#include "glassbox/interp.hpp"
#include "glassbox/random.hpp"

namespace glassbox {

namespace {

ValueVec ints(std::int64_t lo, std::int64_t hi) {
  ValueVec out;
  for (std::int64_t v = lo; v <= hi; ++v) out.emplace_back(v);
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

Grammar load_part(const std::string& data_dir, const std::string& domain, const char* which) {
  return load_grammar(data_dir + "/grammars/" + domain + "_" + which + ".grammar");
}

}  // namespace

std::string_view to_string(Harness h) {
  switch (h) {
    case Harness::Ntprog: return "ntprog";
    case Harness::Ntprog1: return "ntprog1";
    case Harness::Strprog: return "strprog";
    case Harness::Rootprog: return "rootprog";
    case Harness::Sumprog: return "sumprog";
  }
  return "?";
}

Optimality optimality_of(Harness h) {
  switch (h) {
    case Harness::Rootprog: return Optimality::ResidualTolerance;
    case Harness::Sumprog: return Optimality::ClosedFormMatch;
    default: return Optimality::EnumerateY;
  }
}

std::optional<Harness> harness_of(const Expr& problem) {
  if (!problem || problem->kind != ExprKind::Call) return std::nullopt;
  for (Harness h : {Harness::Ntprog, Harness::Ntprog1, Harness::Strprog, Harness::Rootprog, Harness::Sumprog}) {
    if (problem->builtin->name == to_string(h)) return h;
  }
  return std::nullopt;
}

std::vector<ValueVec> harness_inputs(Harness h, std::uint64_t seed) {
  std::vector<ValueVec> out;
  switch (h) {
    case Harness::Ntprog:
      for (std::int64_t m = 1; m <= 20; ++m) {
        for (std::int64_t n = 1; n <= 20; ++n) out.push_back({Value(m), Value(n)});
      }
      break;
    case Harness::Ntprog1:
      for (std::int64_t n = 4; n <= 50; ++n) out.push_back({Value(n)});
      break;
    case Harness::Strprog: {
      Rng rng(seed);
      for (int i = 0; i < 30; ++i) {
        std::string s;
        for (int k = 0; k < 5; ++k) s += static_cast<char>('A' + rng.index(26));
        out.push_back({Value(std::move(s))});
      }
      break;
    }
    case Harness::Rootprog:
      for (int k = 1; k <= 6; ++k) out.push_back({Value(0.5 * k)});
      break;
    case Harness::Sumprog:
      for (std::int64_t n = 1; n <= 30; ++n) out.push_back({Value(n)});
      break;
  }
  return out;
}

ValueVec harness_range(Harness h, const ValueVec& input) {
  switch (h) {
    case Harness::Ntprog: return ints(1, std::max(input.at(0).as_int(), input.at(1).as_int()));
    case Harness::Ntprog1: return ints(1, input.at(0).as_int());
    case Harness::Strprog: {
      ValueVec chars;
      for (char c : input.at(0).as_str()) chars.emplace_back(std::string(1, c));
      return Value::set(std::move(chars)).items();
    }
    default: throw Error(std::string(to_string(h)) + " has no bounded output range");
  }
}

std::string default_data_dir() {
  if (const char* env = std::getenv("GLASSBOX_DATA_DIR")) return env;
#ifdef GLASSBOX_DATA_DIR
  return GLASSBOX_DATA_DIR;
#else
  return "data";
#endif
}

const std::vector<std::string>& domain_names() {
  static const std::vector<std::string> names = {"number_theory", "roots", "sums", "strings"};
  return names;
}

DomainSpec load_domain(std::string_view name, const std::string& data_dir) {
  DomainSpec spec;
  spec.name = std::string(name);
  if (name == "all") {
    std::vector<Grammar> problems, solutions;
    for (const auto& d : domain_names()) {
      problems.push_back(load_part(data_dir, d, "problem"));
      solutions.push_back(load_part(data_dir, d, "solution"));
    }
    std::vector<const Grammar*> p, s;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      p.push_back(&problems[i]);
      s.push_back(&solutions[i]);
    }
    spec.problem_grammar = merge_grammars("all_problem", p);
    spec.solution_grammar = merge_grammars("all_solution", s);
    spec.members = domain_names();
    return spec;
  }
  bool known = false;
  for (const auto& d : domain_names()) known = known || d == name;
  if (!known) throw Error("unknown domain '" + spec.name + "'");
  spec.problem_grammar = load_part(data_dir, spec.name, "problem");
  spec.solution_grammar = load_part(data_dir, spec.name, "solution");
  spec.members = {spec.name};
  return spec;
}

std::vector<ChallengeProblem> challenge_problems(const std::string& data_dir) {
  std::string path = data_dir + "/challenges.txt";
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<ChallengeProblem> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      std::size_t bar = text.find('|', pos);
      if (bar == std::string_view::npos) throw Error(path + ":" + std::to_string(line_no) + ": expected 4 fields");
      fields.emplace_back(trim(text.substr(pos, bar - pos)));
      pos = bar + 1;
    }
    fields.emplace_back(trim(text.substr(pos)));
    ChallengeProblem c;
    c.index = std::stoi(fields[0]);
    c.domain = fields[1];
    Grammar g = load_part(data_dir, c.domain, "problem");
    c.problem = tree_from_key(fields[2], g);
    validate_tree(c.problem, g);
    c.description = fields[3];
    out.push_back(std::move(c));
  }
  if (out.size() != 10) throw Error(path + ": expected 10 challenge problems");
  return out;
}

std::vector<ChallengeProblem> challenge_problems_for(const DomainSpec& spec, const std::string& data_dir) {
  std::vector<ChallengeProblem> out;
  for (auto& c : challenge_problems(data_dir)) {
    bool member = false;
    for (const auto& m : spec.members) member = member || m == c.domain;
    if (!member) continue;
    if (spec.name != c.domain) {
      Grammar own = load_part(data_dir, c.domain, "problem");
      c.problem = remap_tree(c.problem, rule_mapping(own, spec.problem_grammar));
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::optional<Value> known_optimum(const ProgramTree& problem, const ValueVec& input, const DomainSpec& spec) {
  Expr e = tree_to_expr(problem, spec.problem_grammar);
  auto h = harness_of(e);
  if (!h) throw Error("problem is not wrapped in a scoring harness");
  if (*h == Harness::Rootprog) return Value(kRootTolerance);
  EvalBudget budget(100'000, 1'000);
  Value sigma = eval(e, budget);
  if (*h == Harness::Sumprog) {
    Interpreter in(budget);
    Value t = in.apply(sigma, input);
    if (t.is_bottom() || !t.is_number()) return std::nullopt;
    return t;
  }
  std::optional<Value> best;
  for (const Value& y : harness_range(*h, input)) {
    EvalBudget b = budget.fresh();
    Interpreter in(b);
    ValueVec args = input;
    args.push_back(y);
    Value s = in.apply(sigma, args);
    if (s.is_bottom() || !s.is_number()) continue;
    if (!best || s.to_double() > best->to_double()) best = s;
  }
  return best;
}

}  // namespace glassbox
