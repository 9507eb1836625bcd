#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "glassbox/error.hpp"
#include "glassbox/parse.hpp"
#include "glassbox/scorer.hpp"

using namespace glassbox;

namespace {

const DomainSpec& domain(const std::string& name) {
  static std::map<std::string, DomainSpec> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, load_domain(name)).first;
  return it->second;
}

const ChallengeProblem& challenge(int index) {
  static const auto all = challenge_problems();
  return all.at(static_cast<std::size_t>(index - 1));
}

CompiledProblem compiled_challenge(int index) {
  const auto& c = challenge(index);
  return CompiledProblem(c.problem, domain(c.domain));
}

ScoreRecord score_source(const CompiledProblem& p, const char* src) { return score(p, parse_expr(src)); }

}  // namespace

TEST_CASE("domains load") {
  const DomainSpec& nt = domain("number_theory");
  for (int i = 1; i <= 10; ++i) CHECK(nt.problem_grammar.find_rule("W" + std::to_string(i)) >= 0);
  for (int i = 1; i <= 16; ++i) CHECK(nt.solution_grammar.find_rule("R" + std::to_string(i)) >= 0);
  CHECK_THROWS_AS(load_domain("chemistry"), Error);

  const DomainSpec& all = domain("all");
  for (const auto& name : domain_names()) {
    const DomainSpec& d = domain(name);
    for (int id : rule_mapping(d.solution_grammar, all.solution_grammar)) CHECK(id >= 0);
    for (int id : rule_mapping(d.problem_grammar, all.problem_grammar)) CHECK(id >= 0);
  }
}

TEST_CASE("input domains") {
  auto a = harness_inputs(Harness::Strprog, 7);
  auto b = harness_inputs(Harness::Strprog, 7);
  REQUIRE(a.size() == 30);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(identical(a[i][0], b[i][0]));
    const std::string& s = a[i][0].as_str();
    CHECK(s.size() == 5);
    for (char c : s) CHECK((c >= 'A' && c <= 'Z'));
  }
  CHECK_FALSE(identical(harness_inputs(Harness::Strprog, 8)[0][0], a[0][0]));
  CHECK(harness_inputs(Harness::Ntprog, 0).size() == 400);
  CHECK(harness_inputs(Harness::Ntprog1, 0).size() == 47);
  CHECK(harness_inputs(Harness::Rootprog, 0).size() == 6);
  CHECK(harness_inputs(Harness::Sumprog, 0).size() == 30);
  CHECK(harness_range(Harness::Strprog, {Value("BUBQJ")}).size() == 4);
}

TEST_CASE("challenge problems render to their scorers") {
  const char* expected[] = {
      "ntprog(lambda m, n, y: (-mod(m, y) or (-mod(n, y) or y)))",
      "ntprog1(lambda n, y: (-mod(n, y) or (y if (y < n) else 0)))",
      "strprog(lambda x, y: count(x, y))",
      "strprog(lambda x, y: -ord(y))",
      "rootprog(lambda x, y: (log(y) - ((x * x) / 2)))",
      "rootprog(lambda x, y: (y + (pow(x, (2 * 2)) / 2)))",
      "sumprog(lambda n: sum1(1, n, lambda i: (i * i)))",
      "sumprog(lambda n: sum1(1, n, lambda i: (i * (i * i))))",
      "sumprog(lambda n: sum1(1, n, lambda i: pow(2, -i)))",
      "sumprog(lambda n: sum1(1, n, lambda i: (1 / (i * (1 + i)))))",
  };
  for (int i = 1; i <= 10; ++i) {
    const auto& c = challenge(i);
    CHECK(c.index == i);
    const Grammar& g = domain(c.domain).problem_grammar;
    CHECK_NOTHROW(validate_tree(c.problem, g));
    CHECK(render(tree_to_expr(c.problem, g)) == expected[i - 1]);
    CHECK(compiled_challenge(i).admissible());
  }
  auto in_all = challenge_problems_for(domain("all"));
  CHECK(in_all.size() == 10);
  CHECK(render(tree_to_expr(in_all[0].problem, domain("all").problem_grammar)) == expected[0]);
  CHECK(challenge_problems_for(domain("strings")).size() == 2);
}

TEST_CASE("known optimum") {
  const auto& gcd = challenge(1).problem;
  const DomainSpec& nt = domain("number_theory");
  for (std::int64_t m = 1; m <= 20; ++m) {
    for (std::int64_t n = 1; n <= 20; ++n) {
      auto best = known_optimum(gcd, {Value(m), Value(n)}, nt);
      REQUIRE(best);
      CHECK(best->to_int() == std::gcd(m, n));
    }
  }
  CHECK(known_optimum(challenge(3).problem, {Value("BUBQJ")}, domain("strings"))->to_int() == 2);
  CHECK(known_optimum(challenge(7).problem, {Value(4)}, domain("sums"))->to_int() == 30);
  CHECK(known_optimum(challenge(5).problem, {Value(1.0)}, domain("roots"))->to_double() == kRootTolerance);
}

TEST_CASE("GCD scoring") {
  CompiledProblem p = compiled_challenge(1);
  const Grammar& g = domain("number_theory").solution_grammar;
  ProgramTree euclid = tree_from_key("1,3,2,4,6,5,5,6,5", g);
  ScoreRecord ok = score(p, tree_to_expr(euclid, g));
  CHECK(ok.score == 1);
  CHECK(ok.inputs_evaluated == 400);
  // raw total is the sum of gcds, computed independently
  double gcd_sum = 0;
  for (int m = 1; m <= 20; ++m)
    for (int n = 1; n <= 20; ++n) gcd_sum += std::gcd(m, n);
  CHECK(ok.raw_total == gcd_sum);

  ScoreRecord crash = score_source(p, "lower(1)");
  CHECK(crash.score == -1);
  CHECK(crash.failure_reason == BottomReason::TypeError);

  ScoreRecord one = score_source(p, "rec(lambda m, n: 1)");
  CHECK(one.score == 0);
  CHECK(score(p, parse_expr("rec(lambda m, n: 1)"), {}, false).inputs_evaluated == 400);

  CHECK(score_source(p, "1").score == -1);                            // not a function
  CHECK(score_source(p, "rec(lambda m: m)").score == -1);             // wrong arity
  CHECK(score_source(p, "rec(lambda m, n: callrec(m, n))").score == -1);  // never returns
  CHECK(score_source(p, "rec(lambda m, n: 0)").score == 0);           // 0 is outside Y
  CHECK(score_source(p, "rec(lambda m, n: (m, n))").score == 0);
  // Python-equal floats count as the same output
  CHECK(score_source(p, "lambda m, n: (callrec(mod(n, m), m) if n else m) + 0.0").score == -1);
}

TEST_CASE("score is decided by the first non-optimal input") {
  CompiledProblem p = compiled_challenge(1);
  // Euclid that crashes once m reaches 20
  const char* src = "rec(lambda m, n: (log(0) if (19 < m) else (callrec(mod(n, m), m) if n else m)))";
  ScoreRecord early = score_source(p, src);
  ScoreRecord full = score(p, parse_expr(src), {}, false);
  CHECK(early.score == -1);
  CHECK(full.score == -1);
  CHECK(full.bottom_inputs == 20);
  CHECK(early.inputs_evaluated <= full.inputs_evaluated);
}

TEST_CASE("other domains") {
  CHECK(score_source(compiled_challenge(2), "rec(lambda n: n)").score == 0);
  CompiledProblem freq = compiled_challenge(3);
  CHECK(score_source(freq, "lambda x: max(x, key=x.count)").score == 1);
  CHECK(score_source(freq, "lambda x: x[0]").score == 0);
  CompiledProblem first = compiled_challenge(4);
  CHECK(score_source(first, "lambda x: min(x)").score == 1);
  CHECK(score_source(first, "lambda x: max(x)").score == 0);
  CHECK(score_source(compiled_challenge(5), "lambda x: exp(((x * x) / 2))").score == 1);
  CHECK(score_source(compiled_challenge(5), "lambda x: exp(x)").score == 0);
  CHECK(score_source(compiled_challenge(6), "lambda x: -(pow(x, (2 * 2)) / 2)").score == 1);
  CompiledProblem sq = compiled_challenge(7);
  CHECK(score_source(sq, "lambda n: (((n * (n + 1)) * ((2 * n) + 1)) / (2 * (2 + 1)))").score == 1);
  CHECK(score_source(sq, "lambda n: (n * n)").score == 0);
  CHECK(score_source(compiled_challenge(8), "lambda n: pow(((n * (n + 1)) / 2), 2)").score == 1);
  CHECK(score_source(compiled_challenge(9), "lambda n: (1 - pow(2, -n))").score == 1);
  CHECK(score_source(compiled_challenge(10), "lambda n: (n / (n + 1))").score == 1);
}

TEST_CASE("most frequent character against a direct count") {
  CompiledProblem freq = compiled_challenge(3);
  for (const auto& in : freq.inputs()) {
    const std::string& s = in.args[0].as_str();
    int best = 0;
    for (char c : s) best = std::max<int>(best, static_cast<int>(std::count(s.begin(), s.end(), c)));
    CHECK(in.best == best);
  }
}

TEST_CASE("inadmissible practice problems") {
  auto compile = [](const char* src) { return CompiledProblem(parse_expr(src), 1); };
  CHECK_FALSE(compile("ntprog(lambda m, n, y: m)").admissible());
  CHECK_FALSE(compile("ntprog1(lambda n, y: (m or y))").admissible());
  CHECK_FALSE(compile("rootprog(lambda x, y: (x - 1))").admissible());
  CHECK_FALSE(compile("sumprog(lambda n: sum1(1, n, lambda i: (1 / (i - 1))))").admissible());
  CHECK_FALSE(compile("strprog(lambda x, y: x.count(y.lower()))").admissible());
  CHECK(compile("ntprog(lambda m, n, y: -y)").admissible());
  CHECK_THROWS_AS(compile("lambda m, n, y: y"), Error);
}

TEST_CASE("best_of prefers score, then size, then order") {
  const Grammar& g = domain("number_theory").solution_grammar;
  CompiledProblem p = compiled_challenge(1);
  ProgramTree euclid = tree_from_key("1,3,2,4,6,5,5,6,5", g);
  ProgramTree longer = tree_from_source("rec(lambda m, n: (callrec(mod(n, m), m) if n else abs(m)))", g);
  auto [t, r] = best_of({longer, euclid}, p, g);
  CHECK(t == euclid);
  CHECK(r.score == 1);
  ProgramTree crash = tree_from_source("rec(lambda m, n: log(0))", g);
  ProgramTree zero = tree_from_source("rec(lambda m, n: 1)", g);
  CHECK(best_of({crash, zero}, p, g).first == zero);
  CHECK(best_of({crash}, p, g).first == crash);
  ProgramTree m_only = tree_from_source("rec(lambda m, n: m)", g);
  ProgramTree n_only = tree_from_source("rec(lambda m, n: n)", g);
  CHECK(best_of({m_only, n_only}, p, g).first == m_only);
  CHECK(best_of({n_only, m_only}, p, g).first == n_only);
}
