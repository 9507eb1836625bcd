#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "glassbox/error.hpp"
#include "glassbox/trainer.hpp"

using namespace glassbox;
namespace fs = std::filesystem;

namespace {

const DomainSpec& nt() {
  static const DomainSpec spec = load_domain("number_theory");
  return spec;
}

ProgramTree gcd_problem() { return challenge_problems().front().problem; }

ProgramTree euclid() { return tree_from_key("1,3,2,4,6,5,5,6,5", nt().solution_grammar); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("glassbox_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("practice generation") {
  PracticeSet a = generate_practice(100, nt(), 5);
  CHECK(a.train.size() == 90);
  CHECK(a.test.size() == 10);
  std::set<std::string> keys;
  for (const auto& t : a.train) keys.insert(canonical_key(t));
  for (const auto& t : a.test) keys.insert(canonical_key(t));
  CHECK(keys.size() == 100);
  for (const auto& t : a.train) {
    CHECK(tree_size(t) <= kDefaultSizeCap);
    CHECK(CompiledProblem(t, nt()).admissible());
  }
  PracticeSet b = generate_practice(100, nt(), 5);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  PracticeSet c = generate_practice(100, nt(), 6);
  CHECK(c.train != a.train);
  PracticeSet d = generate_practice(220, load_domain("strings"), 1, 20);
  CHECK(d.train.size() == 200);
  CHECK(d.test.size() == 20);
  CHECK_THROWS_AS(generate_practice(10, nt(), 1, 10), Error);
}

TEST_CASE("practice generation fails on a grammar with few problems") {
  // few distinct problems fit in five nodes
  CHECK_THROWS_AS(generate_practice(500, nt(), 1, 0, 5), Error);
}

TEST_CASE("corpus keeps the shortest solution") {
  const Grammar& g = nt().solution_grammar;
  Corpus corpus;
  ProgramTree p = gcd_problem();
  CHECK_FALSE(corpus.contains(p));
  CHECK(corpus.offer(p, euclid(), 1));
  CHECK(corpus.contains(p));
  ProgramTree longer = tree_from_key("1,3,2,4,6,5,5,6,8,5", g);
  CHECK_FALSE(corpus.offer(p, longer, 2));
  CHECK_FALSE(corpus.offer(p, euclid(), 2));
  ProgramTree shorter = tree_from_key("1,10", g);
  CHECK(corpus.offer(p, shorter, 3));
  CHECK(corpus.size() == 1);
  CHECK(corpus.entries().begin()->second.round == 3);
  Featurizer f(nt().problem_grammar, g);
  CHECK(corpus.samples(f).size() == 2);
}

TEST_CASE("a round trained on the GCD pair ranks rec first at the root") {
  const Grammar& g = nt().solution_grammar;
  Featurizer f(nt().problem_grammar, g);
  Corpus corpus;
  corpus.offer(gcd_problem(), euclid(), 0);
  TrainerSettings s;
  s.candidates = 50;
  s.epochs = 1;
  ModelParams zero = ModelParams::zeros(g.size(), f.dim());
  std::ostringstream log;
  RoundOutcome o = train_round(corpus, {gcd_problem()}, zero, nt(), f, s, 1, &log);
  CHECK(o.warning.empty());
  CHECK(o.candidates == 50);
  RuleDistributions d(gcd_problem(), o.params, f, g, 0.0);
  auto root = d.at(Context::root());
  int r1 = g.find_rule("R1");
  int better = 0;
  for (double p : root) better += p > root[static_cast<std::size_t>(r1)];
  CHECK(better < 3);
}

TEST_CASE("a round without successes leaves the parameters unchanged") {
  const Grammar& g = nt().solution_grammar;
  Featurizer f(nt().problem_grammar, g);
  Corpus corpus;
  TrainerSettings s;
  s.candidates = 20;
  s.epochs = 2;
  ModelParams zero = ModelParams::zeros(g.size(), f.dim());
  RoundOutcome o = train_round(corpus, {gcd_problem()}, zero, nt(), f, s, 1);
  CHECK(corpus.empty());
  CHECK(o.params.weights == zero.weights);
  CHECK(o.params.intercepts == zero.intercepts);
  CHECK_FALSE(o.warning.empty());
  CHECK(o.candidates == 40);
  CHECK_THROWS_AS(train_round(corpus, {}, zero, nt(), f, s, 1), Error);
}

TEST_CASE("corpus only grows across epochs") {
  const Grammar& g = nt().solution_grammar;
  Featurizer f(nt().problem_grammar, g);
  PracticeSet ps = generate_practice(40, nt(), 3);
  Corpus corpus;
  TrainerSettings s;
  s.candidates = 300;
  s.epochs = 1;
  ModelParams params = ModelParams::zeros(g.size(), f.dim());
  std::set<std::string> solved;
  for (int round = 1; round <= 3; ++round) {
    params = train_round(corpus, ps.train, params, nt(), f, s, round).params;
    std::set<std::string> now;
    for (const auto& [key, e] : corpus.entries()) now.insert(key);
    CHECK(std::includes(now.begin(), now.end(), solved.begin(), solved.end()));
    solved = now;
  }
  CHECK_FALSE(solved.empty());
}

TEST_CASE("evaluation counts solved problems") {
  const Grammar& g = nt().solution_grammar;
  Featurizer f(nt().problem_grammar, g);
  // maximize y: the answer is the larger argument
  ProgramTree easy = tree_from_key("1,2,6", nt().problem_grammar);
  SolveConfig sc;
  sc.candidates = 20;
  long long used = 0;
  ModelParams zero = ModelParams::zeros(g.size(), f.dim());
  CHECK(evaluate({gcd_problem()}, zero, nt(), f, sc, 1, &used) == 0.0);
  CHECK(used == 20);
  sc.candidates = 100000;
  CHECK(evaluate({easy, easy}, zero, nt(), f, sc, 2, &used) == 1.0);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hits(100);
  parallel_for(100, 4, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
  CHECK(std::count(hits.begin(), hits.end(), 1) == 100);
  CHECK_THROWS_AS(parallel_for(10, 3, [](int i) {
                    if (i == 7) throw Error("boom");
                  }),
                  Error);
  CHECK(resolve_workers(3) == 3);
  CHECK(resolve_workers(0) >= 1);
}

TEST_CASE("pipeline artifacts are reproducible") {
  RunConfig cfg;
  cfg.domain = "strings";
  cfg.practice = 30;
  cfg.test = 5;
  cfg.rounds = 2;
  cfg.epochs = 1;
  cfg.practice_candidates = 100;
  cfg.eval_candidates = 300;
  cfg.train_epochs = 5;
  cfg.seed = 9;
  fs::path a = scratch("run_a"), b = scratch("run_b");
  cfg.output = a.string();
  cfg.workers = 1;
  auto reports = run_pipeline(cfg);
  cfg.output = b.string();
  cfg.workers = 3;
  run_pipeline(cfg);
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].practice_frac == 0.0);
  CHECK(reports[0].challenges.size() == 2);
  for (const char* name : {"rounds.csv", "challenge.csv", "corpus.log", "config.toml", "theta_round_0.txt",
                           "theta_round_1.txt", "theta_round_2.txt"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(a / name));
    if (std::string(name) != "config.toml") CHECK(slurp(a / name) == slurp(b / name));
  }
  std::string rounds = slurp(a / "rounds.csv");
  CHECK(rounds.rfind("round,domain,practice_frac,test_frac,candidates,seconds\n", 0) == 0);
  CHECK(std::count(rounds.begin(), rounds.end(), '\n') == 4);
  RunConfig back = load_config((a / "config.toml").string());
  CHECK(back.domain == "strings");
  CHECK(back.practice == 30);
  fs::remove_all(a);
  fs::remove_all(b);
}
