#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "glassbox/domains.hpp"
#include "glassbox/error.hpp"
#include "glassbox/model.hpp"
#include "glassbox/random.hpp"

using namespace glassbox;

namespace {

struct Fixture {
  DomainSpec nt = load_domain("number_theory");
  Featurizer f{nt.problem_grammar, nt.solution_grammar};
  ProgramTree gcd = challenge_problems().front().problem;
  ProgramTree euclid = tree_from_key("1,3,2,4,6,5,5,6,5", nt.solution_grammar);
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

std::vector<Sample> random_samples(Rng& rng, int n, int dim, int classes) {
  std::vector<Sample> out;
  for (int i = 0; i < n; ++i) {
    Sample s;
    for (int j = 0; j < dim; ++j) s.x.push_back(std::floor(rng.uniform() * 4));
    s.label = static_cast<int>(rng.index(static_cast<std::size_t>(classes)));
    out.push_back(std::move(s));
  }
  return out;
}

ModelParams random_params(Rng& rng, int classes, int dim) {
  ModelParams p = ModelParams::zeros(classes, dim);
  for (double& w : p.weights) w = rng.uniform() - 0.5;
  for (double& b : p.intercepts) b = rng.uniform() - 0.5;
  return p;
}

}  // namespace

TEST_CASE("GCD bag of rules") {
  const auto& f = fx();
  std::vector<double> phi = f.f.featurize(f.gcd, Context::root());
  CHECK(f.f.dim() == f.nt.problem_grammar.size() + f.nt.solution_grammar.size() + 3);
  REQUIRE(static_cast<int>(phi.size()) == f.f.dim());
  std::map<std::string, double> expected = {{"W1", 1}, {"W2", 1}, {"W3", 2}, {"W4", 2},
                                            {"W5", 1}, {"W6", 3}, {"W7", 1}, {"W9", 2}};
  double total = 0;
  for (const Rule& r : f.nt.problem_grammar.rules()) {
    double want = expected.count(r.label) ? expected[r.label] : 0.0;
    CHECK_MESSAGE(phi[static_cast<std::size_t>(r.id)] == want, r.label);
    total += phi[static_cast<std::size_t>(r.id)];
  }
  CHECK(total == tree_size(f.gcd));
  for (int j = f.f.problem_rules(); j < f.f.dim(); ++j) CHECK(phi[static_cast<std::size_t>(j)] == 0.0);
}

TEST_CASE("context segments") {
  const auto& f = fx();
  std::vector<double> phi = f.f.featurize(f.gcd, Context{0, 0});
  int P = f.f.problem_rules(), S = f.f.solution_rules();
  for (int j = P; j < f.f.dim(); ++j) {
    bool on = j == P + 0 || j == P + S + 0;
    CHECK(phi[static_cast<std::size_t>(j)] == (on ? 1.0 : 0.0));
  }
  phi = f.f.featurize(f.gcd, Context{2, 2});
  CHECK(phi[static_cast<std::size_t>(P + 2)] == 1.0);
  CHECK(phi[static_cast<std::size_t>(P + S + 2)] == 1.0);
}

TEST_CASE("training samples from a solution") {
  const auto& f = fx();
  auto samples = extract_training_samples(f.gcd, f.euclid, f.f);
  REQUIRE(samples.size() == 9);
  std::vector<std::string> labels;
  for (const auto& s : samples) labels.push_back(f.nt.solution_grammar.rule(s.label).label);
  CHECK(labels == std::vector<std::string>{"R1", "R3", "R2", "R4", "R6", "R5", "R5", "R6", "R5"});
  CHECK(samples[0].x == f.f.featurize(f.gcd, Context::root()));
  CHECK(samples[1].x == f.f.featurize(f.gcd, Context{0, 0}));
  auto single = extract_training_samples(f.gcd, ProgramTree{f.nt.solution_grammar.find_rule("R10"), {}}, f.f);
  REQUIRE(single.size() == 1);
  CHECK(single[0].x == f.f.featurize(f.gcd, Context::root()));
}

TEST_CASE("predict") {
  ModelParams zero = ModelParams::zeros(5, 3);
  auto p = predict(zero, std::vector<double>{1, 2, 3});
  for (double v : p) CHECK(v == doctest::Approx(0.2));
  Rng rng(3);
  ModelParams r = random_params(rng, 7, 4);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x{rng.uniform() * 10, -rng.uniform(), 3, 0};
    auto q = predict(r, x);
    double total = 0;
    for (double v : q) {
      CHECK(v >= 0);
      total += v;
    }
    CHECK(std::fabs(total - 1.0) <= 1e-12);
    // shift invariance: add the same vector to every class row
    ModelParams shifted = r;
    for (int c = 0; c < 7; ++c)
      for (int j = 0; j < 4; ++j) shifted.w(c, j) += 0.3 * (j + 1);
    auto q2 = predict(shifted, x);
    for (std::size_t c = 0; c < q.size(); ++c) CHECK(std::fabs(q[c] - q2[c]) <= 1e-12);
  }
  CHECK_THROWS_AS(predict(zero, std::vector<double>{1, 2}), Error);
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(11);
  const double h = 1e-6;
  double worst = 0;
  for (int draw = 0; draw < 10; ++draw) {
    ModelParams p = random_params(rng, 4, 5);
    auto samples = random_samples(rng, 6, 5, 4);
    ModelParams grad;
    objective(p, samples, 1e-2, &grad);
    auto check = [&](double& slot, double analytic) {
      double keep = slot;
      slot = keep + h;
      double up = objective(p, samples, 1e-2);
      slot = keep - h;
      double down = objective(p, samples, 1e-2);
      slot = keep;
      double numeric = (up - down) / (2 * h);
      double rel = std::fabs(numeric - analytic) / std::max(1e-8, std::fabs(numeric) + std::fabs(analytic));
      worst = std::max(worst, rel);
    };
    for (std::size_t i = 0; i < p.weights.size(); ++i) check(p.weights[i], grad.weights[i]);
    for (std::size_t i = 0; i < p.intercepts.size(); ++i) check(p.intercepts[i], grad.intercepts[i]);
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("training") {
  const auto& f = fx();
  int C = f.f.solution_rules();
  int R4 = f.nt.solution_grammar.find_rule("R4");
  std::vector<double> phi = f.f.featurize(f.gcd, Context{0, 0});
  std::vector<Sample> same(1000, Sample{phi, R4});
  TrainConfig cfg;
  ModelParams fit = train(same, C, cfg);
  auto p = predict(fit, phi);
  CHECK(std::max_element(p.begin(), p.end()) - p.begin() == R4);

  // separable: class is which of two coordinates is set
  std::vector<Sample> sep;
  for (int i = 0; i < 50; ++i) {
    sep.push_back({{1.0, 0.0, static_cast<double>(i % 3)}, 0});
    sep.push_back({{0.0, 1.0, static_cast<double>(i % 3)}, 1});
  }
  ModelParams m = train(sep, 2, cfg);
  int right = 0;
  for (const auto& s : sep) {
    auto q = predict(m, s.x);
    right += (q[static_cast<std::size_t>(s.label)] > 0.5);
  }
  CHECK(right == 100);

  // deterministic given the seed
  CHECK(train(sep, 2, cfg) == m);
  TrainConfig other = cfg;
  other.seed = 2;
  CHECK_FALSE(train(sep, 2, other) == m);

  // strong regularization: weights vanish, intercepts give the class prior
  std::vector<Sample> skewed;
  for (int i = 0; i < 40; ++i) skewed.push_back({{1.0, static_cast<double>(i % 2)}, i < 30 ? 0 : 1});
  TrainConfig heavy = cfg;
  heavy.l2 = 5.0;
  heavy.learning_rate = 0.05;
  heavy.epochs = 400;
  ModelParams reg = train(skewed, 2, heavy);
  for (double w : reg.weights) CHECK(std::fabs(w) < 0.05);
  CHECK(predict(reg, std::vector<double>{0, 0})[0] == doctest::Approx(0.75).epsilon(0.03));

  CHECK_THROWS_AS(train(std::vector<Sample>{}, 2, cfg), Error);
  CHECK_THROWS_AS(train(std::vector<Sample>{{{1.0}, 5}}, 2, cfg), Error);
}

TEST_CASE("training loss does not increase across epochs at a small step") {
  Rng rng(5);
  auto samples = random_samples(rng, 200, 6, 4);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].label = static_cast<int>(samples[i].x[0]) % 4;
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 1;
  ModelParams p = ModelParams::zeros(4, 6);
  double prev = objective(p, samples, cfg.l2);
  for (int e = 0; e < 15; ++e) {
    cfg.seed = static_cast<std::uint64_t>(e);
    p = train(samples, 4, cfg, &p);
    double now = objective(p, samples, cfg.l2);
    CHECK(now <= prev + 1e-12);
    prev = now;
  }
}

TEST_CASE("smoothing") {
  std::vector<double> d{0.7, 0.2, 0.1, 0.0};
  CHECK(smoothed(d, 0.0) == d);
  for (double v : smoothed(d, 1.0)) CHECK(v == doctest::Approx(0.25));
  std::vector<double> u(4, 0.25);
  for (double v : smoothed(u, 0.05)) CHECK(v == doctest::Approx(0.25));
  double total = 0;
  for (double v : smoothed(d, 0.05)) total += v;
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("parameter files") {
  Rng rng(9);
  ModelParams p = random_params(rng, 6, 4);
  p.grammar_hash = 0xdeadbeefcafef00dULL;
  CHECK(params_from_text(params_to_text(p)) == p);
  auto path = (std::filesystem::temp_directory_path() / "glassbox_params_test.txt").string();
  save_params(p, path);
  CHECK(load_params(path, p.grammar_hash) == p);
  CHECK_THROWS_AS(load_params(path, 1234), Error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_params(path), Error);
  CHECK_THROWS_AS(params_from_text("glassbox-model 2\n"), Error);
  const auto& f = fx();
  CHECK(grammar_pair_hash(f.nt.problem_grammar, f.nt.solution_grammar) !=
        grammar_pair_hash(f.nt.solution_grammar, f.nt.problem_grammar));
}
