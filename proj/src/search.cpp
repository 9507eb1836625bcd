#include "glassbox/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "glassbox/error.hpp"

namespace glassbox {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Added to partial-derivation priorities so rounding in the bound can never
// let a partial sort below a complete tree it could still beat or tie.
constexpr double kBoundSlack = 1e-9;

}  // namespace

RuleDistributions::RuleDistributions(const Grammar& g)
    : grammar_(&g), arity_(std::max(1, g.max_arity())) {
  std::size_t n = 1 + static_cast<std::size_t>(g.size()) * static_cast<std::size_t>(arity_);
  probs_.resize(n);
  logs_.resize(n);
}

RuleDistributions::RuleDistributions(const ProgramTree& problem, const ModelParams& params,
                                     const Featurizer& featurizer, const Grammar& solution_grammar, double eps)
    : RuleDistributions(solution_grammar) {
  if (params.classes != solution_grammar.size() || params.dim != featurizer.dim()) {
    throw Error("model shape does not match the grammar pair");
  }
  std::vector<double> phi = featurizer.featurize(problem, Context::root());
  std::vector<double> out(static_cast<std::size_t>(params.classes));
  auto fill = [&](const Context& ctx) {
    featurizer.set_context(phi, ctx);
    predict_into(params, phi, out);
    finish(static_cast<std::size_t>(context_id(ctx)), out, eps);
  };
  fill(Context::root());
  for (const Rule& r : solution_grammar.rules()) {
    for (int i = 0; i < r.arity(); ++i) fill({r.id, i});
  }
}

RuleDistributions RuleDistributions::uniform(const Grammar& solution_grammar) {
  std::vector<double> ones(static_cast<std::size_t>(solution_grammar.size()), 1.0);
  return from_function(solution_grammar, [&](const Context&) { return std::span<const double>(ones); });
}

RuleDistributions RuleDistributions::from_function(const Grammar& solution_grammar, const ContextDistribution& dist,
                                                   double eps) {
  RuleDistributions d(solution_grammar);
  auto fill = [&](const Context& ctx) {
    auto p = dist(ctx);
    d.finish(static_cast<std::size_t>(d.context_id(ctx)), std::vector<double>(p.begin(), p.end()), eps);
  };
  fill(Context::root());
  for (const Rule& r : solution_grammar.rules()) {
    for (int i = 0; i < r.arity(); ++i) fill({r.id, i});
  }
  return d;
}

void RuleDistributions::finish(std::size_t ctx, std::vector<double> raw, double eps) {
  const Grammar& g = *grammar_;
  if (raw.size() != static_cast<std::size_t>(g.size())) throw Error("distribution has the wrong number of rules");
  Context c = ctx == 0 ? Context::root()
                       : Context{static_cast<int>((ctx - 1) / static_cast<std::size_t>(arity_)),
                                 static_cast<int>((ctx - 1) % static_cast<std::size_t>(arity_))};
  const auto& valid = g.rules_for(g.nonterminal_at(c));
  double total = 0.0;
  for (int r : valid) {
    double v = raw[static_cast<std::size_t>(r)];
    if (std::isfinite(v) && v > 0.0) total += v;
  }
  std::vector<double> p(raw.size(), 0.0);
  double share = 1.0 / static_cast<double>(valid.size());
  for (int r : valid) {
    double v = raw[static_cast<std::size_t>(r)];
    double q = total > 0.0 ? (std::isfinite(v) && v > 0.0 ? v / total : 0.0) : share;
    p[static_cast<std::size_t>(r)] = (1.0 - eps) * q + eps * share;
  }
  std::vector<double> l(p.size());
  for (std::size_t r = 0; r < p.size(); ++r) l[r] = p[r] > 0.0 ? std::log(p[r]) : kNegInf;
  probs_[ctx] = std::move(p);
  logs_[ctx] = std::move(l);
}

ContextDistribution RuleDistributions::as_function() const {
  return [this](const Context& ctx) { return at(ctx); };
}

std::optional<ProgramTree> sample_tree(const RuleDistributions& dists, Rng& rng, int cap) {
  const Grammar& g = dists.grammar();
  int placed = 0;
  bool overflow = false;
  auto draw = [&](auto& self, const Context& ctx) -> ProgramTree {
    ProgramTree node;
    if (++placed > cap) {
      overflow = true;
      return node;
    }
    auto p = dists.at(ctx);
    double u = rng.uniform();
    const auto& valid = g.rules_for(g.nonterminal_at(ctx));
    int chosen = valid.back();
    double acc = 0.0;
    for (int r : valid) {
      acc += p[static_cast<std::size_t>(r)];
      if (u < acc) {
        chosen = r;
        break;
      }
    }
    node.rule = chosen;
    const Rule& rule = g.rule(chosen);
    for (int i = 0; i < rule.arity() && !overflow; ++i) node.children.push_back(self(self, Context{chosen, i}));
    return node;
  };
  ProgramTree t = draw(draw, Context::root());
  if (overflow) return std::nullopt;
  return t;
}

Enumerator::Enumerator(const RuleDistributions& dists, int cap) : dists_(dists), g_(dists.grammar()), cap_(cap) {
  std::size_t n = static_cast<std::size_t>(dists.context_count());
  best_.assign(n, kNegInf);
  ranked_.resize(n);
  value_.resize(n);
  ctx_min_.assign(n, 0);
  std::vector<int> used{0};
  for (const Rule& r : g_.rules()) {
    for (int i = 0; i < r.arity(); ++i) used.push_back(dists.context_id({r.id, i}));
  }
  auto ctx_of = [&](int id) {
    for (const Rule& r : g_.rules()) {
      for (int i = 0; i < r.arity(); ++i) {
        if (dists.context_id({r.id, i}) == id) return Context{r.id, i};
      }
    }
    return Context::root();
  };
  std::vector<Context> ctxs(n);
  for (int id : used) {
    ctxs[static_cast<std::size_t>(id)] = ctx_of(id);
    ctx_min_[static_cast<std::size_t>(id)] = g_.min_size(g_.nonterminal_at(ctxs[static_cast<std::size_t>(id)]));
  }
  // Log-probability of the most likely subtree from each context: a fixed
  // point, reached because every factor is at most zero.
  auto rule_value = [&](int id, int r) {
    double v = dists.log_probs(id)[static_cast<std::size_t>(r)];
    for (int i = 0; i < g_.rule(r).arity() && v > kNegInf; ++i) {
      v += best_[static_cast<std::size_t>(dists.context_id({r, i}))];
    }
    return v;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (int id : used) {
      double b = kNegInf;
      for (int r : g_.rules_for(g_.nonterminal_at(ctxs[static_cast<std::size_t>(id)]))) {
        b = std::max(b, rule_value(id, r));
      }
      if (b > best_[static_cast<std::size_t>(id)]) {
        best_[static_cast<std::size_t>(id)] = b;
        changed = true;
      }
    }
  }
  for (int id : used) {
    auto& ranked = ranked_[static_cast<std::size_t>(id)];
    auto& values = value_[static_cast<std::size_t>(id)];
    std::vector<std::pair<double, int>> order;
    for (int r : g_.rules_for(g_.nonterminal_at(ctxs[static_cast<std::size_t>(id)]))) {
      double v = rule_value(id, r);
      if (v > kNegInf) order.emplace_back(v, r);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [v, r] : order) {
      values.push_back(v);
      ranked.push_back(r);
    }
  }
  holes_.push_back({0, -1});
  states_.push_back({-1, -1, 0, 0, ctx_min_[0], 0.0, best_[0]});
  if (best_[0] > kNegInf) push_expand(0, 0);
}

bool Enumerator::Worse::operator()(const Entry& a, const Entry& b) const {
  if (a.priority != b.priority) return a.priority < b.priority;
  bool a_complete = a.rank < 0, b_complete = b.rank < 0;
  if (a_complete != b_complete) return a_complete;
  if (a_complete) return *a.key > *b.key;
  return a.seq > b.seq;
}

void Enumerator::push_expand(int state, int rank) {
  const State& s = states_[static_cast<std::size_t>(state)];
  int ctx = holes_[static_cast<std::size_t>(s.holes)].context;
  const auto& values = value_[static_cast<std::size_t>(ctx)];
  if (static_cast<std::size_t>(rank) >= values.size()) return;
  double priority = s.logp + (s.bound - best_[static_cast<std::size_t>(ctx)]) +
                    values[static_cast<std::size_t>(rank)] + kBoundSlack;
  heap_.push({priority, seq_++, state, rank, nullptr});
}

ProgramTree Enumerator::materialize(int state) const {
  std::vector<int> rules;
  for (int s = state; states_[static_cast<std::size_t>(s)].parent >= 0; s = states_[static_cast<std::size_t>(s)].parent) {
    rules.push_back(states_[static_cast<std::size_t>(s)].rule);
  }
  std::reverse(rules.begin(), rules.end());
  std::size_t pos = 0;
  auto build = [&](auto& self) -> ProgramTree {
    ProgramTree t;
    t.rule = rules[pos++];
    for (int i = 0; i < g_.rule(t.rule).arity(); ++i) t.children.push_back(self(self));
    return t;
  };
  return build(build);
}

std::optional<ProgramTree> Enumerator::next() {
  while (!heap_.empty()) {
    Entry e = heap_.top();
    heap_.pop();
    if (e.rank < 0) {
      last_logp_ = e.priority;
      return materialize(e.state);
    }
    push_expand(e.state, e.rank + 1);
    State s = states_[static_cast<std::size_t>(e.state)];
    const HoleNode hole = holes_[static_cast<std::size_t>(s.holes)];
    int rule = ranked_[static_cast<std::size_t>(hole.context)][static_cast<std::size_t>(e.rank)];
    const Rule& r = g_.rule(rule);
    int min_left = s.min_left - ctx_min_[static_cast<std::size_t>(hole.context)];
    double bound = s.bound - best_[static_cast<std::size_t>(hole.context)];
    for (int i = 0; i < r.arity(); ++i) {
      int cid = dists_.context_id({rule, i});
      min_left += ctx_min_[static_cast<std::size_t>(cid)];
      bound += best_[static_cast<std::size_t>(cid)];
    }
    if (s.size + 1 + min_left > cap_) continue;
    int head = hole.next;
    for (int i = r.arity() - 1; i >= 0; --i) {
      holes_.push_back({dists_.context_id({rule, i}), head});
      head = static_cast<int>(holes_.size()) - 1;
    }
    double logp = s.logp + dists_.log_probs(hole.context)[static_cast<std::size_t>(rule)];
    states_.push_back({e.state, rule, head, s.size + 1, min_left, logp, bound});
    int child = static_cast<int>(states_.size()) - 1;
    if (head < 0) {
      auto key = std::make_shared<const std::string>(canonical_key(materialize(child)));
      heap_.push({logp, seq_++, child, -1, std::move(key)});
    } else {
      push_expand(child, 0);
    }
  }
  return std::nullopt;
}

std::vector<ProgramTree> enumerate_top(const RuleDistributions& dists, int k, int cap) {
  Enumerator en(dists, cap);
  std::vector<ProgramTree> out;
  while (static_cast<int>(out.size()) < k) {
    auto t = en.next();
    if (!t) break;
    out.push_back(std::move(*t));
  }
  return out;
}

std::vector<ProgramTree> enumerate_top(const ProgramTree& problem, const ModelParams& params,
                                       const Featurizer& featurizer, const Grammar& solution_grammar, int k, int cap,
                                       double eps) {
  RuleDistributions d(problem, params, featurizer, solution_grammar, eps);
  return enumerate_top(d, k, cap);
}

namespace {

void score_batch(const CompiledProblem& problem, const Grammar& g, const std::vector<ProgramTree>& trees,
                 std::vector<ScoreRecord>& out, const EvalBudget& budget, int workers) {
  out.assign(trees.size(), ScoreRecord{});
  auto one = [&](std::size_t i) { out[i] = score(problem, tree_to_expr(trees[i], g), budget); };
  int n = std::max(1, std::min<int>(workers, static_cast<int>(trees.size())));
  if (n == 1) {
    for (std::size_t i = 0; i < trees.size(); ++i) one(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < trees.size();) one(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

SolveResult solve(const CompiledProblem& problem, const RuleDistributions& dists, const SolveConfig& cfg) {
  const Grammar& g = dists.grammar();
  SolveResult result;
  std::optional<Enumerator> en;
  if (cfg.mode == SearchMode::Enumerate) en.emplace(dists, cfg.size_cap);
  Rng rng(cfg.seed);
  std::unordered_map<std::string, ScoreRecord> seen;  // sampling repeats trees
  int drawn = 0;
  bool exhausted = false;
  std::vector<ProgramTree> batch;
  std::vector<int> draw_index;
  std::vector<ScoreRecord> records;
  while (drawn < cfg.candidates && !exhausted) {
    batch.clear();
    draw_index.clear();
    std::vector<std::string> keys;
    while (drawn < cfg.candidates && static_cast<int>(batch.size()) < std::max(1, cfg.batch)) {
      std::optional<ProgramTree> t = en ? en->next() : sample_tree(dists, rng, cfg.size_cap);
      if (en && !t) {
        exhausted = true;
        break;
      }
      ++drawn;
      if (!t) continue;
      if (!en) {
        std::string key = canonical_key(*t);
        bool dup = seen.count(key) > 0 || std::find(keys.begin(), keys.end(), key) != keys.end();
        if (dup) continue;
        keys.push_back(std::move(key));
      }
      batch.push_back(std::move(*t));
      draw_index.push_back(drawn);
    }
    score_batch(problem, g, batch, records, cfg.budget, cfg.workers);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (!en) seen.emplace(keys[i], records[i]);
      if (!result.has_candidate ||
          preferable(records[i], tree_size(batch[i]), result.record, tree_size(result.best))) {
        result.best = batch[i];
        result.record = records[i];
        result.has_candidate = true;
      }
      if (records[i].score == 1) {
        result.candidates_used = draw_index[i];
        return result;
      }
    }
  }
  result.candidates_used = drawn;
  return result;
}

SolveResult solve(const CompiledProblem& problem, const ProgramTree& problem_tree, const ModelParams& params,
                  const Featurizer& featurizer, const Grammar& solution_grammar, const SolveConfig& cfg) {
  RuleDistributions d(problem_tree, params, featurizer, solution_grammar, cfg.epsilon);
  return solve(problem, d, cfg);
}

}  // namespace glassbox
