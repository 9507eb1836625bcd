#include "glassbox/trainer.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "glassbox/error.hpp"

namespace glassbox {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Seeds for the independent random streams of a run.
enum Stream : std::uint64_t { PracticeStream = 1, SearchStream = 2, TrainStream = 3 };

std::uint64_t epoch_seed(std::uint64_t base, Stream s, int round, int epoch) {
  return mix_seed(mix_seed(base, s), static_cast<std::uint64_t>(round) * 1024 + static_cast<std::uint64_t>(epoch));
}

}  // namespace

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  int threads = std::max(1, std::min(workers, n));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

PracticeSet generate_practice(int m, const DomainSpec& spec, std::uint64_t seed, int test_count, int size_cap) {
  if (m < 1) throw Error("practice count must be positive");
  if (test_count <= 0) test_count = m / 10;
  if (test_count >= m) throw Error("test count must be below the practice count");
  const Grammar& g = spec.problem_grammar;
  auto uniform = RuleDistributions::uniform(g);
  Rng rng(seed);
  std::set<std::string> seen;
  std::vector<ProgramTree> kept;
  const long long max_draws = 200LL * m + 10000;
  for (long long draw = 0; draw < max_draws && static_cast<int>(kept.size()) < m; ++draw) {
    auto t = sample_tree(uniform, rng, size_cap);
    if (!t) continue;
    if (!seen.insert(canonical_key(*t)).second) continue;
    CompiledProblem compiled(*t, spec);
    if (!compiled.admissible()) continue;
    kept.push_back(std::move(*t));
  }
  if (static_cast<int>(kept.size()) < (m + 1) / 2) {
    throw Error("grammar " + g.name() + " yields only " + std::to_string(kept.size()) +
                " distinct usable problems; " + std::to_string(m) + " requested");
  }
  rng.shuffle(kept);
  int n_test = std::min(test_count, static_cast<int>(kept.size()) - 1);
  PracticeSet out;
  out.test.assign(kept.begin(), kept.begin() + n_test);
  out.train.assign(kept.begin() + n_test, kept.end());
  return out;
}

bool Corpus::offer(const ProgramTree& problem, const ProgramTree& solution, int round) {
  std::string key = canonical_key(problem);
  auto it = entries_.find(key);
  if (it != entries_.end() && tree_size(it->second.solution) <= tree_size(solution)) return false;
  entries_[key] = Entry{problem, solution, round};
  return true;
}

bool Corpus::contains(const ProgramTree& problem) const { return entries_.count(canonical_key(problem)) > 0; }

std::vector<Sample> Corpus::samples(const Featurizer& featurizer) const {
  std::vector<Sample> out;
  for (const auto& [key, e] : entries_) {
    auto s = extract_training_samples(e.problem, e.solution, featurizer);
    out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return out;
}

std::vector<CompiledProblem> compile_all(const std::vector<ProgramTree>& problems, const DomainSpec& spec,
                                         int workers) {
  std::vector<std::optional<CompiledProblem>> slots(problems.size());
  parallel_for(static_cast<int>(problems.size()), workers,
               [&](int i) { slots[static_cast<std::size_t>(i)].emplace(problems[static_cast<std::size_t>(i)], spec); });
  std::vector<CompiledProblem> out;
  out.reserve(problems.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

RoundOutcome train_round(Corpus& corpus, const std::vector<ProgramTree>& practice, const ModelParams& previous,
                         const DomainSpec& spec, const Featurizer& featurizer, const TrainerSettings& settings,
                         int round, std::ostream* log, std::span<const CompiledProblem> compiled) {
  if (practice.empty()) throw Error("no practice problems");
  std::vector<CompiledProblem> own;
  if (compiled.empty()) {
    own = compile_all(practice, spec, settings.workers);
    compiled = own;
  }
  if (compiled.size() != practice.size()) throw Error("compiled problems do not match the practice set");
  RoundOutcome out;
  out.params = previous;
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    std::uint64_t search_seed = epoch_seed(settings.seed, SearchStream, round, epoch);
    std::vector<SolveResult> results(practice.size());
    parallel_for(static_cast<int>(practice.size()), settings.workers, [&](int i) {
      auto k = static_cast<std::size_t>(i);
      SolveConfig sc;
      sc.mode = settings.mode;
      sc.candidates = settings.candidates;
      sc.size_cap = settings.size_cap;
      sc.epsilon = settings.epsilon;
      sc.budget = settings.budget;
      sc.seed = mix_seed(search_seed, k);
      results[k] = solve(compiled[k], practice[k], out.params, featurizer, spec.solution_grammar, sc);
    });
    for (std::size_t k = 0; k < practice.size(); ++k) {
      out.candidates += results[k].candidates_used;
      if (!results[k].solved()) continue;
      if (corpus.offer(practice[k], results[k].best, round) && log) {
        *log << round << ' ' << epoch << ' ' << canonical_key(practice[k]) << ' '
             << canonical_key(results[k].best) << ' ' << results[k].record.score << '\n';
      }
    }
    if (corpus.empty()) continue;
    TrainConfig tc = settings.model;
    tc.seed = epoch_seed(settings.seed, TrainStream, round, epoch);
    auto samples = corpus.samples(featurizer);
    out.params = train(samples, spec.solution_grammar.size(), tc, &out.params);
  }
  if (corpus.empty()) {
    out.params = previous;
    out.warning = "round " + std::to_string(round) + ": no practice problem solved; parameters unchanged";
  }
  return out;
}

double evaluate(const std::vector<ProgramTree>& problems, const ModelParams& params, const DomainSpec& spec,
                const Featurizer& featurizer, const SolveConfig& solve_cfg, int workers, long long* candidates,
                std::span<const CompiledProblem> compiled) {
  if (problems.empty()) return 0.0;
  std::vector<CompiledProblem> own;
  if (compiled.empty()) {
    own = compile_all(problems, spec, workers);
    compiled = own;
  }
  std::vector<SolveResult> results(problems.size());
  parallel_for(static_cast<int>(problems.size()), workers, [&](int i) {
    auto k = static_cast<std::size_t>(i);
    results[k] = solve(compiled[k], problems[k], params, featurizer, spec.solution_grammar, solve_cfg);
  });
  int solved = 0;
  for (const auto& r : results) {
    solved += r.solved();
    if (candidates) *candidates += r.candidates_used;
  }
  return static_cast<double>(solved) / static_cast<double>(problems.size());
}

std::vector<ChallengeOutcome> run_challenges(const std::vector<ChallengeProblem>& challenges,
                                             const ModelParams& params, const DomainSpec& spec,
                                             const Featurizer& featurizer, const SolveConfig& solve_cfg,
                                             bool wall_time) {
  std::vector<ChallengeOutcome> out;
  for (const auto& c : challenges) {
    auto t0 = Clock::now();
    CompiledProblem problem(c.problem, spec);
    SolveResult r = solve(problem, c.problem, params, featurizer, spec.solution_grammar, solve_cfg);
    ChallengeOutcome o;
    o.index = c.index;
    o.domain = c.domain;
    o.solved = r.solved();
    o.candidates = r.candidates_used;
    o.seconds = wall_time ? seconds_since(t0) : 0.0;
    o.solution = r.has_candidate ? display_tree(r.best, spec.solution_grammar) : "";
    out.push_back(std::move(o));
  }
  return out;
}

std::string rounds_csv_header() { return "round,domain,practice_frac,test_frac,candidates,seconds"; }

std::string rounds_csv_row(const RoundReport& r) {
  return std::to_string(r.round) + "," + r.domain + "," + fixed(r.practice_frac, 4) + "," + fixed(r.test_frac, 4) +
         "," + std::to_string(r.candidates) + "," + fixed(r.seconds, 3);
}

std::vector<RoundReport> run_pipeline(const RunConfig& cfg, const std::function<void(const RoundReport&)>& on_round) {
  cfg.validate();
  namespace fs = std::filesystem;
  const std::string data_dir = cfg.data_dir.empty() ? default_data_dir() : cfg.data_dir;
  const int workers = resolve_workers(cfg.workers);
  DomainSpec spec = load_domain(cfg.domain, data_dir);
  Featurizer featurizer(spec.problem_grammar, spec.solution_grammar);

  // A union of several domains draws an equal share of problems from each
  // member's own grammar and searches with twice the candidates.
  const int members = static_cast<int>(spec.members.size());
  const int multiplier = members > 1 ? 2 : 1;
  PracticeSet practice;
  std::uint64_t practice_seed = mix_seed(cfg.seed, PracticeStream);
  if (members == 1) {
    practice = generate_practice(cfg.practice, spec, practice_seed, cfg.test_count(), cfg.problem_size_cap);
  } else {
    for (int j = 0; j < members; ++j) {
      DomainSpec part = load_domain(spec.members[static_cast<std::size_t>(j)], data_dir);
      int test_share = std::max(1, cfg.test_count() / members);
      PracticeSet p = generate_practice(cfg.practice / members, part, mix_seed(practice_seed, static_cast<std::uint64_t>(j)),
                                        test_share, cfg.problem_size_cap);
      auto map = rule_mapping(part.problem_grammar, spec.problem_grammar);
      for (auto& t : p.train) practice.train.push_back(remap_tree(t, map));
      for (auto& t : p.test) practice.test.push_back(remap_tree(t, map));
    }
  }
  std::vector<ChallengeProblem> challenges;
  if (cfg.challenges) challenges = challenge_problems_for(spec, data_dir);

  fs::create_directories(cfg.output);
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(cfg.output) / name);
    if (!f) throw Error("cannot write " + (fs::path(cfg.output) / name).string());
    return f;
  };
  open("config.toml") << config_to_text(cfg);
  std::ofstream rounds_csv = open("rounds.csv");
  std::ofstream timing_csv = open("timing.csv");
  std::ofstream challenge_csv = open("challenge.csv");
  std::ofstream corpus_log = open("corpus.log");
  rounds_csv << rounds_csv_header() << '\n';
  timing_csv << "round,seconds\n";
  challenge_csv << "round,index,domain,solved,candidates,seconds,solution\n";
  corpus_log << "# round epoch problem_key solution_key score\n";

  EvalBudget budget(cfg.max_steps, cfg.max_recursion);
  TrainerSettings ts;
  ts.mode = cfg.practice_mode == "enumerate" ? SearchMode::Enumerate : SearchMode::Sample;
  ts.candidates = cfg.practice_candidates * multiplier;
  ts.epochs = cfg.epochs;
  ts.size_cap = cfg.size_cap;
  ts.epsilon = cfg.epsilon;
  ts.budget = budget;
  ts.model.epochs = cfg.train_epochs;
  ts.model.learning_rate = cfg.learning_rate;
  ts.model.l2 = cfg.l2;
  ts.model.batch_size = cfg.batch_size;
  ts.workers = workers;
  ts.seed = cfg.seed;

  SolveConfig eval_cfg;
  eval_cfg.mode = SearchMode::Enumerate;
  eval_cfg.candidates = cfg.eval_candidates * multiplier;
  eval_cfg.size_cap = cfg.size_cap;
  eval_cfg.epsilon = cfg.epsilon;
  eval_cfg.budget = budget;

  auto train_compiled = compile_all(practice.train, spec, workers);
  auto test_compiled = compile_all(practice.test, spec, workers);

  ModelParams params = ModelParams::zeros(spec.solution_grammar.size(), featurizer.dim(),
                                          grammar_pair_hash(spec.problem_grammar, spec.solution_grammar));
  Corpus corpus;
  std::vector<RoundReport> reports;
  for (int round = 0; round <= cfg.rounds; ++round) {
    auto t0 = Clock::now();
    RoundReport rep;
    rep.round = round;
    rep.domain = cfg.domain;
    if (round > 0) {
      RoundOutcome o = train_round(corpus, practice.train, params, spec, featurizer, ts, round, &corpus_log,
                                   train_compiled);
      params = std::move(o.params);
      rep.candidates += o.candidates;
      if (!o.warning.empty()) corpus_log << "# warning: " << o.warning << '\n';
    }
    int stored = 0;
    for (const auto& t : practice.train) stored += corpus.contains(t);
    rep.practice_frac = static_cast<double>(stored) / static_cast<double>(practice.train.size());
    rep.test_frac = evaluate(practice.test, params, spec, featurizer, eval_cfg, workers, &rep.candidates,
                             test_compiled);
    rep.challenges = run_challenges(challenges, params, spec, featurizer, eval_cfg, cfg.report_wall_time);
    save_params(params, (fs::path(cfg.output) / ("theta_round_" + std::to_string(round) + ".txt")).string());
    double elapsed = seconds_since(t0);
    rep.seconds = cfg.report_wall_time ? elapsed : 0.0;

    rounds_csv << rounds_csv_row(rep) << '\n' << std::flush;
    timing_csv << round << ',' << fixed(elapsed, 3) << '\n' << std::flush;
    for (const auto& c : rep.challenges) {
      challenge_csv << round << ',' << c.index << ',' << c.domain << ',' << (c.solved ? 1 : 0) << ','
                    << c.candidates << ',' << fixed(c.seconds, 3) << ',' << csv_quote(c.solution) << '\n';
    }
    challenge_csv.flush();
    corpus_log.flush();
    if (on_round) on_round(rep);
    reports.push_back(std::move(rep));
  }
  if (!rounds_csv || !timing_csv || !challenge_csv || !corpus_log) throw Error("error writing to " + cfg.output);
  return reports;
}

}  // namespace glassbox
