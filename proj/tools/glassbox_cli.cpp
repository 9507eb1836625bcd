#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "glassbox/config.hpp"
#include "glassbox/domains.hpp"
#include "glassbox/error.hpp"
#include "glassbox/search.hpp"
#include "glassbox/trainer.hpp"

using namespace glassbox;
namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<int> workers) {
  RunConfig cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (workers) cfg.workers = *workers;
  cfg.validate();
  std::cout << rounds_csv_header() << '\n';
  run_pipeline(cfg, [](const RoundReport& r) {
    std::cout << rounds_csv_row(r) << '\n' << std::flush;
    for (const auto& c : r.challenges) {
      std::cout << "  challenge " << c.index << ": " << (c.solved ? "solved" : "budget-exhausted") << " after "
                << c.candidates << " candidates\n";
    }
  });
  std::cout << "artifacts in " << cfg.output << '\n';
  return 0;
}

// Model file (or uniform) and the domain whose grammar pair it was trained on.
struct LoadedModel {
  std::optional<ModelParams> params;  // nullopt: uniform
  std::string domain;                 // empty: each challenge in its own domain
};

LoadedModel load_model(const std::string& model, const std::string& data_dir) {
  if (model == "uniform") return {};
  ModelParams p = load_params(model);
  std::vector<std::string> candidates = domain_names();
  candidates.push_back("all");
  for (const auto& d : candidates) {
    DomainSpec spec = load_domain(d, data_dir);
    if (grammar_pair_hash(spec.problem_grammar, spec.solution_grammar) == p.grammar_hash) return {p, d};
  }
  throw Error(model + ": grammar hash matches no known domain; refusing to use it");
}

int cmd_challenge(const std::string& model, const std::string& index, int budget, const std::string& out_dir) {
  const std::string data_dir = default_data_dir();
  LoadedModel m = load_model(model, data_dir);
  std::vector<int> wanted;
  if (index == "all") {
    for (int i = 1; i <= 10; ++i) wanted.push_back(i);
  } else {
    int i = std::stoi(index);
    if (i < 1 || i > 10) throw Error("challenge index must be 1..10 or all");
    wanted.push_back(i);
  }
  std::map<std::string, DomainSpec> specs;
  auto spec_for = [&](const std::string& d) -> const DomainSpec& {
    auto it = specs.find(d);
    if (it == specs.end()) it = specs.emplace(d, load_domain(d, data_dir)).first;
    return it->second;
  };
  std::ostringstream csv;
  csv << "index,model,domain,solved,candidates,seconds,solution\n";
  std::printf("%-5s %-14s %-18s %-10s %-8s %s\n", "index", "domain", "status", "candidates", "seconds", "solution");
  for (const auto& c : challenge_problems(data_dir)) {
    if (std::find(wanted.begin(), wanted.end(), c.index) == wanted.end()) continue;
    const DomainSpec& spec = spec_for(m.domain.empty() ? c.domain : m.domain);
    std::vector<ChallengeProblem> one = challenge_problems_for(spec, data_dir);
    auto it = std::find_if(one.begin(), one.end(), [&](const auto& x) { return x.index == c.index; });
    if (it == one.end()) {
      std::printf("%-5d %-14s %-18s\n", c.index, c.domain.c_str(), "not-in-model-domain");
      continue;
    }
    Featurizer f(spec.problem_grammar, spec.solution_grammar);
    ModelParams params = m.params ? *m.params
                                  : ModelParams::zeros(spec.solution_grammar.size(), f.dim(),
                                                       grammar_pair_hash(spec.problem_grammar, spec.solution_grammar));
    SolveConfig sc;
    sc.candidates = budget;
    auto outcome = run_challenges({*it}, params, spec, f, sc, true).front();
    const char* status = outcome.solved ? "solved" : "budget-exhausted";
    std::printf("%-5d %-14s %-18s %-10d %-8.2f %s\n", c.index, c.domain.c_str(), status, outcome.candidates,
                outcome.seconds, outcome.solution.c_str());
    csv << c.index << ',' << model << ',' << c.domain << ',' << (outcome.solved ? 1 : 0) << ',' << outcome.candidates
        << ',' << outcome.seconds << ",\"" << outcome.solution << "\"\n";
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "challenge.csv");
    if (!f) throw Error("cannot write " + (fs::path(out_dir) / "challenge.csv").string());
    f << csv.str();
  }
  return 0;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char ch = line[i];
      if (quoted) {
        if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (ch == '"') {
          quoted = false;
        } else {
          cell += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        cells.push_back(std::move(cell));
        cell.clear();
      } else {
        cell += ch;
      }
    }
    cells.push_back(std::move(cell));
    rows.push_back(std::move(cells));
  }
  return rows;
}

// Run directories: `dir` itself if it holds rounds.csv, else its immediate
// subdirectories that do.
std::vector<fs::path> run_dirs(const fs::path& dir) {
  if (fs::exists(dir / "rounds.csv")) return {dir};
  std::vector<fs::path> out;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_directory() && fs::exists(e.path() / "rounds.csv")) out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_report(const std::string& dir_arg) {
  fs::path dir(dir_arg);
  auto runs = run_dirs(dir);
  if (runs.empty()) throw Error("no rounds.csv in " + dir_arg + " or its subdirectories");
  std::ostringstream text, csv;
  csv << "run,round,domain,practice_frac,test_frac,candidates\n";
  text << "Fraction of test problems solved per round\n";
  // challenge index -> condition -> cell
  std::map<int, std::map<std::string, std::string>> table;
  std::vector<std::string> conditions{"uniform"};
  for (const auto& run : runs) {
    auto rows = read_csv(run / "rounds.csv");
    if (rows.size() < 2) throw Error((run / "rounds.csv").string() + " has no rounds");
    std::string name = run.filename().string();
    std::string domain = rows[1].size() > 1 ? rows[1][1] : "?";
    text << "\n" << name << " (" << domain << ")\n  round  practice  test\n";
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto& r = rows[i];
      if (r.size() < 6) throw Error((run / "rounds.csv").string() + ": malformed row");
      char buf[128];
      std::snprintf(buf, sizeof buf, "  %5s  %8s  %s\n", r[0].c_str(), r[2].c_str(), r[3].c_str());
      text << buf;
      csv << name << ',' << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << ',' << r[4] << '\n';
    }
    if (!fs::exists(run / "challenge.csv")) continue;
    std::string learned = domain == "all" ? "all-domain" : "domain-specific";
    if (std::find(conditions.begin(), conditions.end(), learned) == conditions.end()) conditions.push_back(learned);
    auto ch = read_csv(run / "challenge.csv");
    std::string last_round = rows.back()[0];
    for (std::size_t i = 1; i < ch.size(); ++i) {
      const auto& r = ch[i];
      if (r.size() < 7) continue;
      int index = std::stoi(r[1]);
      std::string cell = r[3] == "1" ? "solved@" + r[4] : "exhausted@" + r[4];
      if (r[0] == "0") table[index]["uniform"] = cell;
      if (r[0] == last_round && last_round != "0") table[index][learned] = cell;
    }
  }
  text << "\nChallenge problems (status@candidates)\n  index";
  for (const auto& c : conditions) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %-18s", c.c_str());
    text << buf;
  }
  text << '\n';
  std::ostringstream ch_csv;
  ch_csv << "index";
  for (const auto& c : conditions) ch_csv << ',' << c;
  ch_csv << '\n';
  for (int index = 1; index <= 10; ++index) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "  %5d", index);
    text << buf;
    ch_csv << index;
    for (const auto& c : conditions) {
      auto it = table[index].find(c);
      std::string cell = it == table[index].end() ? "-" : it->second;
      std::snprintf(buf, sizeof buf, "  %-18s", cell.c_str());
      text << buf;
      ch_csv << ',' << cell;
    }
    text << '\n';
    ch_csv << '\n';
  }
  std::cout << text.str();
  std::ofstream(dir / "summary.txt") << text.str();
  std::ofstream(dir / "summary.csv") << csv.str();
  std::ofstream(dir / "challenge_summary.csv") << ch_csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glassbox: learned guidance for glass-box program synthesis"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "generate practice problems, train for several rounds, evaluate");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  run->add_option("--config", config_path, "run configuration file")->required();
  run->add_option("--seed", seed, "override the configured seed");
  run->add_option("--workers", workers, "override the configured worker count");

  auto* challenge = app.add_subcommand("challenge", "solve challenge problems with a model");
  std::string model = "uniform", index = "all", out_dir;
  int budget = 20000;
  challenge->add_option("--model", model, "parameter file or 'uniform'")->required();
  challenge->add_option("--index", index, "challenge 1..10 or 'all'");
  challenge->add_option("--budget", budget, "candidates per challenge")->check(CLI::PositiveNumber);
  challenge->add_option("--out", out_dir, "directory for challenge.csv");

  auto* report = app.add_subcommand("report", "summarize a run directory");
  std::string report_dir;
  report->add_option("dir", report_dir, "run directory, or a directory of runs")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, seed, workers);
    if (*challenge) return cmd_challenge(model, index, budget, out_dir);
    if (*report) return cmd_report(report_dir);
  } catch (const std::exception& e) {
    std::cerr << "glassbox: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
