#include "glassbox/model.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "glassbox/error.hpp"
#include "glassbox/random.hpp"

namespace glassbox {

ModelParams ModelParams::zeros(int classes, int dim, std::uint64_t grammar_hash) {
  ModelParams p;
  p.classes = classes;
  p.dim = dim;
  p.weights.assign(static_cast<std::size_t>(classes) * static_cast<std::size_t>(dim), 0.0);
  p.intercepts.assign(static_cast<std::size_t>(classes), 0.0);
  p.grammar_hash = grammar_hash;
  return p;
}

std::uint64_t grammar_pair_hash(const Grammar& problem_grammar, const Grammar& solution_grammar) {
  std::uint64_t h = problem_grammar.hash();
  return mix_seed(h, solution_grammar.hash());
}

void predict_into(const ModelParams& params, std::span<const double> x, std::span<double> out) {
  if (static_cast<int>(x.size()) != params.dim || static_cast<int>(out.size()) != params.classes) {
    throw Error("predict: feature width " + std::to_string(x.size()) + " does not match model width " +
                std::to_string(params.dim));
  }
  double top = -INFINITY;
  for (int c = 0; c < params.classes; ++c) {
    const double* row = params.weights.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(params.dim);
    double z = params.intercepts[static_cast<std::size_t>(c)];
    for (int j = 0; j < params.dim; ++j) z += row[j] * x[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(c)] = z;
    top = std::max(top, z);
  }
  double total = 0.0;
  for (double& v : out) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : out) v /= total;
}

std::vector<double> predict(const ModelParams& params, std::span<const double> x) {
  std::vector<double> out(static_cast<std::size_t>(params.classes));
  predict_into(params, x, out);
  return out;
}

namespace {

void check_samples(std::span<const Sample> samples, int classes, int dim) {
  for (const Sample& s : samples) {
    if (static_cast<int>(s.x.size()) != dim) throw Error("sample width does not match model width");
    if (s.label < 0 || s.label >= classes) throw Error("sample label out of range");
  }
}

// Accumulates sum over samples of (p - onehot) x into grad, returns summed
// cross-entropy.
double accumulate(const ModelParams& params, std::span<const Sample> samples, std::span<const std::size_t> order,
                  ModelParams& grad) {
  std::vector<double> p(static_cast<std::size_t>(params.classes));
  double ce = 0.0;
  for (std::size_t idx : order) {
    const Sample& s = samples[idx];
    predict_into(params, s.x, p);
    ce -= std::log(std::max(p[static_cast<std::size_t>(s.label)], 1e-300));
    p[static_cast<std::size_t>(s.label)] -= 1.0;
    for (int c = 0; c < params.classes; ++c) {
      double d = p[static_cast<std::size_t>(c)];
      if (d == 0.0) continue;
      grad.intercepts[static_cast<std::size_t>(c)] += d;
      double* row = grad.weights.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(params.dim);
      for (int j = 0; j < params.dim; ++j) row[j] += d * s.x[static_cast<std::size_t>(j)];
    }
  }
  return ce;
}

}  // namespace

double objective(const ModelParams& params, std::span<const Sample> samples, double l2, ModelParams* grad) {
  if (samples.empty()) throw Error("objective: no samples");
  check_samples(samples, params.classes, params.dim);
  ModelParams g = ModelParams::zeros(params.classes, params.dim);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  double n = static_cast<double>(samples.size());
  double loss = accumulate(params, samples, order, g) / n;
  double sq = 0.0;
  for (double w : params.weights) sq += w * w;
  loss += 0.5 * l2 * sq;
  if (grad) {
    for (std::size_t i = 0; i < g.weights.size(); ++i) g.weights[i] = g.weights[i] / n + l2 * params.weights[i];
    for (double& b : g.intercepts) b /= n;
    *grad = std::move(g);
  }
  return loss;
}

ModelParams train(std::span<const Sample> samples, int classes, const TrainConfig& cfg, const ModelParams* warm_start) {
  if (samples.empty()) throw Error("train: no samples");
  if (cfg.epochs <= 0 || cfg.batch_size <= 0 || cfg.learning_rate <= 0 || cfg.l2 < 0) {
    throw Error("train: invalid configuration");
  }
  int dim = static_cast<int>(samples.front().x.size());
  ModelParams params = warm_start ? *warm_start : ModelParams::zeros(classes, dim);
  if (params.classes != classes || params.dim != dim) throw Error("train: warm start has the wrong shape");
  check_samples(samples, classes, dim);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  ModelParams grad = ModelParams::zeros(classes, dim);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::fill(grad.weights.begin(), grad.weights.end(), 0.0);
      std::fill(grad.intercepts.begin(), grad.intercepts.end(), 0.0);
      accumulate(params, samples, std::span(order).subspan(start, end - start), grad);
      double scale = cfg.learning_rate / static_cast<double>(end - start);
      for (std::size_t i = 0; i < params.weights.size(); ++i) {
        params.weights[i] -= scale * grad.weights[i] + cfg.learning_rate * cfg.l2 * params.weights[i];
      }
      for (std::size_t c = 0; c < params.intercepts.size(); ++c) params.intercepts[c] -= scale * grad.intercepts[c];
    }
  }
  return params;
}

std::vector<double> smoothed(std::span<const double> dist, double eps) {
  std::vector<double> out(dist.begin(), dist.end());
  if (out.empty()) return out;
  double u = eps / static_cast<double>(out.size());
  for (double& p : out) p = (1.0 - eps) * p + u;
  return out;
}

std::string params_to_text(const ModelParams& params) {
  std::ostringstream out;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, params.grammar_hash);
  out << "glassbox-model 1\n"
      << "classes " << params.classes << "\n"
      << "dim " << params.dim << "\n"
      << "grammar_hash " << buf << "\n";
  auto row = [&](const double* v, int n) {
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v[i]);
      out << (i ? " " : "") << buf;
    }
    out << "\n";
  };
  out << "intercepts\n";
  row(params.intercepts.data(), params.classes);
  out << "weights\n";
  for (int c = 0; c < params.classes; ++c) {
    row(params.weights.data() + static_cast<std::size_t>(c) * static_cast<std::size_t>(params.dim), params.dim);
  }
  return out.str();
}

ModelParams params_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string tag, hash_hex;
  int version = 0;
  ModelParams p;
  auto expect = [&](const char* word) {
    if (!(in >> tag) || tag != word) throw Error(std::string("model file: expected '") + word + "'");
  };
  expect("glassbox-model");
  if (!(in >> version) || version != 1) throw Error("model file: unsupported version");
  expect("classes");
  in >> p.classes;
  expect("dim");
  in >> p.dim;
  expect("grammar_hash");
  in >> hash_hex;
  if (!in || p.classes <= 0 || p.dim <= 0) throw Error("model file: bad header");
  p.grammar_hash = std::stoull(hash_hex, nullptr, 16);
  p.intercepts.resize(static_cast<std::size_t>(p.classes));
  p.weights.resize(static_cast<std::size_t>(p.classes) * static_cast<std::size_t>(p.dim));
  // strtod reads %.17g output back exactly
  auto read_all = [&](std::vector<double>& v) {
    for (double& x : v) {
      std::string tok;
      if (!(in >> tok)) throw Error("model file: truncated");
      x = std::strtod(tok.c_str(), nullptr);
      if (!std::isfinite(x)) throw Error("model file: non-finite parameter");
    }
  };
  expect("intercepts");
  read_all(p.intercepts);
  expect("weights");
  read_all(p.weights);
  return p;
}

void save_params(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << params_to_text(params);
  if (!out) throw Error("failed writing " + path);
}

ModelParams load_params(const std::string& path, std::uint64_t expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  ModelParams p = params_from_text(buf.str());
  if (expected_hash != 0 && p.grammar_hash != expected_hash) {
    throw Error("model file " + path + " was trained for different grammars");
  }
  return p;
}

}  // namespace glassbox
