#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glassbox/features.hpp"

namespace glassbox {

// Multiclass softmax regression: p(c | x) proportional to exp(w_c . x + b_c).
struct ModelParams {
  int classes = 0;
  int dim = 0;
  std::vector<double> weights;     // classes x dim, row-major
  std::vector<double> intercepts;  // classes
  std::uint64_t grammar_hash = 0;  // of the grammar pair the features come from

  static ModelParams zeros(int classes, int dim, std::uint64_t grammar_hash = 0);
  double& w(int c, int j) { return weights[static_cast<std::size_t>(c) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)]; }
  double w(int c, int j) const { return weights[static_cast<std::size_t>(c) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)]; }
  bool operator==(const ModelParams&) const = default;
};

struct TrainConfig {
  int epochs = 30;  // passes over the samples
  double learning_rate = 0.1;
  double l2 = 1e-4;  // on weights only
  int batch_size = 32;
  std::uint64_t seed = 1;
};

std::uint64_t grammar_pair_hash(const Grammar& problem_grammar, const Grammar& solution_grammar);

// Throws Error on dimension mismatch.
std::vector<double> predict(const ModelParams& params, std::span<const double> x);
void predict_into(const ModelParams& params, std::span<const double> x, std::span<double> out);

// Mean cross-entropy over `samples` plus (l2/2)|W|^2. If grad is non-null it
// receives the gradient (same shape as params).
double objective(const ModelParams& params, std::span<const Sample> samples, double l2, ModelParams* grad = nullptr);

// Mini-batch gradient descent from warm_start (or zeros). Deterministic given
// cfg.seed. Throws Error on empty or inconsistent samples.
ModelParams train(std::span<const Sample> samples, int classes, const TrainConfig& cfg,
                  const ModelParams* warm_start = nullptr);

// (1 - eps) * dist + eps * uniform.
std::vector<double> smoothed(std::span<const double> dist, double eps);

void save_params(const ModelParams& params, const std::string& path);
std::string params_to_text(const ModelParams& params);
ModelParams params_from_text(const std::string& text);
// Throws Error if unreadable or if expected_hash != 0 and differs.
ModelParams load_params(const std::string& path, std::uint64_t expected_hash = 0);

}  // namespace glassbox
