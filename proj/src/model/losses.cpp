#include "jointmap/model/losses.hpp"

#include <algorithm>
#include <cmath>

#include "jointmap/error.hpp"
#include "jointmap/numerics/ops.hpp"

namespace jointmap::model {

namespace {

constexpr double kLogFloor = 1e-12;

double clamped_log(double x) { return std::log(std::max(x, kLogFloor)); }

void check_sizes(std::span<const double> logits, std::span<const double> targets,
                 std::span<const double> alpha) {
  if (logits.size() != targets.size()) throw ShapeError("logit and target lengths differ");
  if (!alpha.empty() && alpha.size() != logits.size()) throw ShapeError("need one alpha per class");
}

}  // namespace

double loss_pc(std::span<const double> logits, std::span<const double> targets) {
  check_sizes(logits, targets, {});
  double total = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    const double t = targets[c];
    total += -(t * clamped_log(numerics::sigmoid(logits[c])) +
               (1.0 - t) * clamped_log(numerics::sigmoid(-logits[c])));
  }
  return total;
}

double loss_intent(std::span<const double> logits, std::size_t target) {
  if (target >= logits.size()) throw InputError("intent target out of range");
  const double peak = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double s : logits) z += std::exp(s - peak);
  return -(logits[target] - peak - std::log(z));
}

std::vector<double> loss_intent_grad(std::span<const double> logits, std::size_t target) {
  if (target >= logits.size()) throw InputError("intent target out of range");
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> g(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (g[i] = std::exp(logits[i] - peak));
  for (double& x : g) x /= z;
  g[target] -= 1.0;
  return g;
}

double focal_loss_pc(std::span<const double> logits, std::span<const double> targets,
                     double gamma, std::span<const double> alpha) {
  check_sizes(logits, targets, alpha);
  if (!(gamma >= 0.0)) throw ConfigError("focal gamma must be >= 0");
  double total = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    const bool positive = targets[c] > 0.5;
    const double p_t = numerics::sigmoid(positive ? logits[c] : -logits[c]);
    const double a = alpha.empty() ? 1.0 : alpha[c];
    total += -a * std::pow(1.0 - p_t, gamma) * clamped_log(p_t);
  }
  return total;
}

std::vector<double> focal_loss_pc_grad(std::span<const double> logits,
                                       std::span<const double> targets, double gamma,
                                       std::span<const double> alpha) {
  check_sizes(logits, targets, alpha);
  std::vector<double> g(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    const bool positive = targets[c] > 0.5;
    const double sign = positive ? 1.0 : -1.0;
    const double p_t = numerics::sigmoid(sign * logits[c]);
    const double a = alpha.empty() ? 1.0 : alpha[c];
    const double miss = 1.0 - p_t;
    // d/ds of -a (1 - p_t)^g log p_t, with dp_t/ds = sign * p_t (1 - p_t).
    g[c] = sign * a *
           (gamma * std::pow(miss, gamma) * p_t * clamped_log(p_t) - std::pow(miss, gamma + 1.0));
  }
  return g;
}

double total_loss(double focal_pc, double intent, double beta_category, double beta_intent) {
  if (!(beta_category >= 0.0) || !(beta_intent >= 0.0)) {
    throw ConfigError("loss weights must be >= 0");
  }
  if (beta_category == 0.0 && beta_intent == 0.0) throw ConfigError("both loss weights are zero");
  return beta_category * focal_pc + beta_intent * intent;
}

}  // namespace jointmap::model
