#pragma once

#include <span>
#include <vector>

namespace jointmap::model {

// Sum over classes of binary cross-entropy with sigmoid outputs; log
// arguments are clamped at 1e-12.
double loss_pc(std::span<const double> logits, std::span<const double> targets);

// -log softmax(logits)[target].
double loss_intent(std::span<const double> logits, std::size_t target);
std::vector<double> loss_intent_grad(std::span<const double> logits, std::size_t target);

// Focal loss per class, p_t = sigmoid(s) for positives and 1 - sigmoid(s)
// for negatives:  -alpha_c (1 - p_t)^gamma log p_t, summed over classes.
// gamma = 0 and alpha = 1 reduce it to loss_pc. Empty alpha means all 1.
double focal_loss_pc(std::span<const double> logits, std::span<const double> targets,
                     double gamma, std::span<const double> alpha = {});
std::vector<double> focal_loss_pc_grad(std::span<const double> logits,
                                       std::span<const double> targets, double gamma,
                                       std::span<const double> alpha = {});

// beta_category * focal + beta_intent * intent. Throws ConfigError for a
// negative weight or when both are zero.
double total_loss(double focal_pc, double intent, double beta_category, double beta_intent);

}  // namespace jointmap::model
