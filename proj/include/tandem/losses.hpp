#pragma once

#include <vector>

#include "tandem/corpus.hpp"
#include "tandem/tensor.hpp"

namespace tandem {

// Weighted sum of the three training objectives plus the contrastive
// temperature.
struct LossWeights {
  double beta_ce = 1e-2;
  double beta_scl = 1e-3;
  double beta_mse = 1.0;
  double temperature = 1.0;  // tau
  // Off by default: the contrastive term uses raw dot products exactly as
  // defined; switching this on L2-normalizes the embeddings first.
  bool normalize_embeddings = false;
  // Off by default: collapse soft targets to one-hot argmax inside the CE
  // term (hard-label datasets).
  bool hard_label_ce = false;
};

constexpr double kLogClamp = 1e-12;

// -sum_c y_c log(max(yhat_c, 1e-12)). Single-instance value; batch losses
// average over instances.
double ce_loss(const SoftLabel& y, const SoftLabel& yhat);

// (1/|C|) sum_c (y_c - yhat_c)^2.
double mse_loss(const SoftLabel& y, const SoftLabel& yhat);

// Supervised contrastive loss over a batch of [CLS] embeddings with hard
// labels y_i = argmax(y_i). Anchors whose class has no other member in the
// batch contribute 0. Batch size must be >= 2.
double scl_loss(const std::vector<Vector>& embeddings,
                const std::vector<int>& hard_labels, double tau,
                bool normalize_embeddings = false);

struct LossBreakdown {
  double total = 0.0;
  double ce = 0.0;   // unweighted component values
  double scl = 0.0;
  double mse = 0.0;
};

// Batch objective: beta1 * mean(CE) + beta2 * SCL + beta3 * mean(MSE).
LossBreakdown combined_loss(const std::vector<Vector>& logits,
                            const std::vector<Vector>& embeddings,
                            const std::vector<SoftLabel>& targets,
                            const LossWeights& weights);

// Same value as combined_loss, plus analytic gradients with respect to the
// logits and the embeddings (the latter carries the contrastive term).
LossBreakdown combined_loss_backward(const std::vector<Vector>& logits,
                                     const std::vector<Vector>& embeddings,
                                     const std::vector<SoftLabel>& targets,
                                     const LossWeights& weights,
                                     std::vector<Vector>& d_logits,
                                     std::vector<Vector>& d_embeddings);

int argmax_index(const SoftLabel& label);

}  // namespace tandem
