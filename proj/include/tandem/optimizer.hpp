#pragma once

#include <vector>

#include "tandem/encoder.hpp"

namespace tandem {

// Adaptive moment estimation with decoupled weight decay:
//   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * theta)
class AdamW {
 public:
  AdamW(std::vector<TensorRef> params, double learning_rate, double weight_decay,
        double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  // grads must be aligned with the params passed at construction.
  void step(const std::vector<TensorRef>& grads);

  // Clears the moment estimates and the step counter.
  void reset();

  long step_count() const { return step_count_; }

 private:
  std::vector<TensorRef> params_;
  std::vector<Vector> m_, v_;
  double lr_, weight_decay_, beta1_, beta2_, eps_;
  long step_count_ = 0;
};

}  // namespace tandem
