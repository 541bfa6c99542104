#include "tandem/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace tandem {

AdamW::AdamW(std::vector<TensorRef> params, double learning_rate,
             double weight_decay, double beta1, double beta2, double eps)
    : params_(std::move(params)),
      lr_(learning_rate),
      weight_decay_(weight_decay),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
  reset();
}

void AdamW::reset() {
  m_.clear();
  v_.clear();
  for (const auto& p : params_) {
    m_.emplace_back(p.values->size(), 0.0);
    v_.emplace_back(p.values->size(), 0.0);
  }
  step_count_ = 0;
}

void AdamW::step(const std::vector<TensorRef>& grads) {
  if (grads.size() != params_.size()) {
    throw std::runtime_error("AdamW::step: gradient list does not match params");
  }
  ++step_count_;
  double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (size_t t = 0; t < params_.size(); ++t) {
    Vector& theta = *params_[t].values;
    const Vector& g = *grads[t].values;
    if (g.size() != theta.size()) {
      throw std::runtime_error("AdamW::step: shape mismatch for tensor " +
                               params_[t].name);
    }
    Vector& m = m_[t];
    Vector& v = v_[t];
    for (size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      double m_hat = m[i] / bc1;
      double v_hat = v[i] / bc2;
      theta[i] -= lr_ * (m_hat / (std::sqrt(v_hat) + eps_) +
                         weight_decay_ * theta[i]);
    }
  }
}

}  // namespace tandem
