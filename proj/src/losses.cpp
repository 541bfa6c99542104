#include "tandem/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "tandem/classifier.hpp"

namespace tandem {

int argmax_index(const SoftLabel& label) {
  int best = 0;
  for (int c = 1; c < label.size(); ++c) {
    if (label.probs[c] > label.probs[best]) best = c;
  }
  return best;
}

double ce_loss(const SoftLabel& y, const SoftLabel& yhat) {
  if (y.size() != yhat.size()) {
    throw std::runtime_error("ce_loss: label lengths differ");
  }
  double loss = 0.0;
  for (int c = 0; c < y.size(); ++c) {
    loss -= y.probs[c] * std::log(std::max(yhat.probs[c], kLogClamp));
  }
  return loss;
}

double mse_loss(const SoftLabel& y, const SoftLabel& yhat) {
  if (y.size() != yhat.size()) {
    throw std::runtime_error("mse_loss: label lengths differ");
  }
  double loss = 0.0;
  for (int c = 0; c < y.size(); ++c) {
    double diff = y.probs[c] - yhat.probs[c];
    loss += diff * diff;
  }
  return loss / y.size();
}

namespace {

std::vector<Vector> normalized_copies(const std::vector<Vector>& embeddings) {
  std::vector<Vector> out = embeddings;
  for (auto& e : out) {
    double norm = std::sqrt(dot(e.data(), e.data(), static_cast<int>(e.size())));
    norm = std::max(norm, 1e-12);
    for (double& v : e) v /= norm;
  }
  return out;
}

// Shared forward/backward over the supervised contrastive term. When grads
// is non-null it receives d(loss)/d(phi) for the (possibly normalized)
// embeddings actually used in the dot products.
double scl_core(const std::vector<Vector>& phi, const std::vector<int>& labels,
                double tau, std::vector<Vector>* grads) {
  int n = static_cast<int>(phi.size());
  int d = n > 0 ? static_cast<int>(phi[0].size()) : 0;
  std::vector<int> class_count;
  for (int y : labels) {
    if (y >= static_cast<int>(class_count.size())) class_count.resize(y + 1, 0);
    ++class_count[y];
  }
  if (grads) {
    grads->assign(n, Vector(d, 0.0));
  }
  double loss = 0.0;
  std::vector<double> scores(n), weights(n);
  for (int i = 0; i < n; ++i) {
    int positives = class_count[labels[i]] - 1;
    if (positives <= 0) continue;  // no positive pair, anchor skipped

    double maxv = -1e300;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      scores[k] = dot(phi[i].data(), phi[k].data(), d) / tau;
      maxv = std::max(maxv, scores[k]);
    }
    double denom = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      weights[k] = std::exp(scores[k] - maxv);
      denom += weights[k];
    }
    double lse = maxv + std::log(denom);

    double pos_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || labels[j] != labels[i]) continue;
      pos_sum += scores[j];
    }
    loss += -pos_sum / positives + lse;

    if (grads) {
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        double t = weights[k] / denom;
        if (labels[k] == labels[i]) t -= 1.0 / positives;
        t /= tau;
        axpy(t, phi[k].data(), (*grads)[i].data(), d);
        axpy(t, phi[i].data(), (*grads)[k].data(), d);
      }
    }
  }
  return loss;
}

}  // namespace

double scl_loss(const std::vector<Vector>& embeddings,
                const std::vector<int>& hard_labels, double tau,
                bool normalize_embeddings) {
  if (embeddings.size() < 2) {
    throw std::runtime_error("scl_loss: batch must contain at least 2 instances");
  }
  if (embeddings.size() != hard_labels.size()) {
    throw std::runtime_error("scl_loss: embedding and label counts differ");
  }
  if (tau <= 0.0) throw std::runtime_error("scl_loss: temperature must be > 0");
  if (normalize_embeddings) {
    return scl_core(normalized_copies(embeddings), hard_labels, tau, nullptr);
  }
  return scl_core(embeddings, hard_labels, tau, nullptr);
}

namespace {

// d(loss)/d(logits) for beta1 * CE / B + beta3 * MSE / B on one instance,
// routed through the softmax Jacobian. dp holds d(loss)/d(probs).
void logits_grad_from_probs_grad(const SoftLabel& probs, const Vector& dp,
                                 Vector& dg) {
  int c_count = probs.size();
  double w = 0.0;
  for (int c = 0; c < c_count; ++c) w += dp[c] * probs.probs[c];
  dg.resize(c_count);
  for (int c = 0; c < c_count; ++c) dg[c] = probs.probs[c] * (dp[c] - w);
}

SoftLabel hard_one_hot(const SoftLabel& y) {
  SoftLabel h;
  h.probs.assign(y.size(), 0.0);
  h.probs[argmax_index(y)] = 1.0;
  return h;
}

LossBreakdown combined_core(const std::vector<Vector>& logits,
                            const std::vector<Vector>& embeddings,
                            const std::vector<SoftLabel>& targets,
                            const LossWeights& w, std::vector<Vector>* d_logits,
                            std::vector<Vector>* d_embeddings) {
  size_t batch = logits.size();
  if (batch == 0) throw std::runtime_error("combined_loss: empty batch");
  if (embeddings.size() != batch || targets.size() != batch) {
    throw std::runtime_error("combined_loss: batch segments have unequal sizes");
  }
  if (w.temperature <= 0.0) {
    throw std::runtime_error("combined_loss: temperature must be > 0");
  }
  if (!(w.beta_ce > 0.0 || w.beta_scl > 0.0 || w.beta_mse > 0.0)) {
    throw std::runtime_error("combined_loss: at least one weight must be > 0");
  }

  LossBreakdown out;
  int c_count = targets[0].size();
  Vector dp(c_count), dg;
  if (d_logits) d_logits->assign(batch, Vector(c_count, 0.0));

  for (size_t i = 0; i < batch; ++i) {
    SoftLabel probs = softmax(logits[i]);
    const SoftLabel& y = targets[i];
    SoftLabel y_ce = w.hard_label_ce ? hard_one_hot(y) : y;
    out.ce += ce_loss(y_ce, probs);
    out.mse += mse_loss(y, probs);
    if (d_logits) {
      for (int c = 0; c < c_count; ++c) {
        double g_ce = 0.0;
        if (probs.probs[c] >= kLogClamp) {
          g_ce = -y_ce.probs[c] / probs.probs[c];
        }
        double g_mse = 2.0 * (probs.probs[c] - y.probs[c]) / c_count;
        dp[c] = (w.beta_ce * g_ce + w.beta_mse * g_mse) / static_cast<double>(batch);
      }
      logits_grad_from_probs_grad(probs, dp, dg);
      (*d_logits)[i] = dg;
    }
  }
  out.ce /= static_cast<double>(batch);
  out.mse /= static_cast<double>(batch);

  if (d_embeddings) d_embeddings->assign(batch, Vector(embeddings[0].size(), 0.0));
  if (batch >= 2) {
    std::vector<int> hard(batch);
    for (size_t i = 0; i < batch; ++i) hard[i] = argmax_index(targets[i]);
    std::vector<Vector> phi_grads;
    if (w.normalize_embeddings) {
      std::vector<Vector> phi = normalized_copies(embeddings);
      out.scl = scl_core(phi, hard, w.temperature,
                         d_embeddings ? &phi_grads : nullptr);
      if (d_embeddings) {
        for (size_t i = 0; i < batch; ++i) {
          const Vector& e = embeddings[i];
          int d = static_cast<int>(e.size());
          double norm = std::sqrt(dot(e.data(), e.data(), d));
          norm = std::max(norm, 1e-12);
          double along = dot(phi_grads[i].data(), phi[i].data(), d);
          for (int j = 0; j < d; ++j) {
            (*d_embeddings)[i][j] =
                w.beta_scl * (phi_grads[i][j] - along * phi[i][j]) / norm;
          }
        }
      }
    } else {
      out.scl = scl_core(embeddings, hard, w.temperature,
                         d_embeddings ? &phi_grads : nullptr);
      if (d_embeddings) {
        for (size_t i = 0; i < batch; ++i) {
          axpy(w.beta_scl, phi_grads[i].data(), (*d_embeddings)[i].data(),
               static_cast<int>(embeddings[0].size()));
        }
      }
    }
  }
  // A single-instance batch has no pairs; the contrastive term is 0.

  out.total = w.beta_ce * out.ce + w.beta_scl * out.scl + w.beta_mse * out.mse;
  return out;
}

}  // namespace

LossBreakdown combined_loss(const std::vector<Vector>& logits,
                            const std::vector<Vector>& embeddings,
                            const std::vector<SoftLabel>& targets,
                            const LossWeights& weights) {
  return combined_core(logits, embeddings, targets, weights, nullptr, nullptr);
}

LossBreakdown combined_loss_backward(const std::vector<Vector>& logits,
                                     const std::vector<Vector>& embeddings,
                                     const std::vector<SoftLabel>& targets,
                                     const LossWeights& weights,
                                     std::vector<Vector>& d_logits,
                                     std::vector<Vector>& d_embeddings) {
  return combined_core(logits, embeddings, targets, weights, &d_logits,
                       &d_embeddings);
}

}  // namespace tandem
