#include "tandem/classifier.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "tandem/rng.hpp"
#include "tandem/threading.hpp"

namespace tandem {

const char* role_name(ModelRole role) {
  switch (role) {
    case ModelRole::gold_teacher: return "gold_teacher";
    case ModelRole::masked_teacher: return "masked_teacher";
    case ModelRole::student: return "student";
  }
  return "unknown";
}

ModelRole role_from_name(const std::string& name) {
  if (name == "gold_teacher") return ModelRole::gold_teacher;
  if (name == "masked_teacher") return ModelRole::masked_teacher;
  if (name == "student") return ModelRole::student;
  throw std::runtime_error("unknown model role: " + name);
}

HeadParams init_head(int d_model, int n_classes, uint64_t seed) {
  if (d_model < 1 || n_classes < 1) {
    throw std::runtime_error("init_head: dimensions must be >= 1");
  }
  Rng rng(seed);
  HeadParams head;
  double bound = 1.0 / std::sqrt(static_cast<double>(d_model));
  head.w1.resize(d_model, d_model);
  for (double& v : head.w1.data) v = rng.next_symmetric(bound);
  head.b1.assign(d_model, 0.0);
  head.w2.resize(n_classes, d_model);
  for (double& v : head.w2.data) v = rng.next_symmetric(bound);
  head.b2.assign(n_classes, 0.0);
  return head;
}

HeadParams zeros_like(const HeadParams& params) {
  HeadParams g = params;
  g.w1.zero();
  g.b1.assign(g.b1.size(), 0.0);
  g.w2.zero();
  g.b2.assign(g.b2.size(), 0.0);
  return g;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams g;
  g.encoder = zeros_like(params.encoder);
  g.head = zeros_like(params.head);
  g.role = params.role;
  g.encoder_frozen = params.encoder_frozen;
  return g;
}

void collect_tensors(HeadParams& p, const std::string& prefix,
                     std::vector<TensorRef>& out) {
  out.push_back({prefix + "w1", &p.w1.data, p.w1.rows, p.w1.cols});
  out.push_back({prefix + "b1", &p.b1, 1, static_cast<int>(p.b1.size())});
  out.push_back({prefix + "w2", &p.w2.data, p.w2.rows, p.w2.cols});
  out.push_back({prefix + "b2", &p.b2, 1, static_cast<int>(p.b2.size())});
}

void collect_tensors(ModelParams& p, std::vector<TensorRef>& out,
                     bool include_encoder) {
  if (include_encoder) collect_tensors(p.encoder, "encoder.", out);
  collect_tensors(p.head, "head.", out);
}

SoftLabel softmax(const Vector& logits) {
  SoftLabel out;
  out.probs.resize(logits.size());
  double maxv = -1e300;
  for (double g : logits) maxv = std::max(maxv, g);
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out.probs[i] = std::exp(logits[i] - maxv);
    sum += out.probs[i];
  }
  for (double& p : out.probs) p /= sum;
  return out;
}

void head_forward(const HeadParams& head, const Vector& cls_repr, Vector& tanh_out,
                  Vector& logits) {
  int d = head.d_model();
  if (static_cast<int>(cls_repr.size()) != d) {
    throw std::runtime_error("head_forward: representation length " +
                             std::to_string(cls_repr.size()) +
                             " does not match head width " + std::to_string(d));
  }
  tanh_out.resize(d);
  affine(head.w1, cls_repr.data(), head.b1.data(), tanh_out.data());
  for (double& v : tanh_out) v = std::tanh(v);
  logits.resize(head.n_classes());
  affine(head.w2, tanh_out.data(), head.b2.data(), logits.data());
}

void head_backward(const HeadParams& head, const Vector& cls_repr,
                   const Vector& tanh_out, const Vector& d_logits,
                   HeadParams& grads, Vector& d_repr) {
  int d = head.d_model();
  affine_backward_params(d_logits.data(), tanh_out.data(), grads.w2,
                         grads.b2.data());
  Vector d_tanh(d, 0.0);
  affine_backward_input(head.w2, d_logits.data(), d_tanh.data());
  for (int i = 0; i < d; ++i) d_tanh[i] *= 1.0 - tanh_out[i] * tanh_out[i];
  affine_backward_params(d_tanh.data(), cls_repr.data(), grads.w1,
                         grads.b1.data());
  d_repr.assign(d, 0.0);
  affine_backward_input(head.w1, d_tanh.data(), d_repr.data());
}

Prediction classify(const TokenSequence& x, const ModelParams& params) {
  if (params.head.d_model() != params.encoder.config.d_model) {
    throw std::runtime_error("classify: head width does not match encoder width");
  }
  Prediction pred;
  pred.cls_repr = encode_cls(x, params.encoder);
  Vector tanh_out;
  head_forward(params.head, pred.cls_repr, tanh_out, pred.logits);
  for (double g : pred.logits) {
    if (!std::isfinite(g)) {
      throw std::runtime_error("classify: non-finite logit encountered");
    }
  }
  pred.probs = softmax(pred.logits);
  return pred;
}

std::vector<Prediction> predict_batch(const std::vector<TokenSequence>& batch,
                                      const ModelParams& params) {
  std::vector<Prediction> preds(batch.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;
  parallel_for(static_cast<int>(batch.size()), [&](int i) {
    try {
      preds[i] = classify(batch[i], params);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) {
        try {
          std::throw_with_nested(
              std::runtime_error("predict_batch: instance " + std::to_string(i)));
        } catch (...) {
          failure = std::current_exception();
        }
      }
    }
  });
  if (failure) std::rethrow_exception(failure);
  return preds;
}

void inherit_encoder(ModelParams& student, const ModelParams& gold_teacher) {
  if (!(student.encoder.config == gold_teacher.encoder.config)) {
    throw std::runtime_error(
        "inherit_encoder: student and teacher encoder configurations differ");
  }
  student.encoder = gold_teacher.encoder;  // deep copy
  student.encoder_frozen = true;
}

}  // namespace tandem
