#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tandem/corpus.hpp"
#include "tandem/encoder.hpp"

namespace tandem {

// Two linear maps joined by tanh: g = w2 tanh(w1 h + b1) + b2.
struct HeadParams {
  Matrix w1;  // d x d
  Vector b1;
  Matrix w2;  // |C| x d
  Vector b2;

  int d_model() const { return w1.cols; }
  int n_classes() const { return w2.rows; }
};

enum class ModelRole { gold_teacher, masked_teacher, student };

const char* role_name(ModelRole role);
ModelRole role_from_name(const std::string& name);

// Full model: encoder (theta_m) plus classification head (theta_c). The
// student's encoder is frozen after inheritance and never trained.
struct ModelParams {
  EncoderParams encoder;
  HeadParams head;
  ModelRole role = ModelRole::gold_teacher;
  bool encoder_frozen = false;
};

struct Prediction {
  Vector logits;    // g
  SoftLabel probs;  // softmax(g)
  Vector cls_repr;  // h, the encoder [CLS] output (Phi(x))
};

// Symmetric scaled-uniform init, bound 1/sqrt(fan_in); biases zero.
HeadParams init_head(int d_model, int n_classes, uint64_t seed);

HeadParams zeros_like(const HeadParams& params);
ModelParams zeros_like(const ModelParams& params);

void collect_tensors(HeadParams& params, const std::string& prefix,
                     std::vector<TensorRef>& out);
// include_encoder=false collects only the head (frozen-encoder training).
void collect_tensors(ModelParams& params, std::vector<TensorRef>& out,
                     bool include_encoder = true);

// Head-only forward/backward on a precomputed [CLS] representation.
void head_forward(const HeadParams& head, const Vector& cls_repr, Vector& tanh_out,
                  Vector& logits);
// Accumulates head grads and returns d(loss)/d(cls_repr) in d_repr.
void head_backward(const HeadParams& head, const Vector& cls_repr,
                   const Vector& tanh_out, const Vector& d_logits,
                   HeadParams& grads, Vector& d_repr);

Prediction classify(const TokenSequence& x, const ModelParams& params);

// Element-wise map of classify over the batch; order preserved and results
// independent of the worker count.
std::vector<Prediction> predict_batch(const std::vector<TokenSequence>& batch,
                                      const ModelParams& params);

// Copies the gold teacher's encoder into the student (deep copy) and marks
// the student's encoder frozen. The student head is left untouched.
void inherit_encoder(ModelParams& student, const ModelParams& gold_teacher);

// softmax with the usual max-shift; sums to 1 up to rounding.
SoftLabel softmax(const Vector& logits);

}  // namespace tandem
