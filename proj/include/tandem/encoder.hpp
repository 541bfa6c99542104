#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tandem/tensor.hpp"

namespace tandem {

struct EncoderConfig {
  int vocab_size = 0;
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 2;
  int max_len = 256;
  int ffn_dim = 256;

  bool operator==(const EncoderConfig&) const = default;
};

// Packed input: [CLS] history tokens [SEP] target tokens. The special mask
// marks the [CLS] and [SEP] positions so augmentation never touches them.
struct TokenSequence {
  std::vector<int> ids;
  std::vector<uint8_t> special;

  int size() const { return static_cast<int>(ids.size()); }
};

// Concatenates history and target with the special tokens. When the packed
// length exceeds max_len the oldest history tokens are dropped first; the
// target is never truncated.
TokenSequence pack_sequence(const std::vector<int>& history_ids,
                            const std::vector<int>& target_ids, int max_len);

struct LayerParams {
  Vector ln1_gain, ln1_bias;
  Matrix wq, wk, wv, wo;  // each d x d
  Vector bq, bk, bv, bo;
  Vector ln2_gain, ln2_bias;
  Matrix w_ff1;  // ffn x d
  Vector b_ff1;
  Matrix w_ff2;  // d x ffn
  Vector b_ff2;
};

// Encoder parameters (the paper-side theta_m): embeddings plus pre-norm
// self-attention blocks with a final normalization.
struct EncoderParams {
  EncoderConfig config;
  Matrix token_embedding;  // vocab x d
  Matrix pos_embedding;    // max_len x d
  std::vector<LayerParams> layers;
  Vector final_gain, final_bias;
};

EncoderParams init_encoder(const EncoderConfig& config, uint64_t seed);

// Gradient container with the same shape as the parameters.
EncoderParams zeros_like(const EncoderParams& params);

// Named views over every parameter tensor, in a fixed order shared by the
// optimizer, the checkpoint format and the gradient checks.
struct TensorRef {
  std::string name;
  std::vector<double>* values;
  int rows;
  int cols;
};
void collect_tensors(EncoderParams& params, const std::string& prefix,
                     std::vector<TensorRef>& out);

struct LayerCache {
  Matrix x_in;
  Matrix ln1_xhat, ln1_out;
  Vector ln1_rstd;
  Matrix q, k, v;
  std::vector<Matrix> attn;  // per head, n x n row-softmax probabilities
  Matrix attn_out;           // concatenated head outputs, before wo
  Matrix x_mid;
  Matrix ln2_xhat, ln2_out;
  Vector ln2_rstd;
  Matrix ffn_pre, ffn_act;
};

struct EncoderCache {
  std::vector<int> ids;
  Matrix x_final;  // residual stream before the final normalization
  Matrix f_xhat;
  Vector f_rstd;
  Matrix hidden;  // n x d output; row 0 is the [CLS] representation
  std::vector<LayerCache> layers;

  int length() const { return static_cast<int>(ids.size()); }
};

// Runs the encoder, filling the cache. Output shape is n x d; the [CLS]
// representation is hidden.row(0). Deterministic given (x, params).
void encoder_forward(const TokenSequence& x, const EncoderParams& params,
                     EncoderCache& cache);

// Convenience wrappers for inference.
Matrix encode(const TokenSequence& x, const EncoderParams& params);
Vector encode_cls(const TokenSequence& x, const EncoderParams& params);

// Accumulates parameter gradients for d(loss)/d(hidden) into grads. The
// cache must come from encoder_forward with the same params.
void encoder_backward(const EncoderParams& params, const EncoderCache& cache,
                      const Matrix& d_hidden, EncoderParams& grads);

}  // namespace tandem
