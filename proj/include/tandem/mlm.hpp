#pragma once

#include <cstdint>
#include <vector>

#include "tandem/encoder.hpp"

namespace tandem {

// Projection from hidden states back onto the vocabulary for the
// masked-language-model objective. Pretraining-only; discarded afterwards.
struct MlmHead {
  Matrix w;  // vocab x d
  Vector b;
};

MlmHead init_mlm_head(int vocab_size, int d_model, uint64_t seed);
MlmHead zeros_like(const MlmHead& head);
void collect_tensors(MlmHead& head, const std::string& prefix,
                     std::vector<TensorRef>& out);

struct MlmPretrainConfig {
  int epochs = 0;
  double mask_prob = 0.15;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  uint64_t seed = 1;
};

struct MlmEpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  long masked_positions = 0;
};

// Masked cross-entropy over the batch: only masked positions contribute;
// positions is the list of (sequence row, original id) pairs.
struct MaskedPosition {
  int position;
  int original_id;
};

// Loss and gradients for one batch of already-masked sequences. Used by
// pretrain_mlm and by the gradient checks.
double mlm_batch_gradients(const std::vector<TokenSequence>& masked,
                           const std::vector<std::vector<MaskedPosition>>& positions,
                           const EncoderParams& encoder, const MlmHead& head,
                           EncoderParams& enc_grads, MlmHead& head_grads);

double mlm_batch_loss(const std::vector<TokenSequence>& masked,
                      const std::vector<std::vector<MaskedPosition>>& positions,
                      const EncoderParams& encoder, const MlmHead& head);

// Trains the encoder with the masked-token objective and reports per-epoch
// mean loss. epochs == 0 leaves the parameters untouched.
std::vector<MlmEpochStats> pretrain_mlm(const std::vector<TokenSequence>& corpus,
                                        EncoderParams& encoder,
                                        const MlmPretrainConfig& config);

}  // namespace tandem
