#pragma once

#include <vector>

#include "tandem/augment.hpp"
#include "tandem/classifier.hpp"
#include "tandem/losses.hpp"

namespace tandem {

// Instances are processed in fixed chunks of this size and chunk gradients
// are reduced in chunk order, so batch gradients are bitwise independent of
// the worker count.
constexpr int kGradChunkSize = 8;

struct TrainWorkspace {
  std::vector<EncoderCache> caches;
  std::vector<Vector> tanh_out;
  std::vector<Vector> logits;
  std::vector<Vector> cls;
  std::vector<SoftLabel> targets;
  std::vector<Vector> d_logits;
  std::vector<Vector> d_embeddings;
  std::vector<ModelParams> model_chunks;
  std::vector<HeadParams> head_chunks;
};

// Batch loss plus gradients through the head and the (unfrozen) encoder.
// grads is overwritten.
LossBreakdown model_batch_gradients(const std::vector<const EncodedInstance*>& batch,
                                    const ModelParams& params,
                                    const LossWeights& weights, ModelParams& grads,
                                    TrainWorkspace& ws);

// Head-only gradients over precomputed [CLS] representations (frozen-encoder
// training). grads is overwritten.
LossBreakdown head_batch_gradients(const std::vector<const Vector*>& reprs,
                                   const std::vector<const SoftLabel*>& targets,
                                   const HeadParams& head,
                                   const LossWeights& weights, HeadParams& grads,
                                   TrainWorkspace& ws);

void add_into(std::vector<TensorRef>& dst, std::vector<TensorRef>& src);

}  // namespace tandem
