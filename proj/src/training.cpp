#include "tandem/training.hpp"

#include <algorithm>
#include <stdexcept>

#include "tandem/threading.hpp"

namespace tandem {

void add_into(std::vector<TensorRef>& dst, std::vector<TensorRef>& src) {
  if (dst.size() != src.size()) {
    throw std::runtime_error("add_into: tensor lists differ in length");
  }
  for (size_t t = 0; t < dst.size(); ++t) {
    Vector& d = *dst[t].values;
    const Vector& s = *src[t].values;
    for (size_t i = 0; i < d.size(); ++i) d[i] += s[i];
  }
}

namespace {

void zero_tensors(std::vector<TensorRef>& refs) {
  for (auto& ref : refs) ref.values->assign(ref.values->size(), 0.0);
}

int chunk_count(int batch) {
  return (batch + kGradChunkSize - 1) / kGradChunkSize;
}

}  // namespace

LossBreakdown model_batch_gradients(const std::vector<const EncodedInstance*>& batch,
                                    const ModelParams& params,
                                    const LossWeights& weights, ModelParams& grads,
                                    TrainWorkspace& ws) {
  int b = static_cast<int>(batch.size());
  if (b == 0) throw std::runtime_error("model_batch_gradients: empty batch");
  if (params.encoder_frozen) {
    throw std::runtime_error(
        "model_batch_gradients: encoder is frozen; use the head-only path");
  }
  ws.caches.resize(b);
  ws.tanh_out.resize(b);
  ws.logits.resize(b);
  ws.cls.resize(b);
  ws.targets.resize(b);

  parallel_for(b, [&](int i) {
    const EncodedInstance& inst = *batch[i];
    encoder_forward(inst.tokens, params.encoder, ws.caches[i]);
    const Matrix& hidden = ws.caches[i].hidden;
    ws.cls[i].assign(hidden.row(0), hidden.row(0) + hidden.cols);
    head_forward(params.head, ws.cls[i], ws.tanh_out[i], ws.logits[i]);
  });
  for (int i = 0; i < b; ++i) {
    if (!batch[i]->label.has_value()) {
      throw std::runtime_error("model_batch_gradients: instance " + batch[i]->id +
                               " has no label");
    }
    ws.targets[i] = *batch[i]->label;
  }

  LossBreakdown loss = combined_loss_backward(ws.logits, ws.cls, ws.targets,
                                              weights, ws.d_logits,
                                              ws.d_embeddings);

  int chunks = chunk_count(b);
  while (static_cast<int>(ws.model_chunks.size()) < chunks) {
    ws.model_chunks.push_back(zeros_like(params));
  }
  parallel_for(chunks, [&](int c) {
    ModelParams& cg = ws.model_chunks[c];
    std::vector<TensorRef> refs;
    collect_tensors(cg, refs, /*include_encoder=*/true);
    zero_tensors(refs);
    int begin = c * kGradChunkSize;
    int end = std::min(b, begin + kGradChunkSize);
    Vector d_repr;
    Matrix d_hidden;
    for (int i = begin; i < end; ++i) {
      head_backward(params.head, ws.cls[i], ws.tanh_out[i], ws.d_logits[i],
                    cg.head, d_repr);
      axpy(1.0, ws.d_embeddings[i].data(), d_repr.data(),
           static_cast<int>(d_repr.size()));
      const EncoderCache& cache = ws.caches[i];
      d_hidden.resize(cache.hidden.rows, cache.hidden.cols);
      double* row0 = d_hidden.row(0);
      for (size_t j = 0; j < d_repr.size(); ++j) row0[j] = d_repr[j];
      encoder_backward(params.encoder, cache, d_hidden, cg.encoder);
    }
  });

  grads = zeros_like(params);
  std::vector<TensorRef> total_refs;
  collect_tensors(grads, total_refs, /*include_encoder=*/true);
  for (int c = 0; c < chunks; ++c) {
    std::vector<TensorRef> chunk_refs;
    collect_tensors(ws.model_chunks[c], chunk_refs, /*include_encoder=*/true);
    add_into(total_refs, chunk_refs);
  }
  return loss;
}

LossBreakdown head_batch_gradients(const std::vector<const Vector*>& reprs,
                                   const std::vector<const SoftLabel*>& targets,
                                   const HeadParams& head,
                                   const LossWeights& weights, HeadParams& grads,
                                   TrainWorkspace& ws) {
  int b = static_cast<int>(reprs.size());
  if (b == 0) throw std::runtime_error("head_batch_gradients: empty batch");
  if (targets.size() != reprs.size()) {
    throw std::runtime_error("head_batch_gradients: target count mismatch");
  }
  ws.tanh_out.resize(b);
  ws.logits.resize(b);
  ws.cls.resize(b);
  ws.targets.resize(b);
  parallel_for(b, [&](int i) {
    ws.cls[i] = *reprs[i];
    head_forward(head, ws.cls[i], ws.tanh_out[i], ws.logits[i]);
  });
  for (int i = 0; i < b; ++i) ws.targets[i] = *targets[i];

  LossBreakdown loss = combined_loss_backward(ws.logits, ws.cls, ws.targets,
                                              weights, ws.d_logits,
                                              ws.d_embeddings);

  int chunks = chunk_count(b);
  while (static_cast<int>(ws.head_chunks.size()) < chunks) {
    ws.head_chunks.push_back(zeros_like(head));
  }
  parallel_for(chunks, [&](int c) {
    HeadParams& cg = ws.head_chunks[c];
    std::vector<TensorRef> refs;
    collect_tensors(cg, "", refs);
    zero_tensors(refs);
    int begin = c * kGradChunkSize;
    int end = std::min(b, begin + kGradChunkSize);
    Vector d_repr;
    for (int i = begin; i < end; ++i) {
      // The representation is an input here, so d_repr is discarded.
      head_backward(head, ws.cls[i], ws.tanh_out[i], ws.d_logits[i], cg, d_repr);
    }
  });

  grads = zeros_like(head);
  std::vector<TensorRef> total_refs;
  collect_tensors(grads, "", total_refs);
  for (int c = 0; c < chunks; ++c) {
    std::vector<TensorRef> chunk_refs;
    collect_tensors(ws.head_chunks[c], "", chunk_refs);
    add_into(total_refs, chunk_refs);
  }
  return loss;
}

}  // namespace tandem
