#include "tandem/mlm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "tandem/classifier.hpp"
#include "tandem/optimizer.hpp"
#include "tandem/rng.hpp"
#include "tandem/threading.hpp"
#include "tandem/tokenizer.hpp"
#include "tandem/training.hpp"

namespace tandem {

MlmHead init_mlm_head(int vocab_size, int d_model, uint64_t seed) {
  Rng rng(seed);
  MlmHead head;
  double bound = 1.0 / std::sqrt(static_cast<double>(d_model));
  head.w.resize(vocab_size, d_model);
  for (double& v : head.w.data) v = rng.next_symmetric(bound);
  head.b.assign(vocab_size, 0.0);
  return head;
}

MlmHead zeros_like(const MlmHead& head) {
  MlmHead g = head;
  g.w.zero();
  g.b.assign(g.b.size(), 0.0);
  return g;
}

void collect_tensors(MlmHead& head, const std::string& prefix,
                     std::vector<TensorRef>& out) {
  out.push_back({prefix + "w", &head.w.data, head.w.rows, head.w.cols});
  out.push_back({prefix + "b", &head.b, 1, static_cast<int>(head.b.size())});
}

namespace {

struct MlmScratch {
  std::vector<EncoderCache> caches;
  std::vector<double> losses;
  std::vector<EncoderParams> enc_chunks;
  std::vector<MlmHead> head_chunks;
};

long total_positions(const std::vector<std::vector<MaskedPosition>>& positions) {
  long n = 0;
  for (const auto& seq : positions) n += static_cast<long>(seq.size());
  return n;
}

// Forward (and optional backward) of the masked-token objective. The loss is
// the mean cross-entropy over all masked positions in the batch; unmasked
// positions contribute nothing.
double mlm_core(const std::vector<TokenSequence>& masked,
                const std::vector<std::vector<MaskedPosition>>& positions,
                const EncoderParams& encoder, const MlmHead& head,
                EncoderParams* enc_grads, MlmHead* head_grads, MlmScratch& ws) {
  if (masked.size() != positions.size()) {
    throw std::runtime_error("mlm: sequence and position counts differ");
  }
  int b = static_cast<int>(masked.size());
  long m_total = total_positions(positions);
  if (m_total == 0) return 0.0;

  ws.caches.resize(b);
  ws.losses.assign(b, 0.0);
  parallel_for(b, [&](int i) {
    encoder_forward(masked[i], encoder, ws.caches[i]);
    double loss = 0.0;
    Vector logits(head.w.rows);
    for (const auto& pos : positions[i]) {
      affine(head.w, ws.caches[i].hidden.row(pos.position), head.b.data(),
             logits.data());
      SoftLabel probs = softmax(logits);
      loss -= std::log(std::max(probs.probs[pos.original_id], 1e-300));
    }
    ws.losses[i] = loss;
  });
  double loss_sum = 0.0;
  for (double l : ws.losses) loss_sum += l;
  double loss = loss_sum / static_cast<double>(m_total);
  if (enc_grads == nullptr) return loss;

  int chunks = (b + kGradChunkSize - 1) / kGradChunkSize;
  while (static_cast<int>(ws.enc_chunks.size()) < chunks) {
    ws.enc_chunks.push_back(zeros_like(encoder));
    ws.head_chunks.push_back(zeros_like(head));
  }
  parallel_for(chunks, [&](int c) {
    EncoderParams& eg = ws.enc_chunks[c];
    MlmHead& hg = ws.head_chunks[c];
    std::vector<TensorRef> refs;
    collect_tensors(eg, "", refs);
    collect_tensors(hg, "", refs);
    for (auto& ref : refs) ref.values->assign(ref.values->size(), 0.0);

    Vector logits(head.w.rows), d_logits(head.w.rows);
    Matrix d_hidden;
    int begin = c * kGradChunkSize;
    int end = std::min(b, begin + kGradChunkSize);
    for (int i = begin; i < end; ++i) {
      if (positions[i].empty()) continue;
      const EncoderCache& cache = ws.caches[i];
      d_hidden.resize(cache.hidden.rows, cache.hidden.cols);
      for (const auto& pos : positions[i]) {
        const double* h = cache.hidden.row(pos.position);
        affine(head.w, h, head.b.data(), logits.data());
        SoftLabel probs = softmax(logits);
        for (int v = 0; v < head.w.rows; ++v) {
          d_logits[v] = probs.probs[v] / static_cast<double>(m_total);
        }
        d_logits[pos.original_id] -= 1.0 / static_cast<double>(m_total);
        affine_backward_params(d_logits.data(), h, hg.w, hg.b.data());
        affine_backward_input(head.w, d_logits.data(), d_hidden.row(pos.position));
      }
      encoder_backward(encoder, cache, d_hidden, eg);
    }
  });

  std::vector<TensorRef> total_refs;
  collect_tensors(*enc_grads, "", total_refs);
  collect_tensors(*head_grads, "", total_refs);
  for (int c = 0; c < chunks; ++c) {
    std::vector<TensorRef> chunk_refs;
    collect_tensors(ws.enc_chunks[c], "", chunk_refs);
    collect_tensors(ws.head_chunks[c], "", chunk_refs);
    add_into(total_refs, chunk_refs);
  }
  return loss;
}

}  // namespace

double mlm_batch_loss(const std::vector<TokenSequence>& masked,
                      const std::vector<std::vector<MaskedPosition>>& positions,
                      const EncoderParams& encoder, const MlmHead& head) {
  MlmScratch ws;
  return mlm_core(masked, positions, encoder, head, nullptr, nullptr, ws);
}

double mlm_batch_gradients(const std::vector<TokenSequence>& masked,
                           const std::vector<std::vector<MaskedPosition>>& positions,
                           const EncoderParams& encoder, const MlmHead& head,
                           EncoderParams& enc_grads, MlmHead& head_grads) {
  MlmScratch ws;
  enc_grads = zeros_like(encoder);
  head_grads = zeros_like(head);
  return mlm_core(masked, positions, encoder, head, &enc_grads, &head_grads, ws);
}

std::vector<MlmEpochStats> pretrain_mlm(const std::vector<TokenSequence>& corpus,
                                        EncoderParams& encoder,
                                        const MlmPretrainConfig& config) {
  if (corpus.empty()) {
    throw std::runtime_error("pretrain_mlm: corpus is empty");
  }
  std::vector<MlmEpochStats> stats;
  if (config.epochs == 0) return stats;

  MlmHead head = init_mlm_head(encoder.config.vocab_size, encoder.config.d_model,
                               derive_seed(config.seed, "mlm-head"));
  EncoderParams enc_grads = zeros_like(encoder);
  MlmHead head_grads = zeros_like(head);

  std::vector<TensorRef> params, grads;
  collect_tensors(encoder, "", params);
  collect_tensors(head, "", params);
  collect_tensors(enc_grads, "", grads);
  collect_tensors(head_grads, "", grads);
  AdamW opt(params, config.learning_rate, config.weight_decay);

  MlmScratch ws;
  int n = static_cast<int>(corpus.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(config.seed, "mlm-shuffle", epoch));
    shuffle(order, shuffle_rng);

    double loss_sum = 0.0;
    long masked_sum = 0;
    for (int start = 0; start < n; start += config.batch_size) {
      int end = std::min(n, start + config.batch_size);
      std::vector<TokenSequence> masked(end - start);
      std::vector<std::vector<MaskedPosition>> positions(end - start);
      for (int i = start; i < end; ++i) {
        int idx = order[i];
        Rng mask_rng(derive_seed(config.seed, "mlm-mask",
                                 static_cast<uint64_t>(epoch) * 1000003ULL + idx));
        TokenSequence seq = corpus[idx];
        for (int t = 0; t < seq.size(); ++t) {
          if (seq.special[t]) continue;
          if (mask_rng.next_double() < config.mask_prob) {
            positions[i - start].push_back({t, seq.ids[t]});
            seq.ids[t] = Vocabulary::kMask;
          }
        }
        masked[i - start] = std::move(seq);
      }
      long m = total_positions(positions);
      if (m == 0) continue;
      for (auto& ref : grads) ref.values->assign(ref.values->size(), 0.0);
      double loss =
          mlm_core(masked, positions, encoder, head, &enc_grads, &head_grads, ws);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("pretrain_mlm: non-finite loss at epoch " +
                                 std::to_string(epoch));
      }
      opt.step(grads);
      loss_sum += loss * static_cast<double>(m);
      masked_sum += m;
    }
    MlmEpochStats s;
    s.epoch = epoch;
    s.mean_loss = masked_sum > 0 ? loss_sum / static_cast<double>(masked_sum) : 0.0;
    s.masked_positions = masked_sum;
    stats.push_back(s);
  }

  for (size_t e = 1; e < stats.size() && e < 3; ++e) {
    if (stats[e].mean_loss > stats[e - 1].mean_loss) {
      std::fprintf(stderr,
                   "[mlm] warning: epoch %d mean loss %.6f did not improve on "
                   "epoch %d (%.6f)\n",
                   stats[e].epoch, stats[e].mean_loss, stats[e - 1].epoch,
                   stats[e - 1].mean_loss);
    }
  }
  return stats;
}

}  // namespace tandem
