#include "tandem/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "tandem/optimizer.hpp"
#include "tandem/rng.hpp"
#include "tandem/threading.hpp"
#include "tandem/training.hpp"

namespace tandem {

using nlohmann::json;

const char* selection_metric_name(SelectionMetric metric) {
  return metric == SelectionMetric::accuracy ? "accuracy" : "macro_f1";
}

SelectionMetric selection_metric_from_name(const std::string& name) {
  if (name == "accuracy") return SelectionMetric::accuracy;
  if (name == "macro_f1") return SelectionMetric::macro_f1;
  throw std::runtime_error("unknown selection metric: " + name);
}

const char* strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::ours: return "ours";
    case StrategyKind::gold_only: return "gold_only";
    case StrategyKind::masked_only: return "masked_only";
    case StrategyKind::combined: return "combined";
    case StrategyKind::equal_w: return "equal_w";
    case StrategyKind::ref_gold: return "ref_gold";
  }
  return "unknown";
}

StrategyKind strategy_from_name(const std::string& name) {
  if (name == "ours") return StrategyKind::ours;
  if (name == "gold_only") return StrategyKind::gold_only;
  if (name == "masked_only") return StrategyKind::masked_only;
  if (name == "combined") return StrategyKind::combined;
  if (name == "equal_w") return StrategyKind::equal_w;
  if (name == "ref_gold") return StrategyKind::ref_gold;
  throw std::runtime_error("unknown strategy: " + name);
}

std::vector<SoftLabel> gold_labels(const std::vector<EncodedInstance>& data) {
  std::vector<SoftLabel> labels;
  labels.reserve(data.size());
  for (const auto& inst : data) {
    if (!inst.label.has_value()) {
      throw std::runtime_error("instance " + inst.id + " has no gold label");
    }
    labels.push_back(*inst.label);
  }
  return labels;
}

std::vector<SoftLabel> predict_probs(const ModelParams& params,
                                     const std::vector<EncodedInstance>& data) {
  std::vector<SoftLabel> probs(data.size());
  parallel_for(static_cast<int>(data.size()), [&](int i) {
    probs[i] = classify(data[i].tokens, params).probs;
  });
  return probs;
}

std::vector<Vector> compute_cls_reprs(const EncoderParams& encoder,
                                      const std::vector<EncodedInstance>& data) {
  std::vector<Vector> reprs(data.size());
  parallel_for(static_cast<int>(data.size()), [&](int i) {
    reprs[i] = encode_cls(data[i].tokens, encoder);
  });
  return reprs;
}

std::vector<SoftLabel> head_predict_probs(const HeadParams& head,
                                          const std::vector<Vector>& reprs) {
  std::vector<SoftLabel> probs(reprs.size());
  parallel_for(static_cast<int>(reprs.size()), [&](int i) {
    Vector tanh_out, logits;
    head_forward(head, reprs[i], tanh_out, logits);
    probs[i] = softmax(logits);
  });
  return probs;
}

EvaluationReport evaluate_model(const ModelParams& params,
                                const std::vector<EncodedInstance>& data,
                                const ClassSet& classes,
                                bool mse_divide_by_classes) {
  return evaluate(predict_probs(params, data), gold_labels(data), classes,
                  mse_divide_by_classes);
}

namespace {

double metric_value(SelectionMetric metric, double acc, double mf1) {
  return metric == SelectionMetric::accuracy ? acc : mf1;
}

void emit(const MetricsSink& sink, const json& record) {
  if (sink) sink(record.dump());
}

json epoch_json(const std::string& phase, const EpochRecord& rec) {
  return json{{"phase", phase},
              {"epoch", rec.epoch},
              {"train_loss", rec.train_loss},
              {"ce", rec.ce},
              {"scl", rec.scl},
              {"mse", rec.mse},
              {"dev_accuracy", rec.dev_accuracy},
              {"dev_macro_f1", rec.dev_macro_f1},
              {"selected", rec.selected}};
}

}  // namespace

TeacherRunResult train_teacher(const std::vector<EncodedInstance>& data,
                               ModelParams& params, const TrainingConfig& cfg,
                               const LossWeights& weights,
                               const std::vector<EncodedInstance>& dev,
                               const ClassSet& classes, uint64_t seed,
                               const std::string& phase,
                               const MetricsSink& sink) {
  if (data.empty()) {
    throw std::runtime_error(phase + ": training data is empty");
  }
  if (params.encoder_frozen) {
    throw std::runtime_error(phase + ": cannot fine-tune a frozen encoder");
  }
  TeacherRunResult result;
  if (cfg.epochs == 0) return result;

  std::vector<SoftLabel> dev_golds = gold_labels(dev);

  std::vector<TensorRef> param_refs;
  collect_tensors(params, param_refs, /*include_encoder=*/true);
  AdamW opt(param_refs, cfg.learning_rate, cfg.weight_decay);

  ModelParams grads;
  TrainWorkspace ws;
  ModelParams best = params;
  double best_metric = -1.0;

  int n = static_cast<int>(data.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(seed, "shuffle", static_cast<uint64_t>(epoch)));
    shuffle(order, shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    double weighted_loss = 0.0, weighted_ce = 0.0, weighted_scl = 0.0,
           weighted_mse = 0.0;
    int batch_no = 0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      ++batch_no;
      int end = std::min(n, start + cfg.batch_size);
      std::vector<const EncodedInstance*> batch;
      batch.reserve(end - start);
      for (int i = start; i < end; ++i) batch.push_back(&data[order[i]]);

      LossBreakdown loss = model_batch_gradients(batch, params, weights, grads, ws);
      if (!std::isfinite(loss.total)) {
        throw std::runtime_error(phase + ": non-finite loss at epoch " +
                                 std::to_string(epoch) + " batch " +
                                 std::to_string(batch_no));
      }
      std::vector<TensorRef> grad_refs;
      collect_tensors(grads, grad_refs, /*include_encoder=*/true);
      opt.step(grad_refs);

      double b = static_cast<double>(batch.size());
      weighted_loss += loss.total * b;
      weighted_ce += loss.ce * b;
      weighted_scl += loss.scl * b;
      weighted_mse += loss.mse * b;
    }
    rec.train_loss = weighted_loss / n;
    rec.ce = weighted_ce / n;
    rec.scl = weighted_scl / n;
    rec.mse = weighted_mse / n;

    std::vector<SoftLabel> dev_preds = predict_probs(params, dev);
    rec.dev_accuracy = accuracy(dev_preds, dev_golds);
    rec.dev_macro_f1 = macro_f1(dev_preds, dev_golds, classes.size());

    double metric = metric_value(cfg.selection, rec.dev_accuracy, rec.dev_macro_f1);
    if (metric > best_metric) {  // ties keep the earliest epoch
      best_metric = metric;
      best = params;
      result.best_epoch = epoch;
      rec.selected = true;
    }
    result.epochs.push_back(rec);
    emit(sink, epoch_json(phase, rec));
  }
  params = best;
  return result;
}

SoftLabel joint_score_labels(const SoftLabel& gt, const SoftLabel& mt,
                             double gamma) {
  if (gamma < 0.0 || gamma > 1.0) {
    throw std::runtime_error("gamma must lie in [0,1]");
  }
  if (gt.size() != mt.size()) {
    throw std::runtime_error("joint_score: teacher score lengths differ");
  }
  SoftLabel out;
  out.probs.resize(gt.size());
  for (int c = 0; c < gt.size(); ++c) {
    out.probs[c] = gamma * gt.probs[c] + (1.0 - gamma) * mt.probs[c];
  }
  return out;
}

SoftLabel joint_score(const TokenSequence& x, const ModelParams& gold_teacher,
                      const ModelParams& masked_teacher, double gamma) {
  if (!(gold_teacher.encoder.config == masked_teacher.encoder.config)) {
    throw std::runtime_error("joint_score: teacher encoder configurations differ");
  }
  SoftLabel gt = classify(x, gold_teacher).probs;
  SoftLabel mt = classify(x, masked_teacher).probs;
  return joint_score_labels(gt, mt, gamma);
}

PseudoLabelResult assign_pseudo_labels(
    const std::vector<EncodedInstance>& augmented_unlabeled,
    const ModelParams& gold_teacher, const ModelParams& masked_teacher,
    double gamma) {
  if (augmented_unlabeled.empty()) {
    throw std::runtime_error("assign_pseudo_labels: augmented set is empty");
  }
  if (!(gold_teacher.encoder.config == masked_teacher.encoder.config)) {
    throw std::runtime_error(
        "assign_pseudo_labels: teacher encoder configurations differ");
  }
  PseudoLabelResult result;
  result.gold_scores = predict_probs(gold_teacher, augmented_unlabeled);
  result.masked_scores = predict_probs(masked_teacher, augmented_unlabeled);
  result.pseudo_labeled = augmented_unlabeled;
  for (size_t i = 0; i < result.pseudo_labeled.size(); ++i) {
    result.pseudo_labeled[i].label =
        joint_score_labels(result.gold_scores[i], result.masked_scores[i], gamma);
  }
  return result;
}

SoftLabel refine_scores(const SoftLabel& student_score,
                        const SoftLabel& reference_score, int iteration_index,
                        int total_iterations, double alpha) {
  if (iteration_index < 1 || iteration_index > total_iterations - 1) {
    throw std::runtime_error("refine_scores: iteration index " +
                             std::to_string(iteration_index) +
                             " outside [1, N-1] for N = " +
                             std::to_string(total_iterations));
  }
  if (student_score.size() != reference_score.size()) {
    throw std::runtime_error("refine_scores: score lengths differ");
  }
  double lambda = static_cast<double>(iteration_index) /
                  static_cast<double>(total_iterations);
  SoftLabel out;
  out.probs.resize(student_score.size());
  for (int c = 0; c < student_score.size(); ++c) {
    out.probs[c] = alpha * ((1.0 + lambda) * student_score.probs[c] +
                            (1.0 - lambda) * reference_score.probs[c]);
  }
  return out;
}

BootstrapResult train_student_bootstrap(
    const std::vector<EncodedInstance>& labeled,
    std::vector<EncodedInstance>& pseudo_labeled,
    const std::vector<SoftLabel>& reference_scores, ModelParams& student,
    const ScoringConfig& scoring, const TrainingConfig& cfg,
    const LossWeights& weights, const std::vector<EncodedInstance>& dev,
    const ClassSet& classes, uint64_t seed, const MetricsSink& sink,
    const IterationCallback& on_iteration) {
  if (!student.encoder_frozen) {
    throw std::runtime_error(
        "train_student_bootstrap: student encoder must be inherited and frozen");
  }
  if (labeled.empty() && pseudo_labeled.empty()) {
    throw std::runtime_error("train_student_bootstrap: training set is empty");
  }
  if (reference_scores.size() != pseudo_labeled.size()) {
    throw std::runtime_error(
        "train_student_bootstrap: reference scores do not align with G_L");
  }
  if (scoring.iterations < 1) {
    throw std::runtime_error("train_student_bootstrap: iterations must be >= 1");
  }

  // The encoder is frozen, so every representation is fixed for the whole
  // bootstrap; compute them once.
  std::vector<Vector> labeled_reprs = compute_cls_reprs(student.encoder, labeled);
  std::vector<Vector> pseudo_reprs =
      compute_cls_reprs(student.encoder, pseudo_labeled);
  std::vector<Vector> dev_reprs = compute_cls_reprs(student.encoder, dev);
  std::vector<SoftLabel> dev_golds = gold_labels(dev);

  int n_labeled = static_cast<int>(labeled.size());
  int n_total = n_labeled + static_cast<int>(pseudo_labeled.size());

  std::vector<TensorRef> head_refs;
  collect_tensors(student.head, "", head_refs);
  HeadParams grads;
  TrainWorkspace ws;

  BootstrapResult result;
  int n_iters = scoring.iterations;
  for (int iter = 1; iter <= n_iters; ++iter) {
    // Optimizer state starts fresh each iteration.
    AdamW opt(head_refs, cfg.learning_rate, cfg.weight_decay);
    uint64_t iter_seed = derive_seed(seed, "iteration", static_cast<uint64_t>(iter));

    IterationRecord iter_rec;
    iter_rec.iteration = iter;
    HeadParams best_head = student.head;
    double best_metric = -1.0;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
      std::vector<int> order(n_total);
      std::iota(order.begin(), order.end(), 0);
      Rng shuffle_rng(derive_seed(iter_seed, "shuffle", static_cast<uint64_t>(epoch)));
      shuffle(order, shuffle_rng);

      EpochRecord rec;
      rec.epoch = epoch;
      double weighted_loss = 0.0, weighted_ce = 0.0, weighted_scl = 0.0,
             weighted_mse = 0.0;
      int batch_no = 0;
      for (int start = 0; start < n_total; start += cfg.batch_size) {
        ++batch_no;
        int end = std::min(n_total, start + cfg.batch_size);
        std::vector<const Vector*> reprs;
        std::vector<const SoftLabel*> targets;
        reprs.reserve(end - start);
        targets.reserve(end - start);
        for (int i = start; i < end; ++i) {
          int idx = order[i];
          if (idx < n_labeled) {
            reprs.push_back(&labeled_reprs[idx]);
            targets.push_back(&*labeled[idx].label);
          } else {
            reprs.push_back(&pseudo_reprs[idx - n_labeled]);
            targets.push_back(&*pseudo_labeled[idx - n_labeled].label);
          }
        }
        LossBreakdown loss =
            head_batch_gradients(reprs, targets, student.head, weights, grads, ws);
        if (!std::isfinite(loss.total)) {
          throw std::runtime_error("student: non-finite loss at iteration " +
                                   std::to_string(iter) + " epoch " +
                                   std::to_string(epoch) + " batch " +
                                   std::to_string(batch_no));
        }
        std::vector<TensorRef> grad_refs;
        collect_tensors(grads, "", grad_refs);
        opt.step(grad_refs);

        double b = static_cast<double>(reprs.size());
        weighted_loss += loss.total * b;
        weighted_ce += loss.ce * b;
        weighted_scl += loss.scl * b;
        weighted_mse += loss.mse * b;
      }
      rec.train_loss = weighted_loss / n_total;
      rec.ce = weighted_ce / n_total;
      rec.scl = weighted_scl / n_total;
      rec.mse = weighted_mse / n_total;

      std::vector<SoftLabel> dev_preds = head_predict_probs(student.head, dev_reprs);
      rec.dev_accuracy = accuracy(dev_preds, dev_golds);
      rec.dev_macro_f1 = macro_f1(dev_preds, dev_golds, classes.size());
      double metric = metric_value(cfg.selection, rec.dev_accuracy, rec.dev_macro_f1);
      if (metric > best_metric) {
        best_metric = metric;
        best_head = student.head;
        iter_rec.best_epoch = epoch;
        rec.selected = true;
      }
      iter_rec.epochs.push_back(rec);
      emit(sink, [&] {
        json j = epoch_json("student", rec);
        j["iteration"] = iter;
        return j;
      }());
    }

    // Carry the dev-best epoch of this iteration forward.
    if (iter_rec.best_epoch >= 0) student.head = best_head;
    iter_rec.dev_metric = best_metric;

    if (on_iteration) on_iteration(iter, student);

    if (iter < n_iters) {
      double lambda = static_cast<double>(iter) / static_cast<double>(n_iters);
      std::vector<SoftLabel> student_scores =
          head_predict_probs(student.head, pseudo_reprs);
      for (size_t j = 0; j < pseudo_labeled.size(); ++j) {
        pseudo_labeled[j].label = refine_scores(student_scores[j],
                                                reference_scores[j], iter,
                                                n_iters, scoring.alpha);
      }
      result.lambdas.push_back(lambda);
      iter_rec.lambda = lambda;
      emit(sink, json{{"phase", "student"},
                      {"iteration", iter},
                      {"event", "refine"},
                      {"lambda", lambda}});
    }
    result.iterations.push_back(std::move(iter_rec));
  }
  return result;
}

}  // namespace tandem
