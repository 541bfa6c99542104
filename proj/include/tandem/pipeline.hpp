#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tandem/augment.hpp"
#include "tandem/classifier.hpp"
#include "tandem/losses.hpp"
#include "tandem/metrics.hpp"

namespace tandem {

// Joint scoring and bootstrap refinement knobs. lambda = i / iterations for
// refinement pass i, so refinements exist only for iterations >= 2.
struct ScoringConfig {
  double gamma = 0.5;
  double alpha = 0.5;
  int iterations = 5;  // N
};

enum class SelectionMetric { accuracy, macro_f1 };

const char* selection_metric_name(SelectionMetric metric);
SelectionMetric selection_metric_from_name(const std::string& name);

struct TrainingConfig {
  int epochs = 5;  // k_e: per bootstrap iteration for the student
  int batch_size = 128;
  double learning_rate = 2e-6;
  double weight_decay = 0.01;
  SelectionMetric selection = SelectionMetric::accuracy;
};

enum class StrategyKind { ours, gold_only, masked_only, combined, equal_w, ref_gold };

const char* strategy_name(StrategyKind kind);
StrategyKind strategy_from_name(const std::string& name);

// Receives complete JSON lines for the run's metrics stream. May be empty.
using MetricsSink = std::function<void(const std::string& line)>;

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double ce = 0.0;
  double scl = 0.0;
  double mse = 0.0;
  double dev_accuracy = 0.0;
  double dev_macro_f1 = 0.0;
  bool selected = false;
};

struct TeacherRunResult {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;  // -1 when no epoch ran
};

// Mini-batch training with AdamW and seeded shuffling; returns the
// parameters of the dev-best epoch (ties broken by the earliest epoch).
TeacherRunResult train_teacher(const std::vector<EncodedInstance>& data,
                               ModelParams& params, const TrainingConfig& cfg,
                               const LossWeights& weights,
                               const std::vector<EncodedInstance>& dev,
                               const ClassSet& classes, uint64_t seed,
                               const std::string& phase,
                               const MetricsSink& sink = nullptr);

// yhat = gamma * yhat_gt + (1 - gamma) * yhat_mt.
SoftLabel joint_score_labels(const SoftLabel& gt, const SoftLabel& mt,
                             double gamma);
SoftLabel joint_score(const TokenSequence& x, const ModelParams& gold_teacher,
                      const ModelParams& masked_teacher, double gamma);

// Teacher predictions for every augmented instance, captured once so the
// bootstrap can reuse them.
struct PseudoLabelResult {
  std::vector<EncodedInstance> pseudo_labeled;  // G_L, same order as A_U
  std::vector<SoftLabel> gold_scores;           // yhat_GT per element
  std::vector<SoftLabel> masked_scores;         // yhat_MT per element
};

PseudoLabelResult assign_pseudo_labels(
    const std::vector<EncodedInstance>& augmented_unlabeled,
    const ModelParams& gold_teacher, const ModelParams& masked_teacher,
    double gamma);

// yhat = alpha * ((1 + lambda) * yhat_student + (1 - lambda) * yhat_ref)
// with lambda = iteration_index / total_iterations. iteration_index must lie
// in [1, total_iterations - 1].
SoftLabel refine_scores(const SoftLabel& student_score,
                        const SoftLabel& reference_score, int iteration_index,
                        int total_iterations, double alpha);

struct IterationRecord {
  int iteration = 0;  // 1-based
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double dev_metric = 0.0;
  std::optional<double> lambda;  // refinement applied after this iteration
};

struct BootstrapResult {
  std::vector<IterationRecord> iterations;
  std::vector<double> lambdas;  // in application order
};

using IterationCallback = std::function<void(int iteration, const ModelParams&)>;

// Bootstrapped student training on X_L union G_L with a frozen encoder. The
// labels of pseudo_labeled are refined in place after every iteration except
// the last; instances are never added or removed.
BootstrapResult train_student_bootstrap(
    const std::vector<EncodedInstance>& labeled,
    std::vector<EncodedInstance>& pseudo_labeled,
    const std::vector<SoftLabel>& reference_scores, ModelParams& student,
    const ScoringConfig& scoring, const TrainingConfig& cfg,
    const LossWeights& weights, const std::vector<EncodedInstance>& dev,
    const ClassSet& classes, uint64_t seed, const MetricsSink& sink = nullptr,
    const IterationCallback& on_iteration = nullptr);

// Batch helpers (parallel, order-preserving).
std::vector<SoftLabel> predict_probs(const ModelParams& params,
                                     const std::vector<EncodedInstance>& data);
std::vector<Vector> compute_cls_reprs(const EncoderParams& encoder,
                                      const std::vector<EncodedInstance>& data);
std::vector<SoftLabel> head_predict_probs(const HeadParams& head,
                                          const std::vector<Vector>& reprs);

std::vector<SoftLabel> gold_labels(const std::vector<EncodedInstance>& data);

EvaluationReport evaluate_model(const ModelParams& params,
                                const std::vector<EncodedInstance>& data,
                                const ClassSet& classes,
                                bool mse_divide_by_classes = true);

}  // namespace tandem
