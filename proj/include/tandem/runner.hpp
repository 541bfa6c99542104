#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tandem/checkpoint.hpp"
#include "tandem/config.hpp"
#include "tandem/pipeline.hpp"
#include "tandem/tokenizer.hpp"

namespace tandem {

// Token-level working set: the text bundle after vocabulary construction,
// packing and augmentation.
struct PreparedData {
  ClassSet classes;
  Vocabulary vocab;
  std::vector<EncodedInstance> labeled;    // X_L
  std::vector<EncodedInstance> unlabeled;  // X_U
  std::vector<EncodedInstance> dev;
  std::vector<EncodedInstance> test;
  std::vector<EncodedInstance> augmented_unlabeled;  // A_U
  std::vector<EncodedInstance> augmented_labeled;    // B_L
};

// Generates the synthetic bundle or loads the files-mode dataset.
DatasetBundle obtain_bundle(const PipelineConfig& config);

// Vocabulary from X_L and X_U text, packing, and both augmented sets.
PreparedData prepare_data(const DatasetBundle& bundle,
                          const PipelineConfig& config);

EncodedInstance encode_instance(const DialogueInstance& inst,
                                const Vocabulary& vocab, int max_len);

struct StrategyOutcome {
  StrategyKind kind = StrategyKind::ours;
  ModelParams model;
  EvaluationReport dev_report;
  EvaluationReport test_report;
  std::vector<SoftLabel> dev_predictions;
  std::vector<SoftLabel> test_predictions;
  std::optional<ModelParams> gold_teacher;
  std::optional<ModelParams> masked_teacher;
  BootstrapResult bootstrap;
};

StrategyOutcome run_strategy(StrategyKind kind, const PreparedData& data,
                             const PipelineConfig& config,
                             const MetricsSink& sink = nullptr,
                             const IterationCallback& on_iteration = nullptr);
StrategyOutcome run_strategy(StrategyKind kind, const DatasetBundle& bundle,
                             const PipelineConfig& config,
                             const MetricsSink& sink = nullptr);

// File-based pipeline stages. Each reads its inputs from the run directory
// (or config.data_dir in files mode), writes its own outputs there, and is
// idempotent. Chaining them equals run_pipeline.
void stage_gen_data(const PipelineConfig& config, const std::string& dir);
void stage_augment(const PipelineConfig& config, const std::string& dir);
void stage_pretrain_encoder(const PipelineConfig& config, const std::string& dir);
void stage_train_teacher(const PipelineConfig& config, const std::string& dir,
                         ModelRole role);
void stage_pseudo_label(const PipelineConfig& config, const std::string& dir);
void stage_train_student(const PipelineConfig& config, const std::string& dir);
void stage_finalize(const PipelineConfig& config, const std::string& dir);

// Full run: snapshot, data, augmentation, training per strategy, report.
// Returns a process exit status; failures are reported with the stage name.
int run_pipeline(const PipelineConfig& config);

// Token-level JSONL used for augmented and pseudo-labeled dumps.
void write_encoded_jsonl(const std::string& path,
                         const std::vector<EncodedInstance>& instances,
                         const std::vector<SoftLabel>* gold_scores = nullptr,
                         const std::vector<SoftLabel>* masked_scores = nullptr);
struct EncodedJsonl {
  std::vector<EncodedInstance> instances;
  std::vector<SoftLabel> gold_scores;    // present only in pseudo-label dumps
  std::vector<SoftLabel> masked_scores;
};
EncodedJsonl load_encoded_jsonl(const std::string& path, int n_classes);

void write_predictions(const std::string& path,
                       const std::vector<std::string>& ids,
                       const std::vector<SoftLabel>& probs);

// Aligns a predictions file with a gold JSONL file by id and evaluates.
EvaluationReport evaluate_files(const std::string& pred_path,
                                const std::string& gold_path,
                                const ClassSet& classes,
                                bool mse_divide_by_classes = true);

}  // namespace tandem
