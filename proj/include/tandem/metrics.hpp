#pragma once

#include <string>
#include <vector>

#include "tandem/corpus.hpp"

namespace tandem {

struct ClassPRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvaluationReport {
  double accuracy = 0.0;
  std::vector<ClassPRF> per_class;
  double macro_f1 = 0.0;
  double mean_jsd = 0.0;
  double mean_mse = 0.0;
  int n_instances = 0;
  std::vector<std::string> classes;
};

// argmax with ties broken by the lowest class index.
int hard_label(const SoftLabel& label);

double accuracy(const std::vector<SoftLabel>& preds,
                const std::vector<SoftLabel>& golds);

// Standard P/R/F1 on hard labels; zero-denominator cases are defined as 0.
ClassPRF class_f1(const std::vector<SoftLabel>& preds,
                  const std::vector<SoftLabel>& golds, int class_index,
                  int n_classes);

double macro_f1(const std::vector<SoftLabel>& preds,
                const std::vector<SoftLabel>& golds, int n_classes);

// Jensen-Shannon divergence with base-2 logs, so the range is [0, 1].
double jsd(const SoftLabel& p, const SoftLabel& q);

// (1/|C|) sum_c (p_c - q_c)^2; divide_by_classes=false drops the 1/|C|.
double distributional_mse(const SoftLabel& p, const SoftLabel& q,
                          bool divide_by_classes = true);

EvaluationReport evaluate(const std::vector<SoftLabel>& preds,
                          const std::vector<SoftLabel>& golds,
                          const ClassSet& classes,
                          bool mse_divide_by_classes = true);

std::string report_to_json_string(const EvaluationReport& report);

}  // namespace tandem
