#include "tandem/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace tandem {

int hard_label(const SoftLabel& label) {
  int best = 0;
  for (int c = 1; c < label.size(); ++c) {
    if (label.probs[c] > label.probs[best]) best = c;
  }
  return best;
}

namespace {

void check_aligned(const std::vector<SoftLabel>& preds,
                   const std::vector<SoftLabel>& golds) {
  if (preds.size() != golds.size()) {
    throw std::runtime_error("metric inputs have different lengths");
  }
  if (preds.empty()) {
    throw std::runtime_error("metric inputs are empty");
  }
}

}  // namespace

double accuracy(const std::vector<SoftLabel>& preds,
                const std::vector<SoftLabel>& golds) {
  check_aligned(preds, golds);
  int hits = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    if (hard_label(preds[i]) == hard_label(golds[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

ClassPRF class_f1(const std::vector<SoftLabel>& preds,
                  const std::vector<SoftLabel>& golds, int class_index,
                  int n_classes) {
  check_aligned(preds, golds);
  if (class_index < 0 || class_index >= n_classes) {
    throw std::runtime_error("class_f1: unknown class index " +
                             std::to_string(class_index));
  }
  long tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < preds.size(); ++i) {
    bool pred_c = hard_label(preds[i]) == class_index;
    bool gold_c = hard_label(golds[i]) == class_index;
    if (pred_c && gold_c) ++tp;
    if (pred_c && !gold_c) ++fp;
    if (!pred_c && gold_c) ++fn;
  }
  ClassPRF out;
  out.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  out.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  out.f1 = (out.precision + out.recall) > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

double macro_f1(const std::vector<SoftLabel>& preds,
                const std::vector<SoftLabel>& golds, int n_classes) {
  double sum = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    sum += class_f1(preds, golds, c, n_classes).f1;
  }
  return sum / n_classes;
}

double jsd(const SoftLabel& p, const SoftLabel& q) {
  if (p.size() != q.size()) {
    throw std::runtime_error("jsd: distribution lengths differ");
  }
  double total = 0.0;
  for (int c = 0; c < p.size(); ++c) {
    double m = 0.5 * (p.probs[c] + q.probs[c]);
    if (p.probs[c] > 0.0) total += 0.5 * p.probs[c] * std::log2(p.probs[c] / m);
    if (q.probs[c] > 0.0) total += 0.5 * q.probs[c] * std::log2(q.probs[c] / m);
  }
  return total;
}

double distributional_mse(const SoftLabel& p, const SoftLabel& q,
                          bool divide_by_classes) {
  if (p.size() != q.size()) {
    throw std::runtime_error("distributional_mse: distribution lengths differ");
  }
  double total = 0.0;
  for (int c = 0; c < p.size(); ++c) {
    double diff = p.probs[c] - q.probs[c];
    total += diff * diff;
  }
  return divide_by_classes ? total / p.size() : total;
}

EvaluationReport evaluate(const std::vector<SoftLabel>& preds,
                          const std::vector<SoftLabel>& golds,
                          const ClassSet& classes, bool mse_divide_by_classes) {
  check_aligned(preds, golds);
  int n_classes = classes.size();
  for (const auto& label : preds) {
    if (label.size() != n_classes) {
      throw std::runtime_error("evaluate: prediction length does not match |C|");
    }
  }
  for (const auto& label : golds) {
    if (label.size() != n_classes) {
      throw std::runtime_error("evaluate: gold length does not match |C|");
    }
  }
  EvaluationReport report;
  report.classes = classes.names;
  report.n_instances = static_cast<int>(preds.size());
  report.accuracy = accuracy(preds, golds);
  double f1_sum = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    report.per_class.push_back(class_f1(preds, golds, c, n_classes));
    f1_sum += report.per_class.back().f1;
  }
  report.macro_f1 = f1_sum / n_classes;
  double jsd_sum = 0.0, mse_sum = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    jsd_sum += jsd(preds[i], golds[i]);
    mse_sum += distributional_mse(preds[i], golds[i], mse_divide_by_classes);
  }
  report.mean_jsd = jsd_sum / preds.size();
  report.mean_mse = mse_sum / preds.size();
  return report;
}

std::string report_to_json_string(const EvaluationReport& report) {
  nlohmann::json obj;
  obj["accuracy"] = report.accuracy;
  obj["macro_f1"] = report.macro_f1;
  obj["mean_jsd"] = report.mean_jsd;
  obj["mean_mse"] = report.mean_mse;
  obj["n_instances"] = report.n_instances;
  obj["classes"] = report.classes;
  std::vector<double> precision, recall, f1;
  for (const auto& prf : report.per_class) {
    precision.push_back(prf.precision);
    recall.push_back(prf.recall);
    f1.push_back(prf.f1);
  }
  obj["precision"] = precision;
  obj["recall"] = recall;
  obj["f1"] = f1;
  return obj.dump(2);
}

}  // namespace tandem
