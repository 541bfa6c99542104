#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tandem {

// Ordered class set shared by every labeled segment of a dataset. Declared
// once per dataset in a manifest file.
struct ClassSet {
  std::vector<std::string> names;

  int size() const { return static_cast<int>(names.size()); }
  // Returns -1 when the name is unknown.
  int index_of(const std::string& name) const;
};

// Probability distribution over the class set. Entries lie in [0, 1] and sum
// to 1; sums within 1e-6 of 1 are silently renormalized, larger deviations
// are rejected.
struct SoftLabel {
  std::vector<double> probs;

  int size() const { return static_cast<int>(probs.size()); }
};

constexpr double kLabelSumTolerance = 1e-6;

// Validates entries and length against the class count, renormalizing tiny
// float drift. Throws std::runtime_error on violation.
void validate_soft_label(SoftLabel& label, int n_classes);

struct Utterance {
  std::string speaker;
  std::string text;
};

// A dialogue history plus the target utterance to judge, optionally carrying
// a soft label.
struct DialogueInstance {
  std::string id;
  std::vector<Utterance> history;
  std::string target;
  std::optional<SoftLabel> label;
};

// The text-level data segments a run starts from. Augmented and
// pseudo-labeled segments are token-level and live in the pipeline module.
struct DatasetBundle {
  ClassSet classes;
  std::vector<DialogueInstance> labeled;    // gold-labeled training set
  std::vector<DialogueInstance> unlabeled;  // labels absent
  std::vector<DialogueInstance> dev;
  std::vector<DialogueInstance> test;
};

struct SyntheticSpec {
  int n_instances = 0;
  int n_classes = 3;
  int vocab_size = 120;
  int annotators_per_instance = 15;
  double annotator_noise = 0.25;
  uint64_t seed = 1;
};

struct SyntheticSplit {
  int n_labeled = 0;
  int n_unlabeled = 0;
  int n_dev = 0;
  int n_test = 0;

  int total() const { return n_labeled + n_unlabeled + n_dev + n_test; }
};

// Empirical vote frequencies: probs[c] = count(votes == c) / |votes|.
SoftLabel soft_label_from_annotations(const std::vector<std::string>& votes,
                                      const ClassSet& classes);

// One JSON object per line with fields id, history, target and optional
// label_distribution. Errors report the offending line number.
std::vector<DialogueInstance> load_jsonl_dataset(const std::string& path,
                                                 const ClassSet& classes);
void write_jsonl(const std::string& path,
                 const std::vector<DialogueInstance>& instances);

ClassSet load_manifest(const std::string& path);
void write_manifest(const std::string& path, const ClassSet& classes);

// Seeded generator: tokens come from a class-conditional keyword distribution
// over a background unigram stream; labels are empirical distributions of
// simulated annotator votes where each vote flips away from the true class
// with probability annotator_noise. Deterministic given the spec.
DatasetBundle generate_synthetic_corpus(const SyntheticSpec& spec,
                                        const SyntheticSplit& split);
// Convenience overload: 25% labeled / 50% unlabeled / 12.5% dev / rest test.
DatasetBundle generate_synthetic_corpus(const SyntheticSpec& spec);

// Analytic distribution of a single simulated vote given the true class;
// used by tests to check convergence of the empirical soft labels.
std::vector<double> annotator_vote_distribution(int true_class, int n_classes,
                                                double noise);

}  // namespace tandem
