#include "tandem/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tandem/rng.hpp"

namespace tandem {

using nlohmann::json;

int ClassSet::index_of(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void validate_soft_label(SoftLabel& label, int n_classes) {
  if (label.size() != n_classes) {
    throw std::runtime_error("label length " + std::to_string(label.size()) +
                             " does not match class count " +
                             std::to_string(n_classes));
  }
  double sum = 0.0;
  for (double p : label.probs) {
    if (!(p >= 0.0 && p <= 1.0 + kLabelSumTolerance)) {
      throw std::runtime_error("label entry " + std::to_string(p) +
                               " outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kLabelSumTolerance) {
    std::ostringstream msg;
    msg << "label sum " << sum << " exceeds tolerance";
    throw std::runtime_error(msg.str());
  }
  // Renormalize serialization drift, but leave sums that are 1 up to
  // double rounding untouched.
  if (std::abs(sum - 1.0) > 1e-12 && sum > 0.0) {
    for (double& p : label.probs) p /= sum;
  }
}

SoftLabel soft_label_from_annotations(const std::vector<std::string>& votes,
                                      const ClassSet& classes) {
  if (votes.empty()) {
    throw std::runtime_error("cannot build a soft label from an empty vote list");
  }
  SoftLabel label;
  label.probs.assign(classes.names.size(), 0.0);
  for (const auto& vote : votes) {
    int c = classes.index_of(vote);
    if (c < 0) throw std::runtime_error("unknown class name in votes: " + vote);
    label.probs[c] += 1.0;
  }
  for (double& p : label.probs) p /= static_cast<double>(votes.size());
  return label;
}

namespace {

DialogueInstance instance_from_json(const json& obj, const ClassSet& classes) {
  DialogueInstance inst;
  inst.id = obj.at("id").get<std::string>();
  for (const auto& turn : obj.at("history")) {
    inst.history.push_back(Utterance{turn.at("speaker").get<std::string>(),
                                     turn.at("text").get<std::string>()});
  }
  inst.target = obj.at("target").get<std::string>();
  if (inst.history.empty()) {
    throw std::runtime_error("instance " + inst.id + " has an empty history");
  }
  for (const auto& turn : inst.history) {
    if (turn.text.empty()) {
      throw std::runtime_error("instance " + inst.id +
                               " has an empty history utterance");
    }
  }
  if (inst.target.empty()) {
    throw std::runtime_error("instance " + inst.id + " has an empty target");
  }
  if (obj.contains("label_distribution")) {
    SoftLabel label;
    label.probs = obj.at("label_distribution").get<std::vector<double>>();
    validate_soft_label(label, classes.size());
    inst.label = std::move(label);
  }
  return inst;
}

json instance_to_json(const DialogueInstance& inst) {
  json obj;
  obj["id"] = inst.id;
  json hist = json::array();
  for (const auto& turn : inst.history) {
    hist.push_back({{"speaker", turn.speaker}, {"text", turn.text}});
  }
  obj["history"] = std::move(hist);
  obj["target"] = inst.target;
  if (inst.label.has_value()) obj["label_distribution"] = inst.label->probs;
  return obj;
}

}  // namespace

std::vector<DialogueInstance> load_jsonl_dataset(const std::string& path,
                                                 const ClassSet& classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::vector<DialogueInstance> instances;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed JSON line: " + e.what());
    }
    try {
      instances.push_back(instance_from_json(obj, classes));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return instances;
}

void write_jsonl(const std::string& path,
                 const std::vector<DialogueInstance>& instances) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  for (const auto& inst : instances) {
    out << instance_to_json(inst).dump() << "\n";
  }
}

ClassSet load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest file: " + path);
  json obj;
  in >> obj;
  ClassSet classes;
  classes.names = obj.at("classes").get<std::vector<std::string>>();
  if (classes.names.empty()) {
    throw std::runtime_error("manifest declares an empty class set: " + path);
  }
  return classes;
}

void write_manifest(const std::string& path, const ClassSet& classes) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest file: " + path);
  json obj;
  obj["classes"] = classes.names;
  out << obj.dump(2) << "\n";
}

std::vector<double> annotator_vote_distribution(int true_class, int n_classes,
                                                double noise) {
  std::vector<double> dist(n_classes, 0.0);
  for (int c = 0; c < n_classes; ++c) {
    dist[c] = (c == true_class) ? 1.0 - noise
                                : noise / static_cast<double>(n_classes - 1);
  }
  return dist;
}

namespace {

void validate_spec(const SyntheticSpec& spec) {
  if (spec.n_instances < 0) throw std::runtime_error("n_instances must be >= 0");
  if (spec.n_classes < 2) throw std::runtime_error("n_classes must be >= 2");
  if (spec.annotators_per_instance < 1) {
    throw std::runtime_error("annotators_per_instance must be >= 1");
  }
  if (spec.vocab_size < spec.n_classes * 10) {
    throw std::runtime_error("vocab_size must be >= 10 * n_classes");
  }
  if (spec.annotator_noise < 0.0 || spec.annotator_noise > 1.0) {
    throw std::runtime_error("annotator_noise must lie in [0, 1]");
  }
}

// Token layout: the first n_classes * keywords_per_class words are class
// keywords, the remainder is a shared background vocabulary. Keyword draws
// occasionally bleed into other classes so the task is separable but not
// trivially so.
struct SyntheticTextModel {
  int n_classes;
  int vocab_size;
  int keywords_per_class;
  int background_start;

  explicit SyntheticTextModel(const SyntheticSpec& spec)
      : n_classes(spec.n_classes),
        vocab_size(spec.vocab_size),
        keywords_per_class(spec.vocab_size / (2 * spec.n_classes)),
        background_start(keywords_per_class * spec.n_classes) {}

  std::string word(int index) const { return "w" + std::to_string(index); }

  std::string draw_token(int true_class, double keyword_rate, Rng& rng) const {
    if (rng.next_double() < keyword_rate) {
      int cls = true_class;
      if (rng.next_double() < 0.10) {
        // Confuser: keyword from a different class.
        int other = static_cast<int>(rng.next_below(n_classes - 1));
        cls = other >= true_class ? other + 1 : other;
      }
      int k = static_cast<int>(rng.next_below(keywords_per_class));
      return word(cls * keywords_per_class + k);
    }
    int k = static_cast<int>(rng.next_below(vocab_size - background_start));
    return word(background_start + k);
  }

  std::string draw_utterance(int true_class, double keyword_rate, int min_len,
                             int max_len, Rng& rng) const {
    int len = min_len + static_cast<int>(rng.next_below(max_len - min_len + 1));
    std::string text;
    for (int i = 0; i < len; ++i) {
      if (i > 0) text += ' ';
      text += draw_token(true_class, keyword_rate, rng);
    }
    return text;
  }
};

constexpr double kHistoryKeywordRate = 0.10;
constexpr double kTargetKeywordRate = 0.35;

DialogueInstance make_instance(int index, const SyntheticSpec& spec,
                               const SyntheticTextModel& model,
                               const ClassSet& classes) {
  Rng rng(derive_seed(spec.seed, "synthetic-instance", static_cast<uint64_t>(index)));
  DialogueInstance inst;
  inst.id = "syn-" + std::to_string(index);

  int true_class = static_cast<int>(rng.next_below(spec.n_classes));

  int n_history = 1 + static_cast<int>(rng.next_below(2));
  for (int h = 0; h < n_history; ++h) {
    // The last history turn is always the user's.
    bool user_turn = ((n_history - 1 - h) % 2) == 0;
    inst.history.push_back(
        Utterance{user_turn ? "U" : "S",
                  model.draw_utterance(true_class, kHistoryKeywordRate, 4, 7, rng)});
  }
  inst.target = model.draw_utterance(true_class, kTargetKeywordRate, 5, 9, rng);

  std::vector<std::string> votes;
  votes.reserve(spec.annotators_per_instance);
  for (int a = 0; a < spec.annotators_per_instance; ++a) {
    int vote = true_class;
    if (rng.next_double() < spec.annotator_noise) {
      int other = static_cast<int>(rng.next_below(spec.n_classes - 1));
      vote = other >= true_class ? other + 1 : other;
    }
    votes.push_back(classes.names[vote]);
  }
  inst.label = soft_label_from_annotations(votes, classes);
  return inst;
}

}  // namespace

DatasetBundle generate_synthetic_corpus(const SyntheticSpec& spec,
                                        const SyntheticSplit& split) {
  validate_spec(spec);
  if (split.total() != spec.n_instances) {
    throw std::runtime_error("split sizes sum to " + std::to_string(split.total()) +
                             " but the spec asks for " +
                             std::to_string(spec.n_instances) + " instances");
  }
  DatasetBundle bundle;
  for (int c = 0; c < spec.n_classes; ++c) {
    bundle.classes.names.push_back("c" + std::to_string(c));
  }
  SyntheticTextModel model(spec);

  for (int i = 0; i < spec.n_instances; ++i) {
    DialogueInstance inst = make_instance(i, spec, model, bundle.classes);
    if (i < split.n_labeled) {
      bundle.labeled.push_back(std::move(inst));
    } else if (i < split.n_labeled + split.n_unlabeled) {
      inst.label.reset();
      bundle.unlabeled.push_back(std::move(inst));
    } else if (i < split.n_labeled + split.n_unlabeled + split.n_dev) {
      bundle.dev.push_back(std::move(inst));
    } else {
      bundle.test.push_back(std::move(inst));
    }
  }
  return bundle;
}

DatasetBundle generate_synthetic_corpus(const SyntheticSpec& spec) {
  SyntheticSplit split;
  split.n_labeled = spec.n_instances / 4;
  split.n_unlabeled = spec.n_instances / 2;
  split.n_dev = spec.n_instances / 8;
  split.n_test = spec.n_instances - split.n_labeled - split.n_unlabeled - split.n_dev;
  return generate_synthetic_corpus(spec, split);
}

}  // namespace tandem
