#include "tandem/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "tandem/mlm.hpp"
#include "tandem/rng.hpp"
#include "tandem/threading.hpp"

namespace tandem {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunPaths {
  std::string dir;

  explicit RunPaths(std::string d) : dir(std::move(d)) {}

  std::string data_dir() const { return dir + "/data"; }
  std::string manifest() const { return data_dir() + "/manifest.json"; }
  std::string segment(const char* name) const {
    return data_dir() + "/" + name + ".jsonl";
  }
  std::string vocab() const { return dir + "/vocab.txt"; }
  std::string aug_unlabeled() const { return dir + "/aug_unlabeled.jsonl"; }
  std::string aug_labeled() const { return dir + "/aug_labeled.jsonl"; }
  std::string pseudo_labels() const { return dir + "/pseudo_labels.jsonl"; }
  std::string ckpt_dir() const { return dir + "/checkpoints"; }
  std::string encoder_ckpt() const { return ckpt_dir() + "/encoder.ckpt"; }
  std::string gold_ckpt() const { return ckpt_dir() + "/gold_teacher.ckpt"; }
  std::string masked_ckpt() const { return ckpt_dir() + "/masked_teacher.ckpt"; }
  std::string student_ckpt(int iteration) const {
    return ckpt_dir() + "/student_iter" + std::to_string(iteration) + ".ckpt";
  }
  std::string final_ckpt() const { return ckpt_dir() + "/final.ckpt"; }
  std::string metrics_dir() const { return dir + "/metrics"; }
  std::string metrics(const char* phase) const {
    return metrics_dir() + "/" + phase + ".jsonl";
  }
  std::string dev_predictions() const { return dir + "/dev_predictions.jsonl"; }
  std::string test_predictions() const { return dir + "/test_predictions.jsonl"; }
  std::string report() const { return dir + "/report.json"; }
  std::string config_snapshot() const { return dir + "/config.json"; }
};

std::string effective_data_dir(const PipelineConfig& config,
                               const RunPaths& paths) {
  return config.mode == "files" ? config.data_dir : paths.data_dir();
}

// Sink writing one JSON line per record; truncates on open so stages stay
// idempotent.
class FileSink {
 public:
  explicit FileSink(const std::string& path) : out_(path, std::ios::trunc) {
    if (!out_) throw std::runtime_error("cannot write metrics file: " + path);
  }
  MetricsSink sink() {
    return [this](const std::string& line) { out_ << line << "\n"; };
  }

 private:
  std::ofstream out_;
};

DatasetBundle load_bundle_from_dir(const std::string& data_dir) {
  DatasetBundle bundle;
  bundle.classes = load_manifest(data_dir + "/manifest.json");
  bundle.labeled = load_jsonl_dataset(data_dir + "/labeled.jsonl", bundle.classes);
  std::string unlabeled_path = data_dir + "/unlabeled.jsonl";
  if (fs::exists(unlabeled_path)) {
    bundle.unlabeled = load_jsonl_dataset(unlabeled_path, bundle.classes);
    for (auto& inst : bundle.unlabeled) inst.label.reset();
  }
  bundle.dev = load_jsonl_dataset(data_dir + "/dev.jsonl", bundle.classes);
  bundle.test = load_jsonl_dataset(data_dir + "/test.jsonl", bundle.classes);
  return bundle;
}

ModelParams make_model(const PipelineConfig& config, const EncoderConfig& ec,
                       int n_classes, ModelRole role, const std::string& init_tag,
                       const EncoderParams* pretrained) {
  ModelParams model;
  model.encoder = pretrained != nullptr
                      ? *pretrained
                      : init_encoder(ec, derive_seed(config.seed, init_tag));
  model.head = init_head(ec.d_model, n_classes,
                         derive_seed(config.seed, init_tag + "-head"));
  model.role = role;
  return model;
}

std::vector<TokenSequence> token_corpus(const PreparedData& data) {
  std::vector<TokenSequence> corpus;
  corpus.reserve(data.labeled.size() + data.unlabeled.size());
  for (const auto& inst : data.labeled) corpus.push_back(inst.tokens);
  for (const auto& inst : data.unlabeled) corpus.push_back(inst.tokens);
  return corpus;
}

EncoderParams pretrain_encoder_for(const PreparedData& data,
                                   const PipelineConfig& config,
                                   const MetricsSink& sink) {
  EncoderConfig ec = config.encoder_config(data.vocab.size());
  EncoderParams enc = init_encoder(ec, derive_seed(config.seed, "init-encoder"));
  MlmPretrainConfig mlm;
  mlm.epochs = config.mlm_epochs;
  mlm.mask_prob = config.mlm_mask_prob;
  mlm.batch_size = config.teacher_batch_size;
  mlm.learning_rate = config.mlm_learning_rate;
  mlm.weight_decay = config.weight_decay;
  mlm.seed = derive_seed(config.seed, "mlm");
  auto stats = pretrain_mlm(token_corpus(data), enc, mlm);
  if (sink) {
    for (const auto& s : stats) {
      sink(json{{"phase", "mlm"},
                {"epoch", s.epoch},
                {"mean_loss", s.mean_loss},
                {"masked_positions", s.masked_positions}}
               .dump());
    }
  }
  return enc;
}

}  // namespace

DatasetBundle obtain_bundle(const PipelineConfig& config) {
  if (config.mode == "files") {
    return load_bundle_from_dir(config.data_dir);
  }
  const SyntheticDataConfig& s = config.synthetic;
  SyntheticSpec spec;
  spec.n_instances = s.n_labeled + s.n_unlabeled + s.n_dev + s.n_test;
  spec.n_classes = s.n_classes;
  spec.vocab_size = s.vocab_size;
  spec.annotators_per_instance = s.annotators_per_instance;
  spec.annotator_noise = s.annotator_noise;
  spec.seed = derive_seed(config.seed, "data");
  SyntheticSplit split{s.n_labeled, s.n_unlabeled, s.n_dev, s.n_test};
  return generate_synthetic_corpus(spec, split);
}

EncodedInstance encode_instance(const DialogueInstance& inst,
                                const Vocabulary& vocab, int max_len) {
  std::vector<int> history_ids;
  for (const auto& turn : inst.history) {
    std::vector<int> ids = tokenize(turn.text, vocab);
    history_ids.insert(history_ids.end(), ids.begin(), ids.end());
  }
  std::vector<int> target_ids = tokenize(inst.target, vocab);
  EncodedInstance encoded;
  encoded.id = inst.id;
  encoded.tokens = pack_sequence(history_ids, target_ids, max_len);
  encoded.label = inst.label;
  return encoded;
}

PreparedData prepare_data(const DatasetBundle& bundle,
                          const PipelineConfig& config) {
  PreparedData data;
  data.classes = bundle.classes;

  std::vector<const DialogueInstance*> vocab_sources;
  for (const auto& inst : bundle.labeled) vocab_sources.push_back(&inst);
  for (const auto& inst : bundle.unlabeled) vocab_sources.push_back(&inst);
  data.vocab = build_vocabulary(vocab_sources);

  auto encode_all = [&](const std::vector<DialogueInstance>& src) {
    std::vector<EncodedInstance> out;
    out.reserve(src.size());
    for (const auto& inst : src) {
      out.push_back(encode_instance(inst, data.vocab, config.max_len));
    }
    return out;
  };
  data.labeled = encode_all(bundle.labeled);
  data.unlabeled = encode_all(bundle.unlabeled);
  data.dev = encode_all(bundle.dev);
  data.test = encode_all(bundle.test);

  if (!data.unlabeled.empty()) {
    data.augmented_unlabeled =
        build_augmented_unlabeled(data.unlabeled, config.unlabeled_augmentation());
  }
  if (!data.labeled.empty()) {
    data.augmented_labeled =
        build_augmented_labeled(data.labeled, config.labeled_augmentation());
  }
  return data;
}

StrategyOutcome run_strategy(StrategyKind kind, const PreparedData& data,
                             const PipelineConfig& config, const MetricsSink& sink,
                             const IterationCallback& on_iteration) {
  StrategyOutcome outcome;
  outcome.kind = kind;
  EncoderConfig ec = config.encoder_config(data.vocab.size());
  int n_classes = data.classes.size();
  TrainingConfig teacher_cfg = config.teacher_training();
  TrainingConfig student_cfg = config.student_training();
  const LossWeights& weights = config.weights;

  EncoderParams pretrained;
  const EncoderParams* pretrained_ptr = nullptr;
  if (config.mlm_pretrain && config.mlm_epochs > 0) {
    pretrained = pretrain_encoder_for(data, config, sink);
    pretrained_ptr = &pretrained;
  }

  auto train_gold = [&]() {
    ModelParams gt = make_model(config, ec, n_classes, ModelRole::gold_teacher,
                                "init-gold-teacher", pretrained_ptr);
    train_teacher(data.labeled, gt, teacher_cfg, weights, data.dev, data.classes,
                  derive_seed(config.seed, "train-gold-teacher"), "gold_teacher",
                  sink);
    return gt;
  };
  auto train_masked = [&]() {
    if (data.augmented_labeled.empty()) {
      throw std::runtime_error(
          "strategy requires the augmented labeled set B_L; run augmentation "
          "first");
    }
    ModelParams mt = make_model(config, ec, n_classes, ModelRole::masked_teacher,
                                "init-masked-teacher", pretrained_ptr);
    train_teacher(data.augmented_labeled, mt, teacher_cfg, weights, data.dev,
                  data.classes, derive_seed(config.seed, "train-masked-teacher"),
                  "masked_teacher", sink);
    return mt;
  };

  switch (kind) {
    case StrategyKind::gold_only: {
      outcome.gold_teacher = train_gold();
      outcome.model = *outcome.gold_teacher;
      break;
    }
    case StrategyKind::masked_only: {
      outcome.masked_teacher = train_masked();
      outcome.model = *outcome.masked_teacher;
      break;
    }
    case StrategyKind::combined: {
      ModelParams model = make_model(config, ec, n_classes,
                                     ModelRole::gold_teacher, "init-combined",
                                     pretrained_ptr);
      std::vector<EncodedInstance> train_set = data.labeled;
      train_set.insert(train_set.end(), data.augmented_labeled.begin(),
                       data.augmented_labeled.end());
      train_teacher(train_set, model, teacher_cfg, weights, data.dev,
                    data.classes, derive_seed(config.seed, "train-combined"),
                    "combined", sink);
      outcome.model = std::move(model);
      break;
    }
    case StrategyKind::ours:
    case StrategyKind::equal_w:
    case StrategyKind::ref_gold: {
      if (data.augmented_unlabeled.empty()) {
        throw std::runtime_error(std::string("strategy ") + strategy_name(kind) +
                                 " requires unlabeled data (A_U is empty)");
      }
      ModelParams gt = train_gold();
      ModelParams mt = train_masked();
      double gamma = kind == StrategyKind::equal_w ? 0.5 : config.scoring.gamma;
      PseudoLabelResult pl =
          assign_pseudo_labels(data.augmented_unlabeled, gt, mt, gamma);

      ModelParams student;
      student.role = ModelRole::student;
      student.encoder.config = ec;
      inherit_encoder(student, gt);
      student.head = config.copy_head_from_gold
                         ? gt.head
                         : init_head(ec.d_model, n_classes,
                                     derive_seed(config.seed, "init-student-head"));

      ScoringConfig scoring = config.scoring;
      if (kind == StrategyKind::equal_w) {
        scoring.gamma = 0.5;
        scoring.iterations = 1;  // no bootstrapping
      }
      const std::vector<SoftLabel>& refs = kind == StrategyKind::ref_gold
                                               ? pl.gold_scores
                                               : pl.masked_scores;
      outcome.bootstrap = train_student_bootstrap(
          data.labeled, pl.pseudo_labeled, refs, student, scoring, student_cfg,
          weights, data.dev, data.classes,
          derive_seed(config.seed, "train-student"), sink, on_iteration);
      outcome.gold_teacher = std::move(gt);
      outcome.masked_teacher = std::move(mt);
      outcome.model = std::move(student);
      break;
    }
  }

  outcome.dev_predictions = predict_probs(outcome.model, data.dev);
  outcome.test_predictions = predict_probs(outcome.model, data.test);
  outcome.dev_report = evaluate(outcome.dev_predictions, gold_labels(data.dev),
                                data.classes, config.mse_divide_by_classes);
  outcome.test_report = evaluate(outcome.test_predictions, gold_labels(data.test),
                                 data.classes, config.mse_divide_by_classes);
  return outcome;
}

StrategyOutcome run_strategy(StrategyKind kind, const DatasetBundle& bundle,
                             const PipelineConfig& config,
                             const MetricsSink& sink) {
  return run_strategy(kind, prepare_data(bundle, config), config, sink, nullptr);
}

void write_encoded_jsonl(const std::string& path,
                         const std::vector<EncodedInstance>& instances,
                         const std::vector<SoftLabel>* gold_scores,
                         const std::vector<SoftLabel>* masked_scores) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    json obj;
    obj["id"] = inst.id;
    obj["source_id"] = inst.source_id;
    obj["copy_index"] = inst.copy_index;
    obj["token_ids"] = inst.tokens.ids;
    if (inst.label.has_value()) obj["label_distribution"] = inst.label->probs;
    if (gold_scores) obj["gold_score"] = (*gold_scores)[i].probs;
    if (masked_scores) obj["masked_score"] = (*masked_scores)[i].probs;
    out << obj.dump() << "\n";
  }
}

EncodedJsonl load_encoded_jsonl(const std::string& path, int n_classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  EncodedJsonl result;
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
    EncodedInstance inst;
    inst.id = obj.at("id").get<std::string>();
    inst.source_id = obj.value("source_id", std::string());
    inst.copy_index = obj.value("copy_index", -1);
    inst.tokens.ids = obj.at("token_ids").get<std::vector<int>>();
    inst.tokens.special.assign(inst.tokens.ids.size(), 0);
    for (size_t i = 0; i < inst.tokens.ids.size(); ++i) {
      int id = inst.tokens.ids[i];
      if (id == Vocabulary::kCls || id == Vocabulary::kSep ||
          id == Vocabulary::kPad) {
        inst.tokens.special[i] = 1;
      }
    }
    if (obj.contains("label_distribution")) {
      SoftLabel label;
      label.probs = obj.at("label_distribution").get<std::vector<double>>();
      validate_soft_label(label, n_classes);
      inst.label = std::move(label);
    }
    if (obj.contains("gold_score")) {
      SoftLabel s;
      s.probs = obj.at("gold_score").get<std::vector<double>>();
      result.gold_scores.push_back(std::move(s));
    }
    if (obj.contains("masked_score")) {
      SoftLabel s;
      s.probs = obj.at("masked_score").get<std::vector<double>>();
      result.masked_scores.push_back(std::move(s));
    }
    result.instances.push_back(std::move(inst));
  }
  return result;
}

void write_predictions(const std::string& path,
                       const std::vector<std::string>& ids,
                       const std::vector<SoftLabel>& probs) {
  if (ids.size() != probs.size()) {
    throw std::runtime_error("write_predictions: id and probability counts differ");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write predictions file: " + path);
  for (size_t i = 0; i < ids.size(); ++i) {
    json obj;
    obj["id"] = ids[i];
    obj["label_distribution"] = probs[i].probs;
    out << obj.dump() << "\n";
  }
}

EvaluationReport evaluate_files(const std::string& pred_path,
                                const std::string& gold_path,
                                const ClassSet& classes,
                                bool mse_divide_by_classes) {
  std::vector<DialogueInstance> golds = load_jsonl_dataset(gold_path, classes);

  std::ifstream in(pred_path);
  if (!in) throw std::runtime_error("cannot open predictions file: " + pred_path);
  std::map<std::string, SoftLabel> by_id;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(pred_path + ":" + std::to_string(line_no) +
                               ": malformed JSON line: " + e.what());
    }
    SoftLabel label;
    label.probs = obj.at("label_distribution").get<std::vector<double>>();
    validate_soft_label(label, classes.size());
    by_id[obj.at("id").get<std::string>()] = std::move(label);
  }

  std::vector<SoftLabel> preds, gold_labels_list;
  for (const auto& inst : golds) {
    auto it = by_id.find(inst.id);
    if (it == by_id.end()) {
      throw std::runtime_error("predictions file is missing instance " + inst.id);
    }
    if (!inst.label.has_value()) {
      throw std::runtime_error("gold file instance " + inst.id + " has no label");
    }
    preds.push_back(it->second);
    gold_labels_list.push_back(*inst.label);
  }
  return evaluate(preds, gold_labels_list, classes, mse_divide_by_classes);
}

// ---------------------------------------------------------------------------
// File-based stages.

void stage_gen_data(const PipelineConfig& config, const std::string& dir) {
  if (config.mode == "files") return;  // data lives in config.data_dir
  RunPaths paths(dir);
  fs::create_directories(paths.data_dir());
  DatasetBundle bundle = obtain_bundle(config);
  write_manifest(paths.manifest(), bundle.classes);
  write_jsonl(paths.segment("labeled"), bundle.labeled);
  write_jsonl(paths.segment("unlabeled"), bundle.unlabeled);
  write_jsonl(paths.segment("dev"), bundle.dev);
  write_jsonl(paths.segment("test"), bundle.test);
}

void stage_augment(const PipelineConfig& config, const std::string& dir) {
  RunPaths paths(dir);
  DatasetBundle bundle = load_bundle_from_dir(effective_data_dir(config, paths));

  std::vector<const DialogueInstance*> vocab_sources;
  for (const auto& inst : bundle.labeled) vocab_sources.push_back(&inst);
  for (const auto& inst : bundle.unlabeled) vocab_sources.push_back(&inst);
  Vocabulary vocab = build_vocabulary(vocab_sources);
  save_vocabulary(paths.vocab(), vocab);

  auto encode_all = [&](const std::vector<DialogueInstance>& src) {
    std::vector<EncodedInstance> out;
    out.reserve(src.size());
    for (const auto& inst : src) {
      out.push_back(encode_instance(inst, vocab, config.max_len));
    }
    return out;
  };

  std::vector<EncodedInstance> labeled = encode_all(bundle.labeled);
  write_encoded_jsonl(paths.aug_labeled(),
                      build_augmented_labeled(labeled, config.labeled_augmentation()));
  if (!bundle.unlabeled.empty()) {
    std::vector<EncodedInstance> unlabeled = encode_all(bundle.unlabeled);
    write_encoded_jsonl(
        paths.aug_unlabeled(),
        build_augmented_unlabeled(unlabeled, config.unlabeled_augmentation()));
  }
}

namespace {

PreparedData load_prepared(const PipelineConfig& config, const RunPaths& paths,
                           bool need_augmented) {
  PreparedData data;
  DatasetBundle bundle = load_bundle_from_dir(effective_data_dir(config, paths));
  data.classes = bundle.classes;
  if (!fs::exists(paths.vocab())) {
    throw std::runtime_error(
        "vocabulary not found; run `tandem augment` first: " + paths.vocab());
  }
  data.vocab = load_vocabulary(paths.vocab());
  auto encode_all = [&](const std::vector<DialogueInstance>& src) {
    std::vector<EncodedInstance> out;
    out.reserve(src.size());
    for (const auto& inst : src) {
      out.push_back(encode_instance(inst, data.vocab, config.max_len));
    }
    return out;
  };
  data.labeled = encode_all(bundle.labeled);
  data.unlabeled = encode_all(bundle.unlabeled);
  data.dev = encode_all(bundle.dev);
  data.test = encode_all(bundle.test);
  if (need_augmented) {
    if (fs::exists(paths.aug_labeled())) {
      data.augmented_labeled =
          load_encoded_jsonl(paths.aug_labeled(), data.classes.size()).instances;
    }
    if (fs::exists(paths.aug_unlabeled())) {
      data.augmented_unlabeled =
          load_encoded_jsonl(paths.aug_unlabeled(), data.classes.size()).instances;
    }
  }
  return data;
}

const EncoderParams* maybe_load_pretrained(const PipelineConfig& config,
                                           const RunPaths& paths,
                                           EncoderParams& storage) {
  if (!config.mlm_pretrain) return nullptr;
  if (!fs::exists(paths.encoder_ckpt())) {
    throw std::runtime_error(
        "mlm_pretrain is enabled but no encoder checkpoint exists; run `tandem "
        "pretrain-encoder` first");
  }
  storage = load_encoder(paths.encoder_ckpt());
  return &storage;
}

}  // namespace

void stage_pretrain_encoder(const PipelineConfig& config, const std::string& dir) {
  RunPaths paths(dir);
  PreparedData data = load_prepared(config, paths, /*need_augmented=*/false);
  fs::create_directories(paths.ckpt_dir());
  fs::create_directories(paths.metrics_dir());
  FileSink sink(paths.metrics("mlm"));
  EncoderParams enc = pretrain_encoder_for(data, config, sink.sink());
  save_encoder(paths.encoder_ckpt(), enc);
}

void stage_train_teacher(const PipelineConfig& config, const std::string& dir,
                         ModelRole role) {
  if (role != ModelRole::gold_teacher && role != ModelRole::masked_teacher) {
    throw std::runtime_error("train-teacher expects kind gold or masked");
  }
  RunPaths paths(dir);
  bool masked = role == ModelRole::masked_teacher;
  PreparedData data = load_prepared(config, paths, /*need_augmented=*/masked);
  if (masked && data.augmented_labeled.empty()) {
    throw std::runtime_error(
        "augmented labeled set B_L not found; run `tandem augment` first");
  }
  fs::create_directories(paths.ckpt_dir());
  fs::create_directories(paths.metrics_dir());

  EncoderConfig ec = config.encoder_config(data.vocab.size());
  EncoderParams pretrained_storage;
  const EncoderParams* pretrained =
      maybe_load_pretrained(config, paths, pretrained_storage);

  std::string phase = masked ? "masked_teacher" : "gold_teacher";
  std::string init_tag = masked ? "init-masked-teacher" : "init-gold-teacher";
  std::string train_tag = masked ? "train-masked-teacher" : "train-gold-teacher";
  ModelParams model = make_model(config, ec, data.classes.size(), role, init_tag,
                                 pretrained);
  FileSink sink(paths.metrics(phase.c_str()));
  train_teacher(masked ? data.augmented_labeled : data.labeled, model,
                config.teacher_training(), config.weights, data.dev, data.classes,
                derive_seed(config.seed, train_tag), phase, sink.sink());
  save_model(masked ? paths.masked_ckpt() : paths.gold_ckpt(), model);
}

void stage_pseudo_label(const PipelineConfig& config, const std::string& dir) {
  RunPaths paths(dir);
  if (!fs::exists(paths.aug_unlabeled())) {
    throw std::runtime_error(
        "augmented unlabeled set A_U not found; run `tandem augment` first");
  }
  if (!fs::exists(paths.gold_ckpt()) || !fs::exists(paths.masked_ckpt())) {
    throw std::runtime_error(
        "teacher checkpoints not found; run `tandem train-teacher` for both "
        "kinds first");
  }
  DatasetBundle bundle =
      load_bundle_from_dir(effective_data_dir(config, paths));
  std::vector<EncodedInstance> a_u =
      load_encoded_jsonl(paths.aug_unlabeled(), bundle.classes.size()).instances;
  ModelParams gt = load_model(paths.gold_ckpt());
  ModelParams mt = load_model(paths.masked_ckpt());
  double gamma = config.strategy == StrategyKind::equal_w ? 0.5
                                                          : config.scoring.gamma;
  PseudoLabelResult pl = assign_pseudo_labels(a_u, gt, mt, gamma);
  write_encoded_jsonl(paths.pseudo_labels(), pl.pseudo_labeled, &pl.gold_scores,
                      &pl.masked_scores);
}

void stage_train_student(const PipelineConfig& config, const std::string& dir) {
  RunPaths paths(dir);
  fs::create_directories(paths.ckpt_dir());
  fs::create_directories(paths.metrics_dir());
  StrategyKind kind = config.strategy;

  if (kind == StrategyKind::gold_only || kind == StrategyKind::masked_only) {
    std::string src = kind == StrategyKind::gold_only ? paths.gold_ckpt()
                                                      : paths.masked_ckpt();
    if (!fs::exists(src)) {
      throw std::runtime_error("teacher checkpoint not found: " + src);
    }
    save_model(paths.final_ckpt(), load_model(src));
    return;
  }

  if (kind == StrategyKind::combined) {
    PreparedData data = load_prepared(config, paths, /*need_augmented=*/true);
    if (data.augmented_labeled.empty()) {
      throw std::runtime_error(
          "augmented labeled set B_L not found; run `tandem augment` first");
    }
    EncoderConfig ec = config.encoder_config(data.vocab.size());
    EncoderParams pretrained_storage;
    const EncoderParams* pretrained =
        maybe_load_pretrained(config, paths, pretrained_storage);
    ModelParams model = make_model(config, ec, data.classes.size(),
                                   ModelRole::gold_teacher, "init-combined",
                                   pretrained);
    std::vector<EncodedInstance> train_set = data.labeled;
    train_set.insert(train_set.end(), data.augmented_labeled.begin(),
                     data.augmented_labeled.end());
    FileSink sink(paths.metrics("combined"));
    train_teacher(train_set, model, config.teacher_training(), config.weights,
                  data.dev, data.classes, derive_seed(config.seed, "train-combined"),
                  "combined", sink.sink());
    save_model(paths.final_ckpt(), model);
    return;
  }

  // ours / equal_w / ref_gold: bootstrapped student.
  PreparedData data = load_prepared(config, paths, /*need_augmented=*/false);
  if (!fs::exists(paths.pseudo_labels())) {
    throw std::runtime_error(
        "pseudo labels not found; run `tandem pseudo-label` first");
  }
  EncodedJsonl pseudo = load_encoded_jsonl(paths.pseudo_labels(),
                                           data.classes.size());
  if (pseudo.gold_scores.size() != pseudo.instances.size() ||
      pseudo.masked_scores.size() != pseudo.instances.size()) {
    throw std::runtime_error(
        "pseudo label file lacks teacher scores; re-run `tandem pseudo-label`");
  }
  if (!fs::exists(paths.gold_ckpt())) {
    throw std::runtime_error("gold teacher checkpoint not found; run `tandem "
                             "train-teacher --kind gold` first");
  }
  ModelParams gt = load_model(paths.gold_ckpt());

  ModelParams student;
  student.role = ModelRole::student;
  student.encoder.config = gt.encoder.config;
  inherit_encoder(student, gt);
  student.head = config.copy_head_from_gold
                     ? gt.head
                     : init_head(gt.encoder.config.d_model, data.classes.size(),
                                 derive_seed(config.seed, "init-student-head"));

  ScoringConfig scoring = config.scoring;
  if (kind == StrategyKind::equal_w) {
    scoring.gamma = 0.5;
    scoring.iterations = 1;
  }
  const std::vector<SoftLabel>& refs = kind == StrategyKind::ref_gold
                                           ? pseudo.gold_scores
                                           : pseudo.masked_scores;
  FileSink sink(paths.metrics("student"));
  train_student_bootstrap(
      data.labeled, pseudo.instances, refs, student, scoring,
      config.student_training(), config.weights, data.dev, data.classes,
      derive_seed(config.seed, "train-student"), sink.sink(),
      [&](int iteration, const ModelParams& params) {
        save_model(paths.student_ckpt(iteration), params);
      });
  save_model(paths.final_ckpt(), student);
}

void stage_finalize(const PipelineConfig& config, const std::string& dir) {
  RunPaths paths(dir);
  if (!fs::exists(paths.final_ckpt())) {
    throw std::runtime_error("final checkpoint not found; run `tandem "
                             "train-student` first");
  }
  PreparedData data = load_prepared(config, paths, /*need_augmented=*/false);
  ModelParams model = load_model(paths.final_ckpt());

  std::vector<SoftLabel> dev_preds = predict_probs(model, data.dev);
  std::vector<SoftLabel> test_preds = predict_probs(model, data.test);
  std::vector<std::string> dev_ids, test_ids;
  for (const auto& inst : data.dev) dev_ids.push_back(inst.id);
  for (const auto& inst : data.test) test_ids.push_back(inst.id);
  write_predictions(paths.dev_predictions(), dev_ids, dev_preds);
  write_predictions(paths.test_predictions(), test_ids, test_preds);

  EvaluationReport dev_report = evaluate(dev_preds, gold_labels(data.dev),
                                         data.classes,
                                         config.mse_divide_by_classes);
  EvaluationReport test_report = evaluate(test_preds, gold_labels(data.test),
                                          data.classes,
                                          config.mse_divide_by_classes);
  json report;
  report["strategy"] = strategy_name(config.strategy);
  report["seed"] = config.seed;
  report["dev"] = json::parse(report_to_json_string(dev_report));
  report["test"] = json::parse(report_to_json_string(test_report));
  std::ofstream out(paths.report(), std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report: " + paths.report());
  out << report.dump(2) << "\n";
}

int run_pipeline(const PipelineConfig& config) {
  set_worker_count(config.threads);
  RunPaths paths(config.out_dir);
  std::string stage = "setup";
  try {
    fs::create_directories(config.out_dir);
    for (const auto& warning : config.warnings) {
      std::fprintf(stderr, "[config] warning: %s\n", warning.c_str());
    }
    {
      std::ofstream snapshot(paths.config_snapshot(), std::ios::trunc);
      if (!snapshot) {
        throw std::runtime_error("cannot write config snapshot: " +
                                 paths.config_snapshot());
      }
      snapshot << config_to_json_string(config) << "\n";
    }

    stage = "gen-data";
    stage_gen_data(config, config.out_dir);
    stage = "augment";
    stage_augment(config, config.out_dir);
    if (config.mlm_pretrain) {
      stage = "pretrain-encoder";
      stage_pretrain_encoder(config, config.out_dir);
    }

    StrategyKind kind = config.strategy;
    if (kind == StrategyKind::gold_only) {
      stage = "train-teacher gold";
      stage_train_teacher(config, config.out_dir, ModelRole::gold_teacher);
    } else if (kind == StrategyKind::masked_only) {
      stage = "train-teacher masked";
      stage_train_teacher(config, config.out_dir, ModelRole::masked_teacher);
    } else if (kind != StrategyKind::combined) {
      stage = "train-teacher gold";
      stage_train_teacher(config, config.out_dir, ModelRole::gold_teacher);
      stage = "train-teacher masked";
      stage_train_teacher(config, config.out_dir, ModelRole::masked_teacher);
      stage = "pseudo-label";
      stage_pseudo_label(config, config.out_dir);
    }
    stage = "train-student";
    stage_train_student(config, config.out_dir);
    stage = "finalize";
    stage_finalize(config, config.out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[%s] error: %s\n", stage.c_str(), e.what());
    return 1;
  }
  return 0;
}

}  // namespace tandem
