#include "tandem/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tandem/rng.hpp"

namespace tandem {

using nlohmann::json;

TrainingConfig PipelineConfig::teacher_training() const {
  TrainingConfig cfg;
  cfg.epochs = teacher_epochs;
  cfg.batch_size = teacher_batch_size;
  cfg.learning_rate = teacher_learning_rate;
  cfg.weight_decay = weight_decay;
  cfg.selection = selection_metric;
  return cfg;
}

TrainingConfig PipelineConfig::student_training() const {
  TrainingConfig cfg;
  cfg.epochs = student_epochs;
  cfg.batch_size = student_batch_size;
  cfg.learning_rate = student_learning_rate;
  cfg.weight_decay = weight_decay;
  cfg.selection = selection_metric;
  return cfg;
}

AugmentationSpec PipelineConfig::unlabeled_augmentation() const {
  AugmentationSpec spec;
  spec.replacement_prob = rho_unlabeled;
  spec.copies_per_instance = copies_per_instance;
  spec.seed = derive_seed(seed, "augment-unlabeled");
  return spec;
}

AugmentationSpec PipelineConfig::labeled_augmentation() const {
  AugmentationSpec spec;
  spec.replacement_prob = rho_labeled;
  spec.copies_per_instance = copies_per_instance;
  spec.seed = derive_seed(seed, "augment-labeled");
  return spec;
}

EncoderConfig PipelineConfig::encoder_config(int vocab_size) const {
  EncoderConfig cfg;
  cfg.vocab_size = vocab_size;
  cfg.d_model = d_model;
  cfg.n_layers = n_layers;
  cfg.n_heads = n_heads;
  cfg.max_len = max_len;
  cfg.ffn_dim = ffn_dim > 0 ? ffn_dim : 4 * d_model;
  return cfg;
}

namespace {

[[noreturn]] void key_type_error(const std::string& key, const char* expected) {
  throw std::runtime_error("config key '" + key + "': expected " + expected);
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) key_type_error(key, "an integer");
  return v.get<int>();
}

uint64_t as_u64(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.is_number_float()) key_type_error(key, "an integer");
  return v.get<uint64_t>();
}

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) key_type_error(key, "a number");
  return v.get<double>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) key_type_error(key, "a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) key_type_error(key, "a string");
  return v.get<std::string>();
}

void apply_key(PipelineConfig& c, const std::string& key, const json& v) {
  if (key == "mode") c.mode = as_string(v, key);
  else if (key == "data_dir") c.data_dir = as_string(v, key);
  else if (key == "n_labeled") c.synthetic.n_labeled = as_int(v, key);
  else if (key == "n_unlabeled") c.synthetic.n_unlabeled = as_int(v, key);
  else if (key == "n_dev") c.synthetic.n_dev = as_int(v, key);
  else if (key == "n_test") c.synthetic.n_test = as_int(v, key);
  else if (key == "n_classes") c.synthetic.n_classes = as_int(v, key);
  else if (key == "vocab_size") c.synthetic.vocab_size = as_int(v, key);
  else if (key == "annotators_per_instance")
    c.synthetic.annotators_per_instance = as_int(v, key);
  else if (key == "annotator_noise") c.synthetic.annotator_noise = as_double(v, key);
  else if (key == "d_model") c.d_model = as_int(v, key);
  else if (key == "n_layers") c.n_layers = as_int(v, key);
  else if (key == "n_heads") c.n_heads = as_int(v, key);
  else if (key == "max_len") c.max_len = as_int(v, key);
  else if (key == "ffn_dim") c.ffn_dim = as_int(v, key);
  else if (key == "rho_unlabeled") c.rho_unlabeled = as_double(v, key);
  else if (key == "rho_labeled") c.rho_labeled = as_double(v, key);
  else if (key == "copies_per_instance") c.copies_per_instance = as_int(v, key);
  else if (key == "beta_ce") c.weights.beta_ce = as_double(v, key);
  else if (key == "beta_scl") c.weights.beta_scl = as_double(v, key);
  else if (key == "beta_mse") c.weights.beta_mse = as_double(v, key);
  else if (key == "temperature") c.weights.temperature = as_double(v, key);
  else if (key == "normalize_scl_embeddings")
    c.weights.normalize_embeddings = as_bool(v, key);
  else if (key == "hard_label_ce") c.weights.hard_label_ce = as_bool(v, key);
  else if (key == "gamma") c.scoring.gamma = as_double(v, key);
  else if (key == "alpha") c.scoring.alpha = as_double(v, key);
  else if (key == "iterations") c.scoring.iterations = as_int(v, key);
  else if (key == "teacher_epochs") c.teacher_epochs = as_int(v, key);
  else if (key == "teacher_batch_size") c.teacher_batch_size = as_int(v, key);
  else if (key == "teacher_learning_rate")
    c.teacher_learning_rate = as_double(v, key);
  else if (key == "student_epochs") c.student_epochs = as_int(v, key);
  else if (key == "student_batch_size") c.student_batch_size = as_int(v, key);
  else if (key == "student_learning_rate")
    c.student_learning_rate = as_double(v, key);
  else if (key == "weight_decay") c.weight_decay = as_double(v, key);
  else if (key == "selection_metric")
    c.selection_metric = selection_metric_from_name(as_string(v, key));
  else if (key == "strategy") c.strategy = strategy_from_name(as_string(v, key));
  else if (key == "seed") c.seed = as_u64(v, key);
  else if (key == "threads") c.threads = as_int(v, key);
  else if (key == "out_dir") c.out_dir = as_string(v, key);
  else if (key == "mlm_pretrain") c.mlm_pretrain = as_bool(v, key);
  else if (key == "mlm_epochs") c.mlm_epochs = as_int(v, key);
  else if (key == "mlm_learning_rate") c.mlm_learning_rate = as_double(v, key);
  else if (key == "mlm_mask_prob") c.mlm_mask_prob = as_double(v, key);
  else if (key == "copy_head_from_gold") c.copy_head_from_gold = as_bool(v, key);
  else if (key == "mse_divide_by_classes")
    c.mse_divide_by_classes = as_bool(v, key);
  else throw std::runtime_error("unknown config key '" + key + "'");
}

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

}  // namespace

void validate_config(PipelineConfig& c) {
  require(c.mode == "synthetic" || c.mode == "files",
          "mode must be 'synthetic' or 'files'");
  if (c.mode == "files") {
    require(!c.data_dir.empty(), "files mode requires data_dir");
  } else {
    const auto& s = c.synthetic;
    require(s.n_labeled >= 1, "n_labeled must be >= 1");
    require(s.n_unlabeled >= 0, "n_unlabeled must be >= 0");
    require(s.n_dev >= 1, "n_dev must be >= 1");
    require(s.n_test >= 1, "n_test must be >= 1");
    require(s.n_classes >= 2, "n_classes must be >= 2");
    require(s.vocab_size >= 10 * s.n_classes, "vocab_size must be >= 10 * n_classes");
    require(s.annotators_per_instance >= 1, "annotators_per_instance must be >= 1");
    require(s.annotator_noise >= 0.0 && s.annotator_noise <= 1.0,
            "annotator_noise must lie in [0,1]");
  }
  require(c.d_model >= 1, "d_model must be >= 1");
  require(c.n_layers >= 0, "n_layers must be >= 0");
  require(c.n_heads >= 1, "n_heads must be >= 1");
  require(c.d_model % c.n_heads == 0, "d_model must be divisible by n_heads");
  require(c.max_len >= 3, "max_len must be >= 3");
  require(c.ffn_dim >= 0, "ffn_dim must be >= 0 (0 = 4 * d_model)");
  require(c.rho_unlabeled >= 0.0 && c.rho_unlabeled <= 1.0,
          "rho_unlabeled must lie in [0,1]");
  require(c.rho_labeled >= 0.0 && c.rho_labeled <= 1.0,
          "rho_labeled must lie in [0,1]");
  require(c.copies_per_instance >= 1, "copies_per_instance must be >= 1");
  require(c.weights.temperature > 0.0, "temperature must be > 0");
  require(c.weights.beta_ce >= 0.0 && c.weights.beta_scl >= 0.0 &&
              c.weights.beta_mse >= 0.0,
          "loss weights must be nonnegative");
  require(c.weights.beta_ce > 0.0 || c.weights.beta_scl > 0.0 ||
              c.weights.beta_mse > 0.0,
          "at least one loss weight must be > 0");
  require(c.scoring.gamma >= 0.0 && c.scoring.gamma <= 1.0,
          "gamma must lie in [0,1]");
  require(c.scoring.alpha > 0.0, "alpha must be > 0");
  require(c.scoring.iterations >= 1, "iterations must be >= 1");
  require(c.teacher_epochs >= 1, "teacher_epochs must be >= 1");
  require(c.student_epochs >= 1, "student_epochs must be >= 1");
  require(c.teacher_batch_size >= 2, "teacher_batch_size must be >= 2");
  require(c.student_batch_size >= 2, "student_batch_size must be >= 2");
  require(c.teacher_learning_rate > 0.0, "teacher_learning_rate must be > 0");
  require(c.student_learning_rate > 0.0, "student_learning_rate must be > 0");
  require(c.weight_decay >= 0.0, "weight_decay must be >= 0");
  require(c.threads >= 0, "threads must be >= 0");
  require(c.mlm_epochs >= 0, "mlm_epochs must be >= 0");
  require(c.mlm_learning_rate > 0.0, "mlm_learning_rate must be > 0");
  require(c.mlm_mask_prob >= 0.0 && c.mlm_mask_prob <= 1.0,
          "mlm_mask_prob must lie in [0,1]");

  if (c.rho_labeled <= c.rho_unlabeled) {
    std::ostringstream w;
    w << "rho_labeled (" << c.rho_labeled << ") should exceed rho_unlabeled ("
      << c.rho_unlabeled << "); proceeding anyway";
    c.warnings.push_back(w.str());
  }
}

PipelineConfig parse_config_text(const std::string& text,
                                 const std::string& origin) {
  PipelineConfig config;
  bool only_space = text.find_first_not_of(" \t\r\n") == std::string::npos;
  if (!only_space) {
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(origin + ": invalid JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw std::runtime_error(origin + ": config must be a JSON object");
    }
    for (const auto& [key, value] : obj.items()) {
      apply_key(config, key, value);
    }
  }
  validate_config(config);
  return config;
}

PipelineConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

std::string config_to_json_string(const PipelineConfig& c) {
  json obj;
  obj["mode"] = c.mode;
  obj["data_dir"] = c.data_dir;
  obj["n_labeled"] = c.synthetic.n_labeled;
  obj["n_unlabeled"] = c.synthetic.n_unlabeled;
  obj["n_dev"] = c.synthetic.n_dev;
  obj["n_test"] = c.synthetic.n_test;
  obj["n_classes"] = c.synthetic.n_classes;
  obj["vocab_size"] = c.synthetic.vocab_size;
  obj["annotators_per_instance"] = c.synthetic.annotators_per_instance;
  obj["annotator_noise"] = c.synthetic.annotator_noise;
  obj["d_model"] = c.d_model;
  obj["n_layers"] = c.n_layers;
  obj["n_heads"] = c.n_heads;
  obj["max_len"] = c.max_len;
  obj["ffn_dim"] = c.ffn_dim;
  obj["rho_unlabeled"] = c.rho_unlabeled;
  obj["rho_labeled"] = c.rho_labeled;
  obj["copies_per_instance"] = c.copies_per_instance;
  obj["beta_ce"] = c.weights.beta_ce;
  obj["beta_scl"] = c.weights.beta_scl;
  obj["beta_mse"] = c.weights.beta_mse;
  obj["temperature"] = c.weights.temperature;
  obj["normalize_scl_embeddings"] = c.weights.normalize_embeddings;
  obj["hard_label_ce"] = c.weights.hard_label_ce;
  obj["gamma"] = c.scoring.gamma;
  obj["alpha"] = c.scoring.alpha;
  obj["iterations"] = c.scoring.iterations;
  obj["teacher_epochs"] = c.teacher_epochs;
  obj["teacher_batch_size"] = c.teacher_batch_size;
  obj["teacher_learning_rate"] = c.teacher_learning_rate;
  obj["student_epochs"] = c.student_epochs;
  obj["student_batch_size"] = c.student_batch_size;
  obj["student_learning_rate"] = c.student_learning_rate;
  obj["weight_decay"] = c.weight_decay;
  obj["selection_metric"] = selection_metric_name(c.selection_metric);
  obj["strategy"] = strategy_name(c.strategy);
  obj["seed"] = c.seed;
  obj["threads"] = c.threads;
  obj["out_dir"] = c.out_dir;
  obj["mlm_pretrain"] = c.mlm_pretrain;
  obj["mlm_epochs"] = c.mlm_epochs;
  obj["mlm_learning_rate"] = c.mlm_learning_rate;
  obj["mlm_mask_prob"] = c.mlm_mask_prob;
  obj["copy_head_from_gold"] = c.copy_head_from_gold;
  obj["mse_divide_by_classes"] = c.mse_divide_by_classes;
  return obj.dump(2);
}

}  // namespace tandem
