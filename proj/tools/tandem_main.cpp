#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tandem/config.hpp"
#include "tandem/runner.hpp"
#include "tandem/threading.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string strategy;
  std::uint64_t seed = 0;
  int threads = -1;
  CLI::Option* config_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* strategy_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  flags.config_opt = cmd->add_option("--config", flags.config_path,
                                     "Path to the JSON config file")
                         ->envname("TANDEM_CONFIG");
  flags.out_opt = cmd->add_option("--out", flags.out_dir, "Run directory")
                      ->envname("TANDEM_OUT");
  flags.strategy_opt =
      cmd->add_option("--strategy", flags.strategy,
                      "ours|gold_only|masked_only|combined|equal_w|ref_gold")
          ->envname("TANDEM_STRATEGY");
  flags.seed_opt = cmd->add_option("--seed", flags.seed, "Master seed")
                       ->envname("TANDEM_SEED");
  flags.threads_opt = cmd->add_option("--threads", flags.threads,
                                      "Worker thread cap (0 = all cores)")
                          ->envname("TANDEM_THREADS");
}

tandem::PipelineConfig resolve_config(const CommonFlags& flags) {
  tandem::PipelineConfig config;
  if (flags.config_opt->count() > 0) {
    config = tandem::parse_config(flags.config_path);
  } else {
    tandem::validate_config(config);
  }
  if (flags.out_opt->count() > 0) config.out_dir = flags.out_dir;
  if (flags.strategy_opt->count() > 0) {
    config.strategy = tandem::strategy_from_name(flags.strategy);
  }
  if (flags.seed_opt->count() > 0) config.seed = flags.seed;
  if (flags.threads_opt->count() > 0) config.threads = flags.threads;
  tandem::set_worker_count(config.threads);
  for (const auto& warning : config.warnings) {
    std::fprintf(stderr, "[config] warning: %s\n", warning.c_str());
  }
  return config;
}

int guarded(const char* stage, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[%s] error: %s\n", stage, e.what());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "tandem: semi-supervised two-teacher training for soft-labeled "
      "sequence-pair classification"};
  app.require_subcommand(1);

  CommonFlags run_flags, gen_flags, aug_flags, pre_flags, teacher_flags,
      pseudo_flags, student_flags;

  auto* run_cmd = app.add_subcommand(
      "run", "Full pipeline: data, augmentation, teachers, student, report");
  add_common_flags(run_cmd, run_flags);

  auto* gen_cmd =
      app.add_subcommand("gen-data", "Generate the synthetic dataset files");
  add_common_flags(gen_cmd, gen_flags);

  auto* aug_cmd = app.add_subcommand(
      "augment", "Build the vocabulary and the [MASK]-augmented sets");
  add_common_flags(aug_cmd, aug_flags);

  auto* pre_cmd = app.add_subcommand(
      "pretrain-encoder", "Optional masked-language-model pretraining");
  add_common_flags(pre_cmd, pre_flags);

  std::string teacher_kind;
  auto* teacher_cmd =
      app.add_subcommand("train-teacher", "Train the gold or masked teacher");
  teacher_cmd->add_option("--kind", teacher_kind, "gold|masked")->required();
  add_common_flags(teacher_cmd, teacher_flags);

  auto* pseudo_cmd = app.add_subcommand(
      "pseudo-label", "Joint-score A_U with both teachers to build G_L");
  add_common_flags(pseudo_cmd, pseudo_flags);

  auto* student_cmd = app.add_subcommand(
      "train-student", "Train the final model for the configured strategy");
  add_common_flags(student_cmd, student_flags);

  std::string pred_path, gold_path, manifest_path, report_out;
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "Score a predictions file against a gold JSONL file");
  eval_cmd->add_option("--pred", pred_path, "Predictions JSONL")->required();
  eval_cmd->add_option("--gold", gold_path, "Gold JSONL with labels")->required();
  eval_cmd->add_option("--manifest", manifest_path, "Dataset manifest")
      ->required();
  eval_cmd->add_option("--out", report_out, "Report path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  if (run_cmd->parsed()) {
    try {
      return tandem::run_pipeline(resolve_config(run_flags));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "[run] error: %s\n", e.what());
      return 1;
    }
  }
  if (gen_cmd->parsed()) {
    return guarded("gen-data", [&] {
      auto config = resolve_config(gen_flags);
      tandem::stage_gen_data(config, config.out_dir);
    });
  }
  if (aug_cmd->parsed()) {
    return guarded("augment", [&] {
      auto config = resolve_config(aug_flags);
      tandem::stage_augment(config, config.out_dir);
    });
  }
  if (pre_cmd->parsed()) {
    return guarded("pretrain-encoder", [&] {
      auto config = resolve_config(pre_flags);
      tandem::stage_pretrain_encoder(config, config.out_dir);
    });
  }
  if (teacher_cmd->parsed()) {
    return guarded("train-teacher", [&] {
      auto config = resolve_config(teacher_flags);
      tandem::ModelRole role;
      if (teacher_kind == "gold") {
        role = tandem::ModelRole::gold_teacher;
      } else if (teacher_kind == "masked") {
        role = tandem::ModelRole::masked_teacher;
      } else {
        throw std::runtime_error("--kind must be 'gold' or 'masked'");
      }
      tandem::stage_train_teacher(config, config.out_dir, role);
    });
  }
  if (pseudo_cmd->parsed()) {
    return guarded("pseudo-label", [&] {
      auto config = resolve_config(pseudo_flags);
      tandem::stage_pseudo_label(config, config.out_dir);
    });
  }
  if (student_cmd->parsed()) {
    return guarded("train-student", [&] {
      auto config = resolve_config(student_flags);
      tandem::stage_train_student(config, config.out_dir);
      tandem::stage_finalize(config, config.out_dir);
    });
  }
  if (eval_cmd->parsed()) {
    return guarded("evaluate", [&] {
      tandem::ClassSet classes = tandem::load_manifest(manifest_path);
      tandem::EvaluationReport report =
          tandem::evaluate_files(pred_path, gold_path, classes);
      std::string text = tandem::report_to_json_string(report);
      if (report_out.empty()) {
        std::cout << text << "\n";
      } else {
        std::ofstream out(report_out, std::ios::trunc);
        if (!out) {
          throw std::runtime_error("cannot write report: " + report_out);
        }
        out << text << "\n";
      }
    });
  }
  return 0;
}
