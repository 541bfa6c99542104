// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Criteria run at their stated tolerances; elapsed time is
// printed per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "tandem/runner.hpp"
#include "tandem/threading.hpp"
#include "tandem/training.hpp"
#include "../test_support.hpp"

using namespace tandem;
namespace ts = test_support;
namespace fs = std::filesystem;

namespace {

struct CriterionResult {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

std::vector<CriterionResult> g_results;

void run_criterion(int id, const std::string& name,
                   const std::function<bool(std::string&)>& body) {
  CriterionResult result;
  result.id = id;
  result.name = name;
  auto t0 = std::chrono::steady_clock::now();
  try {
    result.pass = body(result.detail);
  } catch (const std::exception& e) {
    result.pass = false;
    result.detail = std::string("exception: ") + e.what();
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  g_results.push_back(result);
  std::printf("%s criterion %d (%s) [%.2fs]%s%s\n",
              result.pass ? "PASS" : "FAIL", id, name.c_str(), result.seconds,
              result.detail.empty() ? "" : " -- ", result.detail.c_str());
  std::fflush(stdout);
}

SoftLabel make_label(std::initializer_list<double> probs) {
  SoftLabel label;
  label.probs = probs;
  return label;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------------------

bool criterion1_formula_fidelity(std::string& detail) {
  SoftLabel joint = joint_score_labels(make_label({0.8, 0.1, 0.1}),
                                       make_label({0.4, 0.4, 0.2}), 0.5);
  bool ok = close(joint.probs[0], 0.6, 1e-12) &&
            close(joint.probs[1], 0.25, 1e-12) &&
            close(joint.probs[2], 0.15, 1e-12);

  SoftLabel r1 =
      refine_scores(make_label({1, 0, 0}), make_label({0, 1, 0}), 1, 5, 0.5);
  ok = ok && close(r1.probs[0], 0.6, 1e-12) && close(r1.probs[1], 0.4, 1e-12) &&
       close(r1.probs[2], 0.0, 1e-12);
  SoftLabel r4 = refine_scores(make_label({0.5, 0.5, 0}), make_label({0, 0, 1}),
                               4, 5, 0.5);
  ok = ok && close(r4.probs[0], 0.45, 1e-12) &&
       close(r4.probs[1], 0.45, 1e-12) && close(r4.probs[2], 0.1, 1e-12);

  Rng rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    int n_classes = 2 + static_cast<int>(rng.next_below(5));
    SoftLabel a = ts::random_soft_label(n_classes, rng);
    SoftLabel b = ts::random_soft_label(n_classes, rng);
    double gamma = rng.next_double();
    SoftLabel j = joint_score_labels(a, b, gamma);
    double sum = 0.0;
    for (double p : j.probs) sum += p;
    worst = std::max(worst, std::abs(sum - 1.0));

    int total = 2 + static_cast<int>(rng.next_below(8));
    int index = 1 + static_cast<int>(rng.next_below(total - 1));
    SoftLabel r = refine_scores(a, b, index, total, 0.5);
    sum = 0.0;
    for (double p : r.probs) sum += p;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  ok = ok && worst < 1e-9;
  std::ostringstream msg;
  msg << "worst |sum-1| over 1000 pairs = " << worst;
  detail = msg.str();
  return ok;
}

bool criterion2_loss_oracles(std::string& detail) {
  bool ok = close(ce_loss(make_label({0.5, 0.5}), make_label({0.5, 0.5})),
                  std::log(2.0), 1e-9);
  ok = ok && close(ce_loss(make_label({1, 0}), make_label({1, 0})), 0.0, 1e-9);
  ok = ok && close(mse_loss(make_label({0.6, 0.4}), make_label({0.5, 0.5})),
                   0.01, 1e-9);
  ok = ok && close(mse_loss(make_label({1, 0}), make_label({0, 1})), 1.0, 1e-9);

  // Hand value for phi=((1,0),(1,0),(0,1)), labels (A,A,B), tau=1.
  std::vector<Vector> three = {{1, 0}, {1, 0}, {0, 1}};
  ok = ok && close(scl_loss(three, {0, 0, 1}, 1.0),
                   2.0 * std::log1p(1.0 / std::exp(1.0)), 1e-12);

  Rng rng(2002);
  double worst = 0.0;
  int singleton_batches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + static_cast<int>(rng.next_below(7));
    int d = 1 + static_cast<int>(rng.next_below(8));
    int n_classes = 1 + static_cast<int>(rng.next_below(4));
    double tau = 0.25 + rng.next_double() * 2.0;
    std::vector<Vector> phi(n, Vector(d));
    std::vector<int> labels(n);
    std::vector<int> counts(n_classes, 0);
    for (int i = 0; i < n; ++i) {
      for (double& v : phi[i]) v = rng.next_symmetric(1.5);
      labels[i] = static_cast<int>(rng.next_below(n_classes));
      ++counts[labels[i]];
    }
    bool has_singleton = false;
    for (int count : counts) has_singleton = has_singleton || count == 1;
    singleton_batches += has_singleton ? 1 : 0;
    worst = std::max(worst, std::abs(scl_loss(phi, labels, tau) -
                                     ts::scl_reference(phi, labels, tau)));
  }
  ok = ok && worst < 1e-9 && singleton_batches > 0;
  std::ostringstream msg;
  msg << "worst |scl - bruteforce| = " << worst << " over 200 batches ("
      << singleton_batches << " with singleton anchors)";
  detail = msg.str();
  return ok;
}

bool criterion3_gradient_check(std::string& detail) {
  EncoderConfig ec;
  ec.vocab_size = 23;
  ec.d_model = 8;
  ec.n_layers = 1;
  ec.n_heads = 2;
  ec.max_len = 12;
  ec.ffn_dim = 16;
  ModelParams model;
  model.encoder = init_encoder(ec, 99);
  model.head = init_head(ec.d_model, 3, 101);

  Rng rng(555);
  std::vector<EncodedInstance> batch;
  for (int i = 0; i < 4; ++i) {
    EncodedInstance inst;
    inst.id = "g" + std::to_string(i);
    inst.tokens = ts::random_sequence(ec.vocab_size, 3 + i % 2, 2 + i % 3,
                                      ec.max_len, rng);
    inst.label = ts::random_soft_label(3, rng);
    batch.push_back(inst);
  }
  LossWeights weights;
  weights.beta_ce = 0.7;
  weights.beta_scl = 0.3;
  weights.beta_mse = 1.1;
  weights.temperature = 0.8;

  std::vector<const EncodedInstance*> ptrs;
  for (const auto& inst : batch) ptrs.push_back(&inst);
  ModelParams grads;
  TrainWorkspace ws;
  model_batch_gradients(ptrs, model, weights, grads, ws);

  auto forward = [&] {
    std::vector<Vector> logits(batch.size()), cls(batch.size());
    std::vector<SoftLabel> targets;
    for (size_t i = 0; i < batch.size(); ++i) {
      Matrix hidden = encode(batch[i].tokens, model.encoder);
      cls[i].assign(hidden.row(0), hidden.row(0) + hidden.cols);
      Vector tanh_out;
      head_forward(model.head, cls[i], tanh_out, logits[i]);
      targets.push_back(*batch[i].label);
    }
    return combined_loss(logits, cls, targets, weights).total;
  };

  std::vector<TensorRef> param_refs, grad_refs;
  collect_tensors(model, param_refs, true);
  collect_tensors(grads, grad_refs, true);
  auto report =
      ts::finite_difference_check(param_refs, grad_refs, forward, 1e-5, 1e-5);
  std::ostringstream msg;
  msg << "max relative error " << report.max_rel_error << " over "
      << report.checked << " parameters (worst: " << report.worst_tensor << ")";
  detail = msg.str();
  return report.max_rel_error < 1e-4;
}

bool criterion4_masking_statistics(std::string& detail) {
  const double z = 3.290527;  // two-sided 99.9% normal quantile
  const int n = 20000;
  bool ok = true;
  std::ostringstream msg;
  for (double rho : {0.15, 0.25}) {
    TokenSequence seq;
    seq.ids.assign(n, 7);
    seq.special.assign(n, 0);
    Rng rng(static_cast<uint64_t>(rho * 100) + 4004);
    TokenSequence out = mask_augment_instance(seq, rho, rng);
    int masked = 0;
    for (int id : out.ids) masked += id == Vocabulary::kMask ? 1 : 0;
    double rate = double(masked) / n;
    double half = z * std::sqrt(rho * (1 - rho) / n);
    ok = ok && std::abs(rate - rho) < half;
    msg << "rho=" << rho << " rate=" << rate << " ci=+/-" << half << "; ";
  }
  TokenSequence seq;
  seq.ids = {0, 7, 8, 9, 1, 10, 11};
  seq.special = {1, 0, 0, 0, 1, 0, 0};
  Rng rng0(1), rng1(2);
  TokenSequence zero = mask_augment_instance(seq, 0.0, rng0);
  ok = ok && zero.ids == seq.ids;
  TokenSequence all = mask_augment_instance(seq, 1.0, rng1);
  for (int i = 0; i < all.size(); ++i) {
    if (seq.special[i]) {
      ok = ok && all.ids[i] == seq.ids[i];
    } else {
      ok = ok && all.ids[i] == Vocabulary::kMask;
    }
  }
  detail = msg.str() + "boundaries exact";
  return ok;
}

bool criterion5_metric_oracle(std::string& detail) {
  bool ok = true;
  double worst = 0.0;

  ok = ok && jsd(make_label({0.5, 0.5}), make_label({0.5, 0.5})) == 0.0;
  ok = ok && close(jsd(make_label({1, 0}), make_label({0, 1})), 1.0, 1e-12);
  ok = ok && close(jsd(make_label({0.5, 0.5}), make_label({0.25, 0.75})),
                   0.048795, 1e-6);

  for (int n_classes : {2, 3}) {
    std::vector<SoftLabel> dists;
    std::vector<int> parts(n_classes, 0);
    std::function<void(int, int)> rec = [&](int idx, int remaining) {
      if (idx == n_classes - 1) {
        parts[idx] = remaining;
        SoftLabel label;
        for (int p : parts) label.probs.push_back(p / 4.0);
        dists.push_back(label);
        return;
      }
      for (int p = 0; p <= remaining; ++p) {
        parts[idx] = p;
        rec(idx + 1, remaining - p);
      }
    };
    rec(0, 4);

    size_t m = dists.size();
    for (size_t a = 0; a < m; ++a) {
      for (size_t b = 0; b < m; ++b) {
        worst = std::max(worst, std::abs(jsd(dists[a], dists[b]) -
                                         ts::jsd_reference(dists[a], dists[b])));
        worst = std::max(worst,
                         std::abs(distributional_mse(dists[a], dists[b]) -
                                  ts::mse_reference(dists[a], dists[b])));
      }
    }
    for (int n = 1; n <= 4; ++n) {
      size_t stride = 5 * n + 1;
      for (size_t base = 0; base < m * m; base += stride) {
        std::vector<SoftLabel> preds, golds;
        size_t state = base;
        for (int i = 0; i < n; ++i) {
          preds.push_back(dists[state % m]);
          golds.push_back(dists[(state / m) % m]);
          state = state * 31 + 17;
        }
        worst = std::max(worst, std::abs(accuracy(preds, golds) -
                                         ts::accuracy_reference(preds, golds)));
        double macro_ref = 0.0;
        for (int c = 0; c < n_classes; ++c) {
          ClassPRF got = class_f1(preds, golds, c, n_classes);
          ts::PrfRef want = ts::prf_reference(preds, golds, c);
          worst = std::max({worst, std::abs(got.precision - want.p),
                            std::abs(got.recall - want.r),
                            std::abs(got.f1 - want.f1)});
          macro_ref += want.f1;
        }
        worst = std::max(worst, std::abs(macro_f1(preds, golds, n_classes) -
                                         macro_ref / n_classes));
      }
    }
  }
  ok = ok && worst < 1e-9;
  std::ostringstream msg;
  msg << "worst |metric - bruteforce| = " << worst;
  detail = msg.str();
  return ok;
}

// Criteria 6 and 7 share one set of benchmark runs. Teachers come out
// bit-identical across strategies (purpose-tagged sub-seeds; the equality is
// pinned by the unit tests), so each seed trains them once and derives the
// strategy outcomes from them.
struct TrendOutcome {
  bool frozen_encoder_ok = false;
  int wins = 0;
  int seeds = 0;
  double mean_ours = 0.0, mean_gold = 0.0, mean_equal_w = 0.0,
         mean_combined = 0.0;
};

PipelineConfig benchmark_config(uint64_t seed) {
  PipelineConfig c;
  c.synthetic.n_labeled = 1000;
  c.synthetic.n_unlabeled = 3000;
  c.synthetic.n_dev = 500;
  c.synthetic.n_test = 500;
  c.synthetic.n_classes = 3;
  c.synthetic.annotator_noise = 0.25;
  c.synthetic.annotators_per_instance = 5;
  c.synthetic.vocab_size = 120;
  c.d_model = 64;
  c.n_layers = 2;
  c.n_heads = 2;
  c.max_len = 64;
  c.ffn_dim = 256;
  c.copies_per_instance = 2;
  c.scoring.iterations = 3;
  c.teacher_epochs = 6;
  c.teacher_batch_size = 32;
  c.teacher_learning_rate = 1e-3;
  c.student_epochs = 3;
  c.student_batch_size = 64;
  c.student_learning_rate = 3e-3;
  c.seed = seed;
  c.threads = 0;
  validate_config(c);
  return c;
}

TrendOutcome run_trend_benchmark() {
  TrendOutcome outcome;
  const uint64_t seeds[5] = {101, 102, 103, 104, 105};
  for (uint64_t seed : seeds) {
    PipelineConfig c = benchmark_config(seed);
    PreparedData data = prepare_data(obtain_bundle(c), c);
    EncoderConfig ec = c.encoder_config(data.vocab.size());
    TrainingConfig teacher_cfg = c.teacher_training();
    TrainingConfig student_cfg = c.student_training();

    ModelParams gt;
    gt.encoder = init_encoder(ec, derive_seed(c.seed, "init-gold-teacher"));
    gt.head = init_head(ec.d_model, 3,
                        derive_seed(c.seed, "init-gold-teacher-head"));
    gt.role = ModelRole::gold_teacher;
    train_teacher(data.labeled, gt, teacher_cfg, c.weights, data.dev,
                  data.classes, derive_seed(c.seed, "train-gold-teacher"),
                  "gold_teacher");

    ModelParams mt;
    mt.encoder = init_encoder(ec, derive_seed(c.seed, "init-masked-teacher"));
    mt.head = init_head(ec.d_model, 3,
                        derive_seed(c.seed, "init-masked-teacher-head"));
    mt.role = ModelRole::masked_teacher;
    train_teacher(data.augmented_labeled, mt, teacher_cfg, c.weights, data.dev,
                  data.classes, derive_seed(c.seed, "train-masked-teacher"),
                  "masked_teacher");

    PseudoLabelResult pl =
        assign_pseudo_labels(data.augmented_unlabeled, gt, mt, c.scoring.gamma);

    auto bootstrap_student = [&](int iterations) {
      ModelParams student;
      student.role = ModelRole::student;
      student.encoder.config = ec;
      inherit_encoder(student, gt);
      student.head =
          init_head(ec.d_model, 3, derive_seed(c.seed, "init-student-head"));
      ScoringConfig scoring = c.scoring;
      scoring.iterations = iterations;
      std::vector<EncodedInstance> pseudo = pl.pseudo_labeled;
      train_student_bootstrap(data.labeled, pseudo, pl.masked_scores, student,
                              scoring, student_cfg, c.weights, data.dev,
                              data.classes,
                              derive_seed(c.seed, "train-student"));
      return student;
    };
    ModelParams ours = bootstrap_student(c.scoring.iterations);
    ModelParams equal_w = bootstrap_student(1);

    if (seed == seeds[0]) {
      // Criterion 6: after inheritance and a full bootstrap, the student
      // encoder is bitwise equal to the gold teacher's.
      std::vector<TensorRef> s_refs, g_refs;
      collect_tensors(ours.encoder, "", s_refs);
      collect_tensors(gt.encoder, "", g_refs);
      outcome.frozen_encoder_ok = true;
      for (size_t t = 0; t < s_refs.size(); ++t) {
        outcome.frozen_encoder_ok =
            outcome.frozen_encoder_ok && *s_refs[t].values == *g_refs[t].values;
      }
    }

    ModelParams combined;
    combined.encoder = init_encoder(ec, derive_seed(c.seed, "init-combined"));
    combined.head =
        init_head(ec.d_model, 3, derive_seed(c.seed, "init-combined-head"));
    combined.role = ModelRole::gold_teacher;
    std::vector<EncodedInstance> combined_set = data.labeled;
    combined_set.insert(combined_set.end(), data.augmented_labeled.begin(),
                        data.augmented_labeled.end());
    train_teacher(combined_set, combined, teacher_cfg, c.weights, data.dev,
                  data.classes, derive_seed(c.seed, "train-combined"),
                  "combined");

    std::vector<SoftLabel> dev_golds = gold_labels(data.dev);
    double a_ours = accuracy(predict_probs(ours, data.dev), dev_golds);
    double a_gold = accuracy(predict_probs(gt, data.dev), dev_golds);
    double a_equal = accuracy(predict_probs(equal_w, data.dev), dev_golds);
    double a_comb = accuracy(predict_probs(combined, data.dev), dev_golds);

    outcome.seeds += 1;
    outcome.wins += a_ours >= a_gold ? 1 : 0;
    outcome.mean_ours += a_ours;
    outcome.mean_gold += a_gold;
    outcome.mean_equal_w += a_equal;
    outcome.mean_combined += a_comb;
    std::printf("  [trend] seed %llu: ours=%.4f gold=%.4f equal_w=%.4f "
                "combined=%.4f\n",
                (unsigned long long)seed, a_ours, a_gold, a_equal, a_comb);
    std::fflush(stdout);
  }
  outcome.mean_ours /= outcome.seeds;
  outcome.mean_gold /= outcome.seeds;
  outcome.mean_equal_w /= outcome.seeds;
  outcome.mean_combined /= outcome.seeds;
  return outcome;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool criterion8_determinism(std::string& detail) {
  PipelineConfig c;
  c.synthetic.n_labeled = 120;
  c.synthetic.n_unlabeled = 240;
  c.synthetic.n_dev = 60;
  c.synthetic.n_test = 60;
  c.synthetic.annotators_per_instance = 5;
  c.d_model = 16;
  c.n_layers = 1;
  c.n_heads = 2;
  c.max_len = 64;
  c.ffn_dim = 32;
  c.copies_per_instance = 2;
  c.scoring.iterations = 2;
  c.teacher_epochs = 2;
  c.teacher_batch_size = 16;
  c.teacher_learning_rate = 1e-3;
  c.student_epochs = 2;
  c.student_batch_size = 32;
  c.student_learning_rate = 3e-3;
  c.seed = 4242;
  validate_config(c);

  std::string base = "/tmp/tandem_acceptance_det";
  fs::remove_all(base + "_a");
  fs::remove_all(base + "_b");
  fs::remove_all(base + "_c");

  c.out_dir = base + "_a";
  c.threads = 1;
  if (run_pipeline(c) != 0) return false;
  c.out_dir = base + "_b";
  if (run_pipeline(c) != 0) return false;
  c.out_dir = base + "_c";
  c.threads = 3;  // the worker count must not change any output byte
  if (run_pipeline(c) != 0) return false;

  std::string a = slurp(base + "_a/report.json");
  std::string b = slurp(base + "_b/report.json");
  std::string cc = slurp(base + "_c/report.json");
  bool ok = !a.empty() && a == b && a == cc;
  ok = ok && slurp(base + "_a/metrics/student.jsonl") ==
                 slurp(base + "_c/metrics/student.jsonl");
  ok = ok && slurp(base + "_a/checkpoints/final.ckpt") ==
                 slurp(base + "_c/checkpoints/final.ckpt");
  detail = ok ? "reports, metrics and checkpoints byte-identical"
              : "outputs differ";
  fs::remove_all(base + "_a");
  fs::remove_all(base + "_b");
  fs::remove_all(base + "_c");
  return ok;
}

bool criterion9_bootstrap_schedule(std::string& detail) {
  PipelineConfig c;
  c.synthetic.n_labeled = 60;
  c.synthetic.n_unlabeled = 120;
  c.synthetic.n_dev = 30;
  c.synthetic.n_test = 30;
  c.synthetic.annotators_per_instance = 5;
  c.d_model = 16;
  c.n_layers = 1;
  c.n_heads = 2;
  c.max_len = 64;
  c.ffn_dim = 32;
  c.copies_per_instance = 2;
  c.scoring.iterations = 5;
  c.teacher_epochs = 1;
  c.teacher_batch_size = 16;
  c.teacher_learning_rate = 1e-3;
  c.student_epochs = 1;
  c.student_batch_size = 32;
  c.student_learning_rate = 3e-3;
  c.seed = 31337;
  c.threads = 0;
  validate_config(c);

  PreparedData data = prepare_data(obtain_bundle(c), c);
  StrategyOutcome n5 = run_strategy(StrategyKind::ours, data, c);
  bool ok =
      n5.bootstrap.lambdas.size() == 4 && n5.bootstrap.iterations.size() == 5;
  const double expected[4] = {0.2, 0.4, 0.6, 0.8};
  for (size_t i = 0; ok && i < 4; ++i) {
    ok = n5.bootstrap.lambdas[i] == expected[i];  // i/N is exact in binary
  }

  PipelineConfig c1 = c;
  c1.scoring.iterations = 1;
  StrategyOutcome n1 = run_strategy(StrategyKind::ours, data, c1);
  ok = ok && n1.bootstrap.lambdas.empty() && n1.bootstrap.iterations.size() == 1;

  std::ostringstream msg;
  msg << "N=5 lambdas = (";
  for (size_t i = 0; i < n5.bootstrap.lambdas.size(); ++i) {
    msg << (i ? ", " : "") << n5.bootstrap.lambdas[i];
  }
  msg << "); N=1 refinements = " << n1.bootstrap.lambdas.size();
  detail = msg.str();
  return ok;
}

}  // namespace

int main() {
  set_worker_count(0);

  run_criterion(1, "formula fidelity: joint scoring and refinement",
                criterion1_formula_fidelity);
  run_criterion(2, "loss oracles: CE, MSE, contrastive brute force",
                criterion2_loss_oracles);
  run_criterion(3, "gradient check vs central finite differences",
                criterion3_gradient_check);
  run_criterion(4, "masking statistics within 99.9% binomial CI",
                criterion4_masking_statistics);
  run_criterion(5, "metric oracle vs brute-force references",
                criterion5_metric_oracle);

  TrendOutcome trend;
  bool trend_ran = false;
  run_criterion(6, "frozen-encoder and inheritance invariants",
                [&](std::string& detail) {
                  trend = run_trend_benchmark();
                  trend_ran = true;
                  detail = trend.frozen_encoder_ok
                               ? "student encoder bitwise equal to the gold "
                                 "teacher's after a full bootstrap"
                               : "student encoder diverged";
                  return trend.frozen_encoder_ok;
                });
  run_criterion(
      7, "ablation trend on the synthetic benchmark", [&](std::string& detail) {
        if (!trend_ran) return false;
        std::ostringstream msg;
        msg << "ours>=gold in " << trend.wins << "/" << trend.seeds
            << " seeds; means: ours=" << trend.mean_ours
            << " gold=" << trend.mean_gold << " equal_w=" << trend.mean_equal_w
            << " combined=" << trend.mean_combined;
        detail = msg.str();
        return trend.wins >= 4 && trend.mean_ours >= trend.mean_equal_w &&
               trend.mean_ours >= trend.mean_combined;
      });
  run_criterion(8, "same-seed and worker-count determinism",
                criterion8_determinism);
  run_criterion(9, "bootstrap schedule: lambda ramp and refinement count",
                criterion9_bootstrap_schedule);

  int failures = 0;
  for (const auto& result : g_results) failures += result.pass ? 0 : 1;
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(g_results.size()) - failures, g_results.size());
  return failures == 0 ? 0 : 1;
}
