#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tandem/classifier.hpp"
#include "tandem/losses.hpp"
#include "tandem/threading.hpp"
#include "test_support.hpp"

using namespace tandem;
namespace ts = test_support;

namespace {

ModelParams tiny_model(uint64_t seed, int n_classes = 3) {
  EncoderConfig ec;
  ec.vocab_size = 40;
  ec.d_model = 8;
  ec.n_layers = 1;
  ec.n_heads = 2;
  ec.max_len = 24;
  ec.ffn_dim = 16;
  ModelParams model;
  model.encoder = init_encoder(ec, seed);
  model.head = init_head(ec.d_model, n_classes, seed + 1);
  return model;
}

}  // namespace

TEST_CASE("init_head shapes and determinism") {
  HeadParams head = init_head(4, 3, 12);
  CHECK(head.w1.rows == 4);
  CHECK(head.w1.cols == 4);
  CHECK(head.b1.size() == 4);
  CHECK(head.w2.rows == 3);
  CHECK(head.w2.cols == 4);
  CHECK(head.b2.size() == 3);
  for (double b : head.b1) CHECK(b == 0.0);
  for (double b : head.b2) CHECK(b == 0.0);

  HeadParams again = init_head(4, 3, 12);
  CHECK(head.w1.data == again.w1.data);
  CHECK(head.w2.data == again.w2.data);

  CHECK_THROWS(init_head(4, 0, 1));
  CHECK_THROWS(init_head(0, 3, 1));
}

TEST_CASE("zero parameters give a uniform prediction for any d and |C|") {
  Rng rng(1);
  for (int n_classes : {2, 3, 5}) {
    for (int d : {4, 8}) {
      EncoderConfig ec;
      ec.vocab_size = 40;
      ec.d_model = d;
      ec.n_layers = 1;
      ec.n_heads = 2;
      ec.max_len = 24;
      ec.ffn_dim = 2 * d;
      ModelParams model;
      model.encoder = init_encoder(ec, 9);
      model.head = init_head(d, n_classes, 10);
      model.head.w1.zero();
      model.head.w2.zero();

      TokenSequence seq = ts::random_sequence(40, 3, 3, 24, rng);
      Prediction pred = classify(seq, model);
      for (double p : pred.probs.probs) {
        CHECK(p == doctest::Approx(1.0 / n_classes).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("prediction probabilities sum to one within 1e-9") {
  ModelParams model = tiny_model(77);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    TokenSequence seq = ts::random_sequence(40, 4, 3, 24, rng);
    Prediction pred = classify(seq, model);
    double sum = 0.0;
    for (double p : pred.probs.probs) sum += p;
    CHECK(std::abs(sum - 1.0) < 1e-9);
    CHECK(pred.cls_repr.size() == 8);
    CHECK(pred.logits.size() == 3);
  }
}

TEST_CASE("softmax(10,0,0) matches an independently computed value") {
  ModelParams model = tiny_model(5);
  model.head.w2.zero();
  model.head.b2 = {10.0, 0.0, 0.0};
  Rng rng(6);
  TokenSequence seq = ts::random_sequence(40, 3, 2, 24, rng);
  Prediction pred = classify(seq, model);

  // Independent evaluation of softmax(10, 0, 0).
  double e10 = std::exp(10.0);
  double denom = e10 + 2.0;
  CHECK(pred.probs.probs[0] == doctest::Approx(e10 / denom).epsilon(1e-12));
  CHECK(pred.probs.probs[1] == doctest::Approx(1.0 / denom).epsilon(1e-12));
  CHECK(pred.probs.probs[2] == doctest::Approx(1.0 / denom).epsilon(1e-12));
  CHECK(pred.probs.probs[0] == doctest::Approx(0.99991).epsilon(1e-4));
  CHECK(pred.probs.probs[1] == doctest::Approx(0.0000454).epsilon(1e-2));
}

TEST_CASE("argmax of probabilities equals argmax of logits") {
  ModelParams model = tiny_model(13, 4);
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    TokenSequence seq = ts::random_sequence(40, 3, 4, 24, rng);
    Prediction pred = classify(seq, model);
    int logit_arg = 0;
    for (int c = 1; c < 4; ++c) {
      if (pred.logits[c] > pred.logits[logit_arg]) logit_arg = c;
    }
    CHECK(argmax_index(pred.probs) == logit_arg);
  }
}

TEST_CASE("inherit_encoder copies exactly, deeply, and freezes") {
  ModelParams teacher = tiny_model(21);
  teacher.role = ModelRole::gold_teacher;
  ModelParams student = tiny_model(22);
  student.role = ModelRole::student;
  HeadParams head_before = student.head;

  inherit_encoder(student, teacher);
  CHECK(student.encoder_frozen);
  CHECK(student.encoder.token_embedding.data == teacher.encoder.token_embedding.data);
  CHECK(student.encoder.layers[0].wq.data == teacher.encoder.layers[0].wq.data);
  CHECK(student.head.w1.data == head_before.w1.data);  // head untouched

  // Deep copy: mutating the teacher afterwards leaves the student unchanged.
  double original = student.encoder.token_embedding.data[0];
  teacher.encoder.token_embedding.data[0] += 5.0;
  CHECK(student.encoder.token_embedding.data[0] == original);

  ModelParams other = tiny_model(23);
  other.encoder.config.d_model = 16;  // config mismatch
  CHECK_THROWS(inherit_encoder(other, teacher));
}

TEST_CASE("predict_batch equals element-wise classify and is order-preserving") {
  ModelParams model = tiny_model(31);
  Rng rng(17);
  std::vector<TokenSequence> batch;
  for (int i = 0; i < 7; ++i) {
    batch.push_back(ts::random_sequence(40, 3, 3, 24, rng));
  }
  CHECK(predict_batch({}, model).empty());

  auto preds = predict_batch(batch, model);
  REQUIRE(preds.size() == batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    Prediction single = classify(batch[i], model);
    CHECK(preds[i].probs.probs == single.probs.probs);
    CHECK(preds[i].logits == single.logits);
  }
}

TEST_CASE("predict_batch output is independent of the worker count") {
  ModelParams model = tiny_model(41);
  Rng rng(19);
  std::vector<TokenSequence> batch;
  for (int i = 0; i < 12; ++i) {
    batch.push_back(ts::random_sequence(40, 4, 2, 24, rng));
  }
  set_worker_count(1);
  auto serial = predict_batch(batch, model);
  set_worker_count(4);
  auto parallel = predict_batch(batch, model);
  set_worker_count(0);
  for (size_t i = 0; i < batch.size(); ++i) {
    CHECK(serial[i].probs.probs == parallel[i].probs.probs);
  }
}

TEST_CASE("predict_batch reports the failing instance index") {
  ModelParams model = tiny_model(51);
  Rng rng(23);
  std::vector<TokenSequence> batch = {ts::random_sequence(40, 3, 3, 24, rng)};
  TokenSequence bad;
  bad.ids = {0, 999, 1, 5};
  bad.special = {1, 0, 1, 0};
  batch.push_back(bad);
  try {
    predict_batch(batch, model);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("instance 1") != std::string::npos);
  }
}
