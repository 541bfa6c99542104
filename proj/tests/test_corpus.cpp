#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "tandem/corpus.hpp"

using namespace tandem;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("/tmp/tandem_test_" + name) {
    std::ofstream out(path);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

ClassSet bpn() { return ClassSet{{"B", "PB", "NB"}}; }

}  // namespace

TEST_CASE("soft_label_from_annotations empirical frequencies") {
  SoftLabel label = soft_label_from_annotations({"B", "B", "NB", "PB"}, bpn());
  CHECK(label.probs == std::vector<double>{0.5, 0.25, 0.25});

  SoftLabel unanimous = soft_label_from_annotations({"B", "B", "B"}, bpn());
  CHECK(unanimous.probs == std::vector<double>{1.0, 0.0, 0.0});

  CHECK_THROWS(soft_label_from_annotations({}, bpn()));
  CHECK_THROWS(soft_label_from_annotations({"B", "XX"}, bpn()));
}

TEST_CASE("load_jsonl_dataset accepts well-formed lines") {
  TempFile file("ok.jsonl",
                R"({"id":"a","history":[{"speaker":"U","text":"hi there"}],"target":"ok then","label_distribution":[0.6,0.3,0.1]})"
                "\n"
                R"({"id":"b","history":[{"speaker":"U","text":"x"},{"speaker":"S","text":"y"}],"target":"z"})"
                "\n");
  auto instances = load_jsonl_dataset(file.path, bpn());
  REQUIRE(instances.size() == 2);
  CHECK(instances[0].id == "a");
  REQUIRE(instances[0].label.has_value());
  CHECK(instances[0].label->probs == std::vector<double>{0.6, 0.3, 0.1});
  CHECK(!instances[1].label.has_value());
  CHECK(instances[1].history.size() == 2);
}

TEST_CASE("load_jsonl_dataset error reporting") {
  SUBCASE("malformed JSON names the line") {
    TempFile file("bad.jsonl",
                  R"({"id":"a","history":[{"speaker":"U","text":"t"}],"target":"u"})"
                  "\n{not json\n");
    try {
      load_jsonl_dataset(file.path, bpn());
      FAIL("expected an error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
  }
  SUBCASE("label sum outside tolerance") {
    TempFile file("sum.jsonl",
                  R"({"id":"a","history":[{"speaker":"U","text":"t"}],"target":"u","label_distribution":[0.6,0.3,0.3]})"
                  "\n");
    try {
      load_jsonl_dataset(file.path, bpn());
      FAIL("expected an error");
    } catch (const std::exception& e) {
      std::string msg = e.what();
      CHECK(msg.find("label sum 1.2 exceeds tolerance") != std::string::npos);
    }
  }
  SUBCASE("label length mismatch") {
    TempFile file("len.jsonl",
                  R"({"id":"a","history":[{"speaker":"U","text":"t"}],"target":"u","label_distribution":[0.5,0.5]})"
                  "\n");
    CHECK_THROWS(load_jsonl_dataset(file.path, bpn()));
  }
  SUBCASE("empty history and empty target are rejected") {
    TempFile empty_h("eh.jsonl", R"({"id":"a","history":[],"target":"u"})" "\n");
    CHECK_THROWS(load_jsonl_dataset(empty_h.path, bpn()));
    TempFile empty_t("et.jsonl",
                     R"({"id":"a","history":[{"speaker":"U","text":"t"}],"target":""})"
                     "\n");
    CHECK_THROWS(load_jsonl_dataset(empty_t.path, bpn()));
  }
}

TEST_CASE("labels within 1e-6 of unit sum are renormalized") {
  TempFile file("norm.jsonl",
                R"({"id":"a","history":[{"speaker":"U","text":"t"}],"target":"u","label_distribution":[0.6000004,0.3,0.1]})"
                "\n");
  auto instances = load_jsonl_dataset(file.path, bpn());
  REQUIRE(instances.size() == 1);
  double sum = 0.0;
  for (double p : instances[0].label->probs) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("jsonl round trip is semantically lossless") {
  SyntheticSpec spec;
  spec.n_instances = 24;
  spec.seed = 3;
  DatasetBundle bundle = generate_synthetic_corpus(spec);
  std::string path = "/tmp/tandem_test_roundtrip.jsonl";
  write_jsonl(path, bundle.labeled);
  auto loaded = load_jsonl_dataset(path, bundle.classes);
  std::remove(path.c_str());

  REQUIRE(loaded.size() == bundle.labeled.size());
  for (size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].id == bundle.labeled[i].id);
    CHECK(loaded[i].target == bundle.labeled[i].target);
    REQUIRE(loaded[i].history.size() == bundle.labeled[i].history.size());
    for (size_t h = 0; h < loaded[i].history.size(); ++h) {
      CHECK(loaded[i].history[h].speaker == bundle.labeled[i].history[h].speaker);
      CHECK(loaded[i].history[h].text == bundle.labeled[i].history[h].text);
    }
    CHECK(loaded[i].label->probs == bundle.labeled[i].label->probs);
  }
}

TEST_CASE("manifest round trip") {
  std::string path = "/tmp/tandem_test_manifest.json";
  write_manifest(path, bpn());
  ClassSet loaded = load_manifest(path);
  std::remove(path.c_str());
  CHECK(loaded.names == bpn().names);
}

TEST_CASE("generate_synthetic_corpus basic contracts") {
  SyntheticSpec spec;
  spec.n_instances = 100;
  spec.n_classes = 3;
  spec.annotators_per_instance = 15;
  spec.annotator_noise = 0.2;
  spec.seed = 7;
  DatasetBundle bundle = generate_synthetic_corpus(spec);
  int total = static_cast<int>(bundle.labeled.size() + bundle.unlabeled.size() +
                               bundle.dev.size() + bundle.test.size());
  CHECK(total == 100);
  for (const auto& inst : bundle.labeled) {
    REQUIRE(inst.label.has_value());
    double sum = 0.0;
    for (double p : inst.label->probs) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (const auto& inst : bundle.unlabeled) CHECK(!inst.label.has_value());
}

TEST_CASE("noise=0 gives one-hot labels") {
  SyntheticSpec spec;
  spec.n_instances = 40;
  spec.annotator_noise = 0.0;
  spec.seed = 9;
  DatasetBundle bundle = generate_synthetic_corpus(spec);
  for (const auto& inst : bundle.labeled) {
    int ones = 0, zeros = 0;
    for (double p : inst.label->probs) {
      if (p == 1.0) ++ones;
      if (p == 0.0) ++zeros;
    }
    CHECK(ones == 1);
    CHECK(zeros == 2);
  }
}

TEST_CASE("same spec twice gives identical corpora") {
  SyntheticSpec spec;
  spec.n_instances = 30;
  spec.seed = 123;
  DatasetBundle a = generate_synthetic_corpus(spec);
  DatasetBundle b = generate_synthetic_corpus(spec);
  REQUIRE(a.labeled.size() == b.labeled.size());
  for (size_t i = 0; i < a.labeled.size(); ++i) {
    CHECK(a.labeled[i].target == b.labeled[i].target);
    CHECK(a.labeled[i].label->probs == b.labeled[i].label->probs);
  }
}

TEST_CASE("invalid synthetic specs are rejected") {
  SyntheticSpec spec;
  spec.n_instances = 10;
  spec.n_classes = 1;
  CHECK_THROWS(generate_synthetic_corpus(spec));
  spec.n_classes = 3;
  spec.vocab_size = 10;  // below 10 * n_classes
  CHECK_THROWS(generate_synthetic_corpus(spec));
  spec.vocab_size = 120;
  spec.annotators_per_instance = 0;
  CHECK_THROWS(generate_synthetic_corpus(spec));
}

TEST_CASE("empirical soft labels converge to the analytic vote distribution") {
  SyntheticSpec spec;
  spec.n_instances = 60;
  spec.n_classes = 3;
  spec.annotators_per_instance = 1000;
  spec.annotator_noise = 0.3;
  spec.seed = 77;
  DatasetBundle bundle = generate_synthetic_corpus(spec);
  REQUIRE(!bundle.labeled.empty());

  // Per true class, the mean soft label over instances approaches the
  // analytic vote distribution within 0.02 per entry at m=1000.
  std::vector<std::vector<double>> sums(3, std::vector<double>(3, 0.0));
  std::vector<int> counts(3, 0);
  for (const auto& inst : bundle.labeled) {
    int true_class = 0;
    for (int c = 1; c < 3; ++c) {
      if (inst.label->probs[c] > inst.label->probs[true_class]) true_class = c;
    }
    ++counts[true_class];
    for (int c = 0; c < 3; ++c) sums[true_class][c] += inst.label->probs[c];
    // Individual labels are within a looser band of the analytic values.
    auto analytic = annotator_vote_distribution(true_class, 3, 0.3);
    for (int c = 0; c < 3; ++c) {
      CHECK(std::abs(inst.label->probs[c] - analytic[c]) < 0.06);
    }
  }
  for (int t = 0; t < 3; ++t) {
    REQUIRE(counts[t] > 0);
    auto analytic = annotator_vote_distribution(t, 3, 0.3);
    for (int c = 0; c < 3; ++c) {
      CHECK(std::abs(sums[t][c] / counts[t] - analytic[c]) < 0.02);
    }
  }
}
