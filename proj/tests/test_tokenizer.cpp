#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "tandem/tokenizer.hpp"

using namespace tandem;

namespace {

Vocabulary small_vocab() {
  DialogueInstance inst;
  inst.id = "v";
  inst.history = {{"U", "Hello, world"}, {"S", "the world turns"}};
  inst.target = "the end";
  return build_vocabulary({&inst});
}

}  // namespace

TEST_CASE("word_tokenize lowercases and splits punctuation") {
  auto tokens = word_tokenize("Hello, world");
  CHECK(tokens == std::vector<std::string>{"hello", ",", "world"});
  CHECK(word_tokenize("").empty());
  CHECK(word_tokenize("  a  b ") == std::vector<std::string>{"a", "b"});
  CHECK(word_tokenize("don't") == std::vector<std::string>{"don", "'", "t"});
}

TEST_CASE("reserved ids occupy the fixed block 0-4") {
  Vocabulary vocab = small_vocab();
  CHECK(vocab.token_to_id.at("[CLS]") == 0);
  CHECK(vocab.token_to_id.at("[SEP]") == 1);
  CHECK(vocab.token_to_id.at("[MASK]") == 2);
  CHECK(vocab.token_to_id.at("[PAD]") == 3);
  CHECK(vocab.token_to_id.at("[UNK]") == 4);
  CHECK(vocab.size() > Vocabulary::kReservedCount);
  // Bijection: every id maps back to its token.
  for (int id = 0; id < vocab.size(); ++id) {
    CHECK(vocab.token_to_id.at(vocab.id_to_token[id]) == id);
  }
}

TEST_CASE("tokenize maps words and falls back to [UNK]") {
  Vocabulary vocab = small_vocab();
  auto ids = tokenize("Hello, world", vocab);
  REQUIRE(ids.size() == 3);
  CHECK(ids[0] == vocab.token_to_id.at("hello"));
  CHECK(ids[1] == vocab.token_to_id.at(","));
  CHECK(ids[2] == vocab.token_to_id.at("world"));

  auto unk = tokenize("zebra", vocab);
  REQUIRE(unk.size() == 1);
  CHECK(unk[0] == Vocabulary::kUnk);

  CHECK(tokenize("", vocab).empty());
}

TEST_CASE("vocabulary order is frequency then alphabetical") {
  DialogueInstance inst;
  inst.id = "v";
  inst.history = {{"U", "b b b a a c"}};
  inst.target = "a";
  Vocabulary vocab = build_vocabulary({&inst});
  // a and b both occur 3 times; alphabetical tie-break puts a first.
  CHECK(vocab.id_to_token[Vocabulary::kReservedCount] == "a");
  CHECK(vocab.id_to_token[Vocabulary::kReservedCount + 1] == "b");
  CHECK(vocab.id_to_token[Vocabulary::kReservedCount + 2] == "c");
}

TEST_CASE("vocabulary file round trip preserves ids") {
  Vocabulary vocab = small_vocab();
  std::string path = "/tmp/tandem_test_vocab.txt";
  save_vocabulary(path, vocab);
  Vocabulary loaded = load_vocabulary(path);
  std::remove(path.c_str());
  CHECK(loaded.id_to_token == vocab.id_to_token);
}
