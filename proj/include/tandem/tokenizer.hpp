#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tandem/corpus.hpp"

namespace tandem {

// Word-level vocabulary. Reserved tokens occupy fixed ids 0-4; real tokens
// follow in frequency order so the mapping is deterministic.
struct Vocabulary {
  static constexpr int kCls = 0;
  static constexpr int kSep = 1;
  static constexpr int kMask = 2;
  static constexpr int kPad = 3;
  static constexpr int kUnk = 4;
  static constexpr int kReservedCount = 5;

  std::vector<std::string> id_to_token;
  std::unordered_map<std::string, int> token_to_id;

  int size() const { return static_cast<int>(id_to_token.size()); }
  int id_of(const std::string& token) const;

  static bool is_special_id(int id) { return id >= 0 && id < kReservedCount; }
  static const char* reserved_name(int id);
};

// Lowercased whitespace-and-punctuation word split. Punctuation characters
// become single-character tokens; non-ASCII bytes pass through untouched.
std::vector<std::string> word_tokenize(std::string_view text);

// Maps word tokens to ids; unknown words become [UNK]. Empty text gives an
// empty list.
std::vector<int> tokenize(std::string_view text, const Vocabulary& vocab);

// Builds a vocabulary from instance text (history and target), ordered by
// descending frequency with ties broken alphabetically.
Vocabulary build_vocabulary(const std::vector<const DialogueInstance*>& instances,
                            int min_count = 1);

// One token per line; the line number equals the id offset by the reserved
// block.
void save_vocabulary(const std::string& path, const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::string& path);

}  // namespace tandem
