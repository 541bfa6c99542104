#include "tandem/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <stdexcept>

namespace tandem {

const char* Vocabulary::reserved_name(int id) {
  switch (id) {
    case kCls: return "[CLS]";
    case kSep: return "[SEP]";
    case kMask: return "[MASK]";
    case kPad: return "[PAD]";
    case kUnk: return "[UNK]";
    default: return nullptr;
  }
}

int Vocabulary::id_of(const std::string& token) const {
  auto it = token_to_id.find(token);
  return it == token_to_id.end() ? kUnk : it->second;
}

std::vector<std::string> word_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (unsigned char c : text) {
    if (c < 0x80 && std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
    } else if (c < 0x80) {
      current += static_cast<char>(std::tolower(c));
    } else {
      current += static_cast<char>(c);  // UTF-8 pass-through
    }
  }
  flush();
  return tokens;
}

std::vector<int> tokenize(std::string_view text, const Vocabulary& vocab) {
  std::vector<int> ids;
  for (const auto& word : word_tokenize(text)) {
    ids.push_back(vocab.id_of(word));
  }
  return ids;
}

namespace {

Vocabulary vocabulary_from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary vocab;
  vocab.id_to_token.reserve(tokens.size() + Vocabulary::kReservedCount);
  for (int i = 0; i < Vocabulary::kReservedCount; ++i) {
    vocab.id_to_token.emplace_back(Vocabulary::reserved_name(i));
    vocab.token_to_id[vocab.id_to_token.back()] = i;
  }
  for (const auto& token : tokens) {
    int id = static_cast<int>(vocab.id_to_token.size());
    auto [it, inserted] = vocab.token_to_id.emplace(token, id);
    if (!inserted) throw std::runtime_error("duplicate vocabulary token: " + token);
    vocab.id_to_token.push_back(token);
  }
  return vocab;
}

}  // namespace

Vocabulary build_vocabulary(const std::vector<const DialogueInstance*>& instances,
                            int min_count) {
  std::map<std::string, long> counts;
  auto add_text = [&](const std::string& text) {
    for (const auto& word : word_tokenize(text)) ++counts[word];
  };
  for (const auto* inst : instances) {
    for (const auto& turn : inst->history) add_text(turn.text);
    add_text(inst->target);
  }
  std::vector<std::pair<std::string, long>> entries(counts.begin(), counts.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> tokens;
  for (const auto& [token, count] : entries) {
    if (count >= min_count) tokens.push_back(token);
  }
  return vocabulary_from_tokens(tokens);
}

void save_vocabulary(const std::string& path, const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
  for (int id = Vocabulary::kReservedCount; id < vocab.size(); ++id) {
    out << vocab.id_to_token[id] << "\n";
  }
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return vocabulary_from_tokens(tokens);
}

}  // namespace tandem
