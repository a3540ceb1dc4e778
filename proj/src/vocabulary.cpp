#include "tgqa/text/vocabulary.hpp"

#include <algorithm>

#include "tgqa/error.hpp"

namespace tgqa::text {

uint64_t fnv1a64(std::string_view s) {
  uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus, int max_words) {
  std::unordered_map<std::string, int64_t> counts;
  for (const auto& tok : corpus) {
    if (!tok.empty()) ++counts[tok];
  }
  std::vector<std::pair<std::string, int64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > static_cast<std::size_t>(max_words)) ranked.resize(max_words);

  Vocabulary vocab;
  vocab.words_.reserve(ranked.size());
  for (auto& [word, count] : ranked) {
    vocab.index_.emplace(word, kFirstKnownId + static_cast<int>(vocab.words_.size()));
    vocab.words_.push_back(std::move(word));
  }
  return vocab;
}

Vocabulary Vocabulary::from_arrays(const std::vector<std::string>& words,
                                   const std::vector<int>& ids) {
  if (words.size() != ids.size()) throw FormatError("vocabulary arrays differ in length");
  if (words.size() > static_cast<std::size_t>(kMaxKnownWords)) {
    throw FormatError("vocabulary has more than 5000 known words");
  }
  Vocabulary vocab;
  vocab.words_.resize(words.size());
  std::vector<bool> filled(words.size(), false);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const int slot = ids[i] - kFirstKnownId;
    if (slot < 0 || slot >= static_cast<int>(words.size()) || filled[slot]) {
      throw FormatError("vocabulary id " + std::to_string(ids[i]) + " is not dense");
    }
    filled[slot] = true;
    vocab.words_[slot] = words[i];
    if (!vocab.index_.emplace(words[i], ids[i]).second) {
      throw FormatError("duplicate vocabulary word '" + words[i] + "'");
    }
  }
  return vocab;
}

int Vocabulary::id(std::string_view token) const {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  return oov_bucket(token);
}

bool Vocabulary::is_known(std::string_view token) const {
  return index_.contains(std::string(token));
}

std::vector<int> Vocabulary::ids() const {
  std::vector<int> out(words_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = kFirstKnownId + static_cast<int>(i);
  return out;
}

}  // namespace tgqa::text
