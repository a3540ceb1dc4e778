#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tgqa::text {

inline constexpr int kPadId = 0;
inline constexpr int kEosId = 1;
inline constexpr int kSepId = 2;
inline constexpr int kQuestionNodeId = 3;
inline constexpr int kFirstKnownId = 4;
inline constexpr int kMaxKnownWords = 5000;
inline constexpr int kFirstOovId = kFirstKnownId + kMaxKnownWords;  // 5004
inline constexpr int kOovBuckets = 2000;
inline constexpr int kVocabularySize = kFirstOovId + kOovBuckets;  // 7004

/// 64-bit FNV-1a over the raw bytes of `s`.
uint64_t fnv1a64(std::string_view s);

/// Word ids for the most frequent training word types; everything else hashes
/// into a fixed range of OOV buckets so that lookup is total.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Ranks by descending count, ties broken lexicographically.
  static Vocabulary build(const std::vector<std::string>& corpus, int max_words = kMaxKnownWords);
  /// Rebuilds from persisted aligned arrays; ids must lie in the known range.
  static Vocabulary from_arrays(const std::vector<std::string>& words, const std::vector<int>& ids);

  int id(std::string_view token) const;
  bool is_known(std::string_view token) const;
  std::size_t known_size() const { return words_.size(); }

  /// Known words in id order; `ids()[i]` is the id of `words()[i]`.
  const std::vector<std::string>& words() const { return words_; }
  std::vector<int> ids() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

inline int oov_bucket(std::string_view token) {
  return kFirstOovId + static_cast<int>(fnv1a64(token) % kOovBuckets);
}

}  // namespace tgqa::text
