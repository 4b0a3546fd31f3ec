#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace textrl {

// Lowercased word tokens; punctuation acts as a separator and is discarded.
std::vector<std::string> tokenize(std::string_view text);

enum class VocabSide { state, action };

// Sparse bag-of-words counts over a fixed vocabulary.
// Entries are (index, count) with count >= 1, strictly ascending by index.
struct BowVector {
  int dim = 0;
  std::vector<std::pair<int, int>> entries;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> tokens, VocabSide side);

  // Distinct tokens of the corpus in first-occurrence order.
  // Throws std::invalid_argument on an empty corpus.
  static Vocabulary build(std::span<const std::string> corpus, VocabSide side);

  int size() const { return static_cast<int>(tokens_.size()); }
  VocabSide side() const { return side_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::optional<int> find(std::string_view token) const;

  // One token per line; the line number is the index.
  void dump(std::ostream& out) const;
  static Vocabulary load(std::istream& in, VocabSide side);

 private:
  VocabSide side_ = VocabSide::state;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

struct Vectorized {
  BowVector bow;
  int dropped = 0;  // out-of-vocabulary token occurrences
  int total = 0;    // token count of the input text
};

// Counts of in-vocabulary tokens; OOV tokens are dropped (and counted).
// With binary=true each present token contributes 1 regardless of repeats.
Vectorized vectorize(std::string_view text, const Vocabulary& vocab,
                     bool binary = false);

// (OOV token occurrences) / (total token occurrences) across all texts.
// Throws std::invalid_argument when the texts contain no tokens at all.
double oov_rate(std::span<const std::string> texts, const Vocabulary& vocab);

}  // namespace textrl
