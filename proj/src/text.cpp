#include "textrl/text.hpp"

#include <cctype>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace textrl {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isalnum(uc) || uc >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, VocabSide side)
    : side_(side), tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("vocabulary: duplicate token '" + tokens_[i] +
                                  "'");
    }
  }
}

Vocabulary Vocabulary::build(std::span<const std::string> corpus,
                             VocabSide side) {
  if (corpus.empty()) {
    throw std::invalid_argument("vocabulary: empty corpus");
  }
  Vocabulary v;
  v.side_ = side;
  for (const auto& text : corpus) {
    for (auto& tok : tokenize(text)) {
      if (v.index_.emplace(tok, static_cast<int>(v.tokens_.size())).second) {
        v.tokens_.push_back(std::move(tok));
      }
    }
  }
  return v;
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::dump(std::ostream& out) const {
  for (const auto& tok : tokens_) out << tok << '\n';
}

Vocabulary Vocabulary::load(std::istream& in, VocabSide side) {
  Vocabulary v;
  v.side_ = side;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!v.index_.emplace(line, static_cast<int>(v.tokens_.size())).second) {
      throw std::runtime_error("vocabulary: duplicate token '" + line + "'");
    }
    v.tokens_.push_back(line);
  }
  return v;
}

Vectorized vectorize(std::string_view text, const Vocabulary& vocab,
                     bool binary) {
  Vectorized out;
  out.bow.dim = vocab.size();
  std::map<int, int> counts;
  for (const auto& tok : tokenize(text)) {
    ++out.total;
    if (auto idx = vocab.find(tok)) {
      ++counts[*idx];
    } else {
      ++out.dropped;
    }
  }
  out.bow.entries.reserve(counts.size());
  for (const auto& [idx, n] : counts) {
    out.bow.entries.emplace_back(idx, binary ? 1 : n);
  }
  return out;
}

double oov_rate(std::span<const std::string> texts, const Vocabulary& vocab) {
  long long total = 0;
  long long oov = 0;
  for (const auto& text : texts) {
    for (const auto& tok : tokenize(text)) {
      ++total;
      if (!vocab.find(tok)) ++oov;
    }
  }
  if (total == 0) {
    throw std::invalid_argument("oov_rate: no tokens");
  }
  return static_cast<double>(oov) / static_cast<double>(total);
}

}  // namespace textrl
