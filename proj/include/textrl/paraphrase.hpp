#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace textrl {

// Original -> paraphrased action text. Applied to presented action texts at
// observation time; texts without an entry pass through unchanged.
class ParaphraseMap {
 public:
  ParaphraseMap() = default;

  // Throws std::invalid_argument when the original is already mapped.
  void add(std::string original, std::string paraphrase);

  const std::string& apply(const std::string& text) const;
  bool covers(const std::string& text) const;
  std::size_t size() const { return pairs_.size(); }
  bool identity_only() const;

  const std::vector<std::pair<std::string, std::string>>& pairs() const {
    return pairs_;
  }

  // Two tab-separated columns per line: original <TAB> paraphrase.
  // Blank lines and lines starting with '#' are skipped.
  static ParaphraseMap load(std::istream& in);
  static ParaphraseMap load_file(const std::string& path);

 private:
  std::vector<std::pair<std::string, std::string>> pairs_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace textrl
