#include "textrl/paraphrase.hpp"

#include <fstream>
#include <stdexcept>

namespace textrl {

void ParaphraseMap::add(std::string original, std::string paraphrase) {
  if (index_.count(original)) {
    throw std::invalid_argument("paraphrase map: duplicate original '" +
                                original + "'");
  }
  index_.emplace(original, pairs_.size());
  pairs_.emplace_back(std::move(original), std::move(paraphrase));
}

const std::string& ParaphraseMap::apply(const std::string& text) const {
  auto it = index_.find(text);
  return it == index_.end() ? text : pairs_[it->second].second;
}

bool ParaphraseMap::covers(const std::string& text) const {
  return index_.count(text) != 0;
}

bool ParaphraseMap::identity_only() const {
  if (pairs_.empty()) return false;
  for (const auto& [orig, para] : pairs_) {
    if (orig != para) return false;
  }
  return true;
}

ParaphraseMap ParaphraseMap::load(std::istream& in) {
  ParaphraseMap map;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("paraphrase map line " + std::to_string(lineno) +
                               ": expected two tab-separated columns");
    }
    map.add(line.substr(0, tab), line.substr(tab + 1));
  }
  return map;
}

ParaphraseMap ParaphraseMap::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open paraphrase map '" + path + "'");
  }
  return load(in);
}

}  // namespace textrl
