#include "finetype/vocab.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "finetype/text.hpp"

namespace finetype {

CharVocab CharVocab::build(const Corpus& c) {
  std::set<std::uint32_t> seen;
  seen.insert(U' ');  // mention tokens are joined with spaces
  for (const Sentence& s : c.sentences) {
    for (const std::string& tok : s.tokens) {
      for (std::uint32_t cp : utf8_decode(tok)) seen.insert(cp);
    }
  }
  return from_entries({seen.begin(), seen.end()});
}

CharVocab CharVocab::from_entries(std::vector<std::uint32_t> entries) {
  CharVocab v;
  v.entries_ = std::move(entries);
  for (std::size_t i = 0; i < v.entries_.size(); ++i) {
    if (!v.index_.emplace(v.entries_[i], i + 1).second) {
      throw std::invalid_argument("duplicate character vocabulary entry");
    }
  }
  return v;
}

std::size_t CharVocab::index_of(std::uint32_t cp) const {
  auto it = index_.find(cp);
  return it == index_.end() ? kUnknown : it->second;
}

TokenVocab TokenVocab::build(const Corpus& c, bool lowercase) {
  std::set<std::string> seen;
  for (const Sentence& s : c.sentences) {
    for (const std::string& tok : s.tokens) {
      seen.insert(lowercase ? ascii_lower(tok) : tok);
    }
  }
  return from_entries({seen.begin(), seen.end()}, lowercase);
}

TokenVocab TokenVocab::from_entries(std::vector<std::string> entries, bool lowercase) {
  TokenVocab v;
  v.entries_ = std::move(entries);
  v.lowercase_ = lowercase;
  for (std::size_t i = 0; i < v.entries_.size(); ++i) {
    if (!v.index_.emplace(v.entries_[i], i + 1).second) {
      throw std::invalid_argument("duplicate token vocabulary entry '" + v.entries_[i] + "'");
    }
  }
  return v;
}

std::size_t TokenVocab::index_of(const std::string& token) const {
  auto it = index_.find(lowercase_ ? ascii_lower(token) : token);
  return it == index_.end() ? kUnknown : it->second;
}

}  // namespace finetype
