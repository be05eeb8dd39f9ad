#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "finetype/corpus.hpp"

namespace finetype {

// Codepoint <-> dense index bijection. Index 0 is the trained unknown slot;
// stored entries occupy [1, size). Built sorted so a fixed corpus always
// yields the same layout.
class CharVocab {
 public:
  static constexpr std::size_t kUnknown = 0;

  CharVocab() = default;
  static CharVocab build(const Corpus& c);
  static CharVocab from_entries(std::vector<std::uint32_t> entries);

  std::size_t size() const { return entries_.size() + 1; }
  std::size_t index_of(std::uint32_t cp) const;
  const std::vector<std::uint32_t>& entries() const { return entries_; }

  bool operator==(const CharVocab& o) const { return entries_ == o.entries_; }

 private:
  std::vector<std::uint32_t> entries_;
  std::map<std::uint32_t, std::size_t> index_;
};

// Token <-> dense index bijection with the case rule fixed at build time.
class TokenVocab {
 public:
  static constexpr std::size_t kUnknown = 0;

  TokenVocab() = default;
  static TokenVocab build(const Corpus& c, bool lowercase);
  static TokenVocab from_entries(std::vector<std::string> entries, bool lowercase);

  std::size_t size() const { return entries_.size() + 1; }
  std::size_t index_of(const std::string& token) const;
  const std::vector<std::string>& entries() const { return entries_; }
  bool lowercase() const { return lowercase_; }

  bool operator==(const TokenVocab& o) const {
    return entries_ == o.entries_ && lowercase_ == o.lowercase_;
  }

 private:
  std::vector<std::string> entries_;
  std::map<std::string, std::size_t> index_;
  bool lowercase_ = false;
};

}  // namespace finetype
