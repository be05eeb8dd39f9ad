#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "finetype/hierarchy.hpp"

namespace finetype {

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<std::string> pos_tags;  // empty when the input carried none

  bool has_pos() const { return !pos_tags.empty(); }
  bool operator==(const Sentence&) const = default;
};

struct MentionRecord {
  std::size_t sentence = 0;  // index into Corpus::sentences
  std::size_t start = 0;     // inclusive token index
  std::size_t end = 0;       // exclusive
  std::vector<std::string> labels;         // ancestor-closed, sorted
  std::vector<std::uint8_t> label_vector;  // length K, 1 at each label index
  bool is_clean = false;

  // Input provenance for diagnostics ("line 3, mention 2").
  std::size_t line = 0;
  std::size_t ordinal = 0;

  bool operator==(const MentionRecord& o) const {
    return sentence == o.sentence && start == o.start && end == o.end && labels == o.labels &&
           label_vector == o.label_vector && is_clean == o.is_clean;
  }
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::vector<MentionRecord> mentions;
  TypeHierarchy hierarchy;

  bool operator==(const Corpus&) const = default;
};

// Reads JSON-lines: one object per line with "tokens" (string array),
// optional "pos" (string array, same length), and "mentions" (array of
// {"start", "end", "labels"}). Labels are ancestor-closed on load and the
// hierarchy is built from their union. Zero-length spans and empty label
// sets are kept; filter_invalid removes them.
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::string& path);

void serialize_corpus(const Corpus& c, std::ostream& out);
void save_corpus(const Corpus& c, const std::string& path);

// Closure under the ancestor relation; rejects labels outside the hierarchy.
std::vector<std::string> normalize_labels(const std::vector<std::string>& labels,
                                          const TypeHierarchy& h);

// True iff the ancestor-closed set lies on a single root-to-node path.
bool is_clean(const std::vector<std::string>& labels, const TypeHierarchy& h);

// Mention indices of (clean, noisy) mentions, each in corpus order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> partition(const Corpus& c);

struct FilterReport {
  std::size_t removed_unlabeled = 0;
  std::size_t removed_empty_span = 0;
};

Corpus filter_invalid(const Corpus& c, FilterReport* report = nullptr);

// Seeded mention-level split; |dev| = round(fraction * N). Both halves keep
// every sentence and the full hierarchy, and preserve mention order.
std::pair<Corpus, Corpus> dev_split(const Corpus& test, double fraction, std::uint64_t seed);

extern const std::set<std::string> kPronounTags;

// Drops mentions whose tokens all carry pronoun POS tags.
Corpus pronominal_filter(const Corpus& c, const std::set<std::string>& pronoun_tags = kPronounTags);

struct CorpusStats {
  std::size_t types = 0;
  std::size_t mentions = 0;
  std::size_t clean_mentions = 0;
  double clean_pct = 0.0;
  bool has_pos = false;
  std::size_t pronominal_mentions = 0;
  double pronominal_pct = 0.0;
  std::size_t max_depth = 0;
};

CorpusStats corpus_stats(const Corpus& c);

}  // namespace finetype
