#include "finetype/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "finetype/errors.hpp"
#include "finetype/rng.hpp"

namespace finetype {

using nlohmann::json;

namespace {

[[noreturn]] void line_fail(std::size_t line, const std::string& what) {
  throw format_error("line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> string_array(const json& j, const char* field, std::size_t line) {
  if (!j.is_array()) line_fail(line, std::string("\"") + field + "\" must be an array of strings");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_string()) {
      line_fail(line, std::string("\"") + field + "\" must be an array of strings");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::size_t span_index(const json& j, const char* field, std::size_t line, std::size_t ordinal) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    line_fail(line, "mention " + std::to_string(ordinal) + ": \"" + field +
                        "\" must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

std::vector<std::string> close_labels(const std::vector<std::string>& labels) {
  std::set<std::string> closed;
  for (const std::string& l : labels) {
    std::string cur = l;
    while (!cur.empty()) {
      closed.insert(cur);
      cur = TypeHierarchy::parent_path(cur);
    }
  }
  return {closed.begin(), closed.end()};
}

// Chain test on an ancestor-closed set: everything must sit on the path to
// one deepest member. Vacuously true for the empty set.
bool chain_under_ancestry(const std::vector<std::string>& labels) {
  if (labels.empty()) return true;
  const std::string* deepest = &labels[0];
  for (const std::string& l : labels) {
    if (TypeHierarchy::path_depth(l) > TypeHierarchy::path_depth(*deepest)) deepest = &l;
  }
  return std::all_of(labels.begin(), labels.end(), [&](const std::string& l) {
    return TypeHierarchy::is_ancestor_or_equal(l, *deepest);
  });
}

Corpus assemble(std::vector<Sentence> sentences, std::vector<MentionRecord> mentions,
                const std::vector<std::vector<std::string>>& raw_labels) {
  std::vector<std::string> all;
  for (const auto& ls : raw_labels) all.insert(all.end(), ls.begin(), ls.end());
  Corpus c;
  c.sentences = std::move(sentences);
  c.hierarchy = TypeHierarchy::from_labels(all);
  c.mentions = std::move(mentions);
  for (std::size_t i = 0; i < c.mentions.size(); ++i) {
    MentionRecord& m = c.mentions[i];
    m.labels = close_labels(raw_labels[i]);
    m.label_vector.assign(c.hierarchy.k(), 0);
    for (const std::string& l : m.labels) m.label_vector[c.hierarchy.index_of(l)] = 1;
    m.is_clean = chain_under_ancestry(m.labels);
  }
  return c;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
  std::vector<Sentence> sentences;
  std::vector<MentionRecord> mentions;
  std::vector<std::vector<std::string>> raw_labels;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      line_fail(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) line_fail(lineno, "expected a JSON object");
    if (!j.contains("tokens")) line_fail(lineno, "missing \"tokens\"");
    if (!j.contains("mentions")) line_fail(lineno, "missing \"mentions\"");

    Sentence s;
    s.tokens = string_array(j["tokens"], "tokens", lineno);
    if (s.tokens.empty()) line_fail(lineno, "empty token list");
    if (j.contains("pos")) {
      s.pos_tags = string_array(j["pos"], "pos", lineno);
      if (s.pos_tags.size() != s.tokens.size()) {
        line_fail(lineno, "\"pos\" length " + std::to_string(s.pos_tags.size()) +
                              " does not match " + std::to_string(s.tokens.size()) + " tokens");
      }
    }
    const std::size_t sentence_index = sentences.size();
    sentences.push_back(std::move(s));

    const json& ms = j["mentions"];
    if (!ms.is_array()) line_fail(lineno, "\"mentions\" must be an array");
    std::size_t ordinal = 0;
    for (const auto& mj : ms) {
      if (!mj.is_object() || !mj.contains("start") || !mj.contains("end") ||
          !mj.contains("labels")) {
        line_fail(lineno, "mention " + std::to_string(ordinal) +
                              ": expected {\"start\", \"end\", \"labels\"}");
      }
      MentionRecord m;
      m.sentence = sentence_index;
      m.start = span_index(mj["start"], "start", lineno, ordinal);
      m.end = span_index(mj["end"], "end", lineno, ordinal);
      const std::size_t len = sentences[sentence_index].tokens.size();
      if (m.start > m.end || m.end > len) {
        line_fail(lineno, "mention " + std::to_string(ordinal) + ": span (" +
                              std::to_string(m.start) + "," + std::to_string(m.end) +
                              ") out of range for sentence of length " + std::to_string(len));
      }
      std::vector<std::string> labels = string_array(mj["labels"], "labels", lineno);
      for (const std::string& l : labels) {
        try {
          TypeHierarchy::validate_path(l);
        } catch (const format_error& e) {
          line_fail(lineno, "mention " + std::to_string(ordinal) + ": " + e.what());
        }
      }
      m.line = lineno;
      m.ordinal = ordinal++;
      mentions.push_back(std::move(m));
      raw_labels.push_back(std::move(labels));
    }
  }
  return assemble(std::move(sentences), std::move(mentions), raw_labels);
}

Corpus load_corpus(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open corpus file '" + path + "'");
  return parse_corpus(f);
}

void serialize_corpus(const Corpus& c, std::ostream& out) {
  for (std::size_t si = 0; si < c.sentences.size(); ++si) {
    const Sentence& s = c.sentences[si];
    json j;
    j["tokens"] = s.tokens;
    if (s.has_pos()) j["pos"] = s.pos_tags;
    json ms = json::array();
    for (const MentionRecord& m : c.mentions) {
      if (m.sentence != si) continue;
      json mj;
      mj["start"] = m.start;
      mj["end"] = m.end;
      mj["labels"] = m.labels;
      ms.push_back(std::move(mj));
    }
    j["mentions"] = std::move(ms);
    out << j.dump() << '\n';
  }
}

void save_corpus(const Corpus& c, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw io_error("cannot open '" + path + "' for writing");
  serialize_corpus(c, f);
}

std::vector<std::string> normalize_labels(const std::vector<std::string>& labels,
                                          const TypeHierarchy& h) {
  for (const std::string& l : labels) {
    if (!h.contains(l)) throw std::invalid_argument("unknown label '" + l + "'");
  }
  return close_labels(labels);
}

bool is_clean(const std::vector<std::string>& labels, const TypeHierarchy& h) {
  if (labels.empty()) throw std::invalid_argument("is_clean: empty label set");
  for (const std::string& l : labels) {
    if (!h.contains(l)) throw std::invalid_argument("unknown label '" + l + "'");
  }
  return chain_under_ancestry(labels);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> partition(const Corpus& c) {
  std::vector<std::size_t> clean, noisy;
  for (std::size_t i = 0; i < c.mentions.size(); ++i) {
    (c.mentions[i].is_clean ? clean : noisy).push_back(i);
  }
  return {std::move(clean), std::move(noisy)};
}

Corpus filter_invalid(const Corpus& c, FilterReport* report) {
  FilterReport r;
  Corpus out;
  out.sentences = c.sentences;
  out.hierarchy = c.hierarchy;
  for (const MentionRecord& m : c.mentions) {
    if (m.labels.empty()) {
      ++r.removed_unlabeled;
    } else if (m.start == m.end) {
      ++r.removed_empty_span;
    } else {
      out.mentions.push_back(m);
    }
  }
  if (report) *report = r;
  return out;
}

std::pair<Corpus, Corpus> dev_split(const Corpus& test, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("dev fraction must lie in (0, 1)");
  }
  const std::size_t n = test.mentions.size();
  const auto dev_count = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::uint8_t> in_dev(n, 0);
  for (std::size_t i = 0; i < dev_count; ++i) in_dev[order[i]] = 1;

  Corpus dev, eval;
  dev.sentences = eval.sentences = test.sentences;
  dev.hierarchy = eval.hierarchy = test.hierarchy;
  for (std::size_t i = 0; i < n; ++i) {
    (in_dev[i] ? dev : eval).mentions.push_back(test.mentions[i]);
  }
  return {std::move(dev), std::move(eval)};
}

const std::set<std::string> kPronounTags = {"PRP", "PRP$", "WP", "WP$"};

namespace {

bool all_pronominal(const Corpus& c, const MentionRecord& m,
                    const std::set<std::string>& tags) {
  const Sentence& s = c.sentences[m.sentence];
  if (m.start == m.end) return false;
  for (std::size_t i = m.start; i < m.end; ++i) {
    if (!tags.count(s.pos_tags[i])) return false;
  }
  return true;
}

}  // namespace

Corpus pronominal_filter(const Corpus& c, const std::set<std::string>& pronoun_tags) {
  for (const MentionRecord& m : c.mentions) {
    if (!c.sentences[m.sentence].has_pos()) {
      throw format_error(
          "pronominal filtering needs POS tags; supply \"pos\" for every sentence with mentions");
    }
  }
  Corpus out;
  out.sentences = c.sentences;
  out.hierarchy = c.hierarchy;
  for (const MentionRecord& m : c.mentions) {
    if (!all_pronominal(c, m, pronoun_tags)) out.mentions.push_back(m);
  }
  return out;
}

CorpusStats corpus_stats(const Corpus& c) {
  CorpusStats st;
  st.types = c.hierarchy.k();
  st.mentions = c.mentions.size();
  st.max_depth = c.hierarchy.max_depth();
  for (const MentionRecord& m : c.mentions) {
    if (m.is_clean) ++st.clean_mentions;
  }
  st.has_pos = !c.mentions.empty();
  for (const MentionRecord& m : c.mentions) {
    if (!c.sentences[m.sentence].has_pos()) {
      st.has_pos = false;
      break;
    }
  }
  if (st.has_pos) {
    for (const MentionRecord& m : c.mentions) {
      if (all_pronominal(c, m, kPronounTags)) ++st.pronominal_mentions;
    }
  }
  if (st.mentions > 0) {
    st.clean_pct = 100.0 * static_cast<double>(st.clean_mentions) / static_cast<double>(st.mentions);
    st.pronominal_pct =
        100.0 * static_cast<double>(st.pronominal_mentions) / static_cast<double>(st.mentions);
  }
  return st;
}

}  // namespace finetype
