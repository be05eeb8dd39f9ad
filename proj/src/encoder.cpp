#include "finetype/encoder.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "finetype/errors.hpp"
#include "finetype/text.hpp"

namespace finetype {

Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t = Tensor::zeros({rows, cols});
  for (double& v : t.data) v = rng.uniform(-r, r);
  return t;
}

LstmParams LstmParams::init(std::size_t hidden, std::size_t input_dim, Rng& rng) {
  LstmParams p;
  p.W_i = glorot(hidden, input_dim, rng);
  p.W_f = glorot(hidden, input_dim, rng);
  p.W_o = glorot(hidden, input_dim, rng);
  p.W_g = glorot(hidden, input_dim, rng);
  p.R_i = glorot(hidden, hidden, rng);
  p.R_f = glorot(hidden, hidden, rng);
  p.R_o = glorot(hidden, hidden, rng);
  p.R_g = glorot(hidden, hidden, rng);
  p.b_i = Tensor::zeros({hidden});
  p.b_f = Tensor::full({hidden}, 1.0);
  p.b_o = Tensor::zeros({hidden});
  p.b_g = Tensor::zeros({hidden});
  return p;
}

std::vector<std::pair<std::string, Tensor*>> LstmParams::named(const std::string& prefix) {
  return {
      {prefix + ".W_i", &W_i}, {prefix + ".W_f", &W_f}, {prefix + ".W_o", &W_o},
      {prefix + ".W_g", &W_g}, {prefix + ".R_i", &R_i}, {prefix + ".R_f", &R_f},
      {prefix + ".R_o", &R_o}, {prefix + ".R_g", &R_g}, {prefix + ".b_i", &b_i},
      {prefix + ".b_f", &b_f}, {prefix + ".b_o", &b_o}, {prefix + ".b_g", &b_g},
  };
}

std::vector<std::pair<std::string, Tensor*>> EncoderParams::named() {
  std::vector<std::pair<std::string, Tensor*>> out;
  out.emplace_back("char_embed", &char_embed);
  out.emplace_back("word_embed", &word_embed);
  for (auto& [prefix, lstm] : std::initializer_list<std::pair<const char*, LstmParams*>>{
           {"mention_lstm", &mention_lstm},
           {"left_lstm.fwd", &left_fwd},
           {"left_lstm.bwd", &left_bwd},
           {"right_lstm.fwd", &right_fwd},
           {"right_lstm.bwd", &right_bwd}}) {
    for (auto& entry : lstm->named(prefix)) out.push_back(entry);
  }
  return out;
}

std::size_t load_pretrained_embeddings(const std::string& path, const TokenVocab& vocab,
                                       Tensor& table) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open embedding file '" + path + "'");
  const std::size_t dim = table.cols();
  std::string line;
  std::size_t lineno = 0;
  std::size_t replaced = 0;
  std::vector<std::uint8_t> done(vocab.size(), 0);
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string token;
    row >> token;
    const std::size_t idx = vocab.index_of(token);
    if (idx == TokenVocab::kUnknown || done[idx]) {
      continue;  // out-of-vocabulary line, or a repeat (first occurrence wins)
    }
    for (std::size_t j = 0; j < dim; ++j) {
      double v;
      if (!(row >> v)) {
        throw format_error("embedding file line " + std::to_string(lineno) + ": expected " +
                           std::to_string(dim) + " values for token '" + token + "'");
      }
      table.at(idx, j) = v;
    }
    double extra;
    if (row >> extra) {
      throw format_error("embedding file line " + std::to_string(lineno) + ": expected " +
                         std::to_string(dim) + " values for token '" + token + "'");
    }
    done[idx] = 1;
    ++replaced;
  }
  return replaced;
}

std::vector<std::size_t> mention_char_sequence(const Sentence& s, const MentionRecord& m,
                                               const CharVocab& vc) {
  if (m.start >= m.end) {
    throw std::invalid_argument("mention_char_sequence: empty mention span");
  }
  std::vector<std::size_t> out;
  for (std::size_t i = m.start; i < m.end; ++i) {
    if (i > m.start) out.push_back(vc.index_of(U' '));
    for (std::uint32_t cp : utf8_decode(s.tokens[i])) out.push_back(vc.index_of(cp));
  }
  return out;
}

std::pair<std::vector<std::string>, std::vector<std::string>> context_spans(
    const Sentence& s, const MentionRecord& m) {
  std::vector<std::string> left(s.tokens.begin(),
                                s.tokens.begin() + static_cast<std::ptrdiff_t>(m.end));
  std::vector<std::string> right(s.tokens.begin() + static_cast<std::ptrdiff_t>(m.start),
                                 s.tokens.end());
  return {std::move(left), std::move(right)};
}

ContextIndices context_token_indices(const Sentence& s, const MentionRecord& m,
                                     const TokenVocab& vt) {
  auto [left, right] = context_spans(s, m);
  ContextIndices out;
  out.left.reserve(left.size());
  out.right.reserve(right.size());
  for (const std::string& tok : left) out.left.push_back(vt.index_of(tok));
  for (const std::string& tok : right) out.right.push_back(vt.index_of(tok));
  return out;
}

LstmVars bind_lstm(Tape& t, const std::string& prefix, const LstmParams& p) {
  LstmVars v;
  v.W_i = t.param(prefix + ".W_i", p.W_i);
  v.W_f = t.param(prefix + ".W_f", p.W_f);
  v.W_o = t.param(prefix + ".W_o", p.W_o);
  v.W_g = t.param(prefix + ".W_g", p.W_g);
  v.R_i = t.param(prefix + ".R_i", p.R_i);
  v.R_f = t.param(prefix + ".R_f", p.R_f);
  v.R_o = t.param(prefix + ".R_o", p.R_o);
  v.R_g = t.param(prefix + ".R_g", p.R_g);
  v.b_i = t.param(prefix + ".b_i", p.b_i);
  v.b_f = t.param(prefix + ".b_f", p.b_f);
  v.b_o = t.param(prefix + ".b_o", p.b_o);
  v.b_g = t.param(prefix + ".b_g", p.b_g);
  v.hidden = p.hidden();
  return v;
}

EncoderVars bind_encoder(Tape& t, const EncoderParams& p, bool freeze_word_embed) {
  EncoderVars v;
  v.char_embed = t.param("char_embed", p.char_embed);
  v.word_embed =
      freeze_word_embed ? t.input(p.word_embed) : t.param("word_embed", p.word_embed);
  v.mention = bind_lstm(t, "mention_lstm", p.mention_lstm);
  v.left_fwd = bind_lstm(t, "left_lstm.fwd", p.left_fwd);
  v.left_bwd = bind_lstm(t, "left_lstm.bwd", p.left_bwd);
  v.right_fwd = bind_lstm(t, "right_lstm.fwd", p.right_fwd);
  v.right_bwd = bind_lstm(t, "right_lstm.bwd", p.right_bwd);
  return v;
}

LstmState lstm_cell(Tape& t, Var x, LstmState s, const LstmVars& p) {
  auto gate = [&](Var W, Var R, Var b) {
    return t.add(t.add(t.matvec(W, x), t.matvec(R, s.h)), b);
  };
  Var i = t.sigmoid(gate(p.W_i, p.R_i, p.b_i));
  Var f = t.sigmoid(gate(p.W_f, p.R_f, p.b_f));
  Var o = t.sigmoid(gate(p.W_o, p.R_o, p.b_o));
  Var g = t.tanh(gate(p.W_g, p.R_g, p.b_g));
  Var c = t.add(t.mul(f, s.c), t.mul(i, g));
  Var h = t.mul(o, t.tanh(c));
  return {h, c};
}

Var lstm_fold(Tape& t, std::span<const Var> xs, const LstmVars& p) {
  LstmState s{t.input(Tensor::zeros({p.hidden})), t.input(Tensor::zeros({p.hidden}))};
  for (Var x : xs) s = lstm_cell(t, x, s, p);
  return s.h;
}

namespace {

std::vector<Var> embed_rows(Tape& t, Var table, const std::vector<std::size_t>& indices) {
  std::vector<Var> out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) out.push_back(t.row(table, idx));
  return out;
}

}  // namespace

Var encode_mention(Tape& t, const EncoderVars& v, const std::vector<std::size_t>& chars) {
  if (chars.empty()) throw std::invalid_argument("encode_mention: empty character sequence");
  std::vector<Var> xs = embed_rows(t, v.char_embed, chars);
  return lstm_fold(t, xs, v.mention);
}

Var encode_context(Tape& t, Var word_embed, const std::vector<std::size_t>& tokens,
                   const LstmVars& fwd, const LstmVars& bwd) {
  if (tokens.empty()) throw std::invalid_argument("encode_context: empty token sequence");
  std::vector<Var> xs = embed_rows(t, word_embed, tokens);
  Var forward = lstm_fold(t, xs, fwd);
  std::vector<Var> rev(xs.rbegin(), xs.rend());
  Var backward = lstm_fold(t, rev, bwd);
  return t.concat(forward, backward);
}

DropoutMasks DropoutMasks::draw(double p, std::size_t d_m, std::size_t h_word, Rng& rng) {
  DropoutMasks masks;
  if (p <= 0.0) return masks;
  const double keep_scale = 1.0 / (1.0 - p);
  auto draw_one = [&](std::size_t n) {
    Tensor m = Tensor::zeros({n});
    for (double& v : m.data) v = rng.bernoulli(p) ? 0.0 : keep_scale;
    return m;
  };
  masks.mention = draw_one(d_m);
  masks.left = draw_one(2 * h_word);
  masks.right = draw_one(2 * h_word);
  return masks;
}

std::size_t feature_dim(std::size_t d_m, std::size_t h_word, FeatureVariant variant) {
  const std::size_t context = 4 * h_word;
  return variant == FeatureVariant::full ? d_m + context : context;
}

Var feature_vector(Tape& t, const EncoderVars& v, const std::vector<std::size_t>& chars,
                   const ContextIndices& ctx, FeatureVariant variant,
                   const DropoutMasks* masks) {
  auto masked = [&](Var x, const Tensor& mask) {
    return (masks && mask.size() > 0) ? t.mul(x, t.input(mask)) : x;
  };
  Var f_lc = masked(encode_context(t, v.word_embed, ctx.left, v.left_fwd, v.left_bwd),
                    masks ? masks->left : Tensor{});
  Var f_rc = masked(encode_context(t, v.word_embed, ctx.right, v.right_fwd, v.right_bwd),
                    masks ? masks->right : Tensor{});
  if (variant == FeatureVariant::no_mention) {
    return t.concat(f_lc, f_rc);
  }
  Var f_m = masked(encode_mention(t, v, chars), masks ? masks->mention : Tensor{});
  return t.concat(f_m, f_lc, f_rc);
}

}  // namespace finetype
