#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finetype/corpus.hpp"
#include "finetype/rng.hpp"
#include "finetype/tape.hpp"
#include "finetype/tensor.hpp"
#include "finetype/vocab.hpp"

namespace finetype {

// One direction's LSTM weights. Gate blocks share dimensions: W_* are
// [H x D_in], R_* are [H x H], b_* are [H].
struct LstmParams {
  Tensor W_i, W_f, W_o, W_g;
  Tensor R_i, R_f, R_o, R_g;
  Tensor b_i, b_f, b_o, b_g;

  std::size_t hidden() const { return b_i.size(); }
  std::size_t input_dim() const { return W_i.cols(); }

  // Glorot-uniform weights; zero biases except forget bias 1.
  static LstmParams init(std::size_t hidden, std::size_t input_dim, Rng& rng);

  // Checkpoint naming order: W_i W_f W_o W_g R_i R_f R_o R_g b_i b_f b_o b_g.
  std::vector<std::pair<std::string, Tensor*>> named(const std::string& prefix);
};

// All encoder-side tensors. Enumeration order (and the derived checkpoint
// names) is fixed: char_embed, word_embed, mention_lstm.*, left_lstm.fwd.*,
// left_lstm.bwd.*, right_lstm.fwd.*, right_lstm.bwd.*.
struct EncoderParams {
  Tensor char_embed;  // [|CharVocab| x D_char]
  Tensor word_embed;  // [|TokenVocab| x D_word]
  LstmParams mention_lstm;              // D_char -> D_m
  LstmParams left_fwd, left_bwd;        // D_word -> H_word
  LstmParams right_fwd, right_bwd;

  std::size_t d_m() const { return mention_lstm.hidden(); }
  std::size_t h_word() const { return left_fwd.hidden(); }

  std::vector<std::pair<std::string, Tensor*>> named();
};

// Uniform on [-r, r], r = sqrt(6 / (fan_in + fan_out)), drawn row-major.
Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng);

// Overwrites rows of `table` for vocabulary tokens present in the embedding
// text file (one token per line followed by dim floats). Returns how many
// rows were replaced.
std::size_t load_pretrained_embeddings(const std::string& path, const TokenVocab& vocab,
                                       Tensor& table);

// Mention tokens joined by single spaces, mapped through the vocabulary.
std::vector<std::size_t> mention_char_sequence(const Sentence& s, const MentionRecord& m,
                                               const CharVocab& vc);

// left = tokens[0, end), right = tokens[start, len); both sides include the
// mention tokens.
std::pair<std::vector<std::string>, std::vector<std::string>> context_spans(
    const Sentence& s, const MentionRecord& m);

struct ContextIndices {
  std::vector<std::size_t> left, right;
};
ContextIndices context_token_indices(const Sentence& s, const MentionRecord& m,
                                     const TokenVocab& vt);

// Tape-bound mirrors of the parameter structs.
struct LstmVars {
  Var W_i, W_f, W_o, W_g, R_i, R_f, R_o, R_g, b_i, b_f, b_o, b_g;
  std::size_t hidden = 0;
};

struct EncoderVars {
  Var char_embed, word_embed;
  LstmVars mention, left_fwd, left_bwd, right_fwd, right_bwd;
};

LstmVars bind_lstm(Tape& t, const std::string& prefix, const LstmParams& p);
// freeze_word_embed binds the word table as a constant input instead of a
// parameter, keeping it out of the gradient map.
EncoderVars bind_encoder(Tape& t, const EncoderParams& p, bool freeze_word_embed = false);

struct LstmState {
  Var h, c;
};

LstmState lstm_cell(Tape& t, Var x, LstmState s, const LstmVars& p);

// Left-to-right fold from zero states; empty input yields the zero vector.
Var lstm_fold(Tape& t, std::span<const Var> xs, const LstmVars& p);

Var encode_mention(Tape& t, const EncoderVars& v, const std::vector<std::size_t>& chars);

// Concatenated final hidden states of the forward pass and the backward pass
// over the reversed sequence.
Var encode_context(Tape& t, Var word_embed, const std::vector<std::size_t>& tokens,
                   const LstmVars& fwd, const LstmVars& bwd);

enum class FeatureVariant { full, no_mention };

// Inverted-dropout masks for the three encoder outputs; entries are 0 or
// 1/(1-p). An empty tensor means no dropout on that block.
struct DropoutMasks {
  Tensor mention, left, right;

  static DropoutMasks draw(double p, std::size_t d_m, std::size_t h_word, Rng& rng);
};

Var feature_vector(Tape& t, const EncoderVars& v, const std::vector<std::size_t>& chars,
                   const ContextIndices& ctx, FeatureVariant variant,
                   const DropoutMasks* masks = nullptr);

std::size_t feature_dim(std::size_t d_m, std::size_t h_word, FeatureVariant variant);

}  // namespace finetype
