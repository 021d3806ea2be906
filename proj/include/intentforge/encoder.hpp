// include/intentforge/encoder.hpp

// Copyright 2026  The intentforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace intentforge {

inline constexpr std::size_t kDefaultFeatureDim = 2048;
inline constexpr std::size_t kDefaultHiddenDim = 256;
inline constexpr std::size_t kDefaultEmbedDim = 64;

/// FNV-1a, 64-bit.
std::uint64_t Fnv1a64(std::string_view bytes);

/// Lowercased word tokens; any ASCII character that is not a letter or digit
/// separates words. Non-ASCII bytes are kept inside words.
std::vector<std::string> WordTokens(std::string_view text);

/// Signed feature hashing of word unigrams and bigrams ("w1 w2").
///
/// Each n-gram hashes with FNV-1a; bucket = (h >> 1) % feature_dim and the
/// low bit of h picks the sign (1 -> -1). The bucket counts are L2-normalized;
/// text without tokens gives the zero vector. Requires feature_dim >= 64.
Eigen::VectorXd Featurize(std::string_view text, std::size_t feature_dim);

/// Stacks Featurize() rows, one per text.
Eigen::MatrixXd FeaturizeBatch(std::span<const std::string> texts,
                               std::size_t feature_dim);

// A named contiguous block of parameters, used by the optimizer, the
// checkpoint writer and the finite-difference checker.
struct ParamBlock {
  std::string name;
  std::span<double> values;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

struct ConstParamBlock {
  std::string name;
  std::span<const double> values;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
};

/// Two-layer projection head: e = normalize(W2 tanh(W1 f + b1) + b2).
struct EncoderParams {
  Eigen::MatrixXd w1;  // hidden x feature
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // embed x hidden
  Eigen::VectorXd b2;  // embed

  std::size_t feature_dim() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t embed_dim() const { return static_cast<std::size_t>(w2.rows()); }

  bool AllFinite() const;
  /// Zero-filled parameters with the same shapes.
  EncoderParams ZerosLike() const;

  std::vector<ParamBlock> Blocks();
  std::vector<ConstParamBlock> Blocks() const;

  bool operator==(const EncoderParams &other) const;
};

/// Glorot-uniform weights in (-s, s), s = sqrt(6 / (fan_in + fan_out)), drawn
/// from mt19937_64(seed); biases are zero.
EncoderParams InitParams(std::uint64_t seed, std::size_t feature_dim,
                         std::size_t hidden_dim, std::size_t embed_dim);

double GlorotLimit(std::size_t fan_in, std::size_t fan_out);

/// Row-major n x d matrix of unit-norm embeddings with their utterance ids.
struct EmbeddingMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd values;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
};

/// Normalizes each row to unit L2 norm in place. Rows whose norm is below
/// 1e-12 become the first basis vector.
void NormalizeRows(Eigen::MatrixXd &rows);

/// Intermediate activations kept for the backward pass.
struct HeadActivations {
  Eigen::MatrixXd features;  // n x feature
  Eigen::MatrixXd hidden;    // n x hidden, after tanh
  Eigen::MatrixXd pre_norm;  // n x embed
  Eigen::VectorXd norms;     // n
  Eigen::MatrixXd output;    // n x embed, unit rows
};

HeadActivations Forward(const EncoderParams &params,
                        const Eigen::MatrixXd &features);

/// Gradient of a scalar loss w.r.t. the head parameters, given the gradient
/// w.r.t. the unit-norm outputs (n x embed). Rows that hit the degenerate
/// zero-norm fallback contribute nothing.
EncoderParams Backward(const EncoderParams &params,
                       const HeadActivations &acts,
                       const Eigen::MatrixXd &grad_output);

/// Throws Error if any parameter is non-finite.
EmbeddingMatrix Embed(const EncoderParams &params,
                      std::span<const std::string> texts,
                      std::vector<std::string> ids = {});

/// Embedding exchange format: first line "#dim=<d>", then one
/// "<id>\t<v1> <v2> ... <vd>" line per row. Rows are renormalized on load.
EmbeddingMatrix LoadEmbeddings(const std::string &path);
EmbeddingMatrix ParseEmbeddings(std::istream &in);
void WriteEmbeddings(const EmbeddingMatrix &embeddings, std::ostream &out);

}  // namespace intentforge
