// src/encoder.cpp

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

#include "intentforge/encoder.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include "intentforge/error.hpp"
#include "intentforge/io_util.hpp"

namespace intentforge {

namespace {

constexpr double kMinNorm = 1e-12;

void AddHashed(std::string_view gram, Eigen::VectorXd &features) {
  const std::uint64_t h = Fnv1a64(gram);
  const auto bucket = static_cast<Eigen::Index>(
      (h >> 1) % static_cast<std::uint64_t>(features.size()));
  features[bucket] += (h & 1u) ? -1.0 : 1.0;
}

template <typename Matrix>
bool Finite(const Matrix &m) {
  return m.allFinite();
}

}  // namespace

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<std::string> WordTokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    const bool word_char = c >= 0x80 || (c >= '0' && c <= '9') ||
                           (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (word_char) {
      current.push_back(
          static_cast<char>((c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Eigen::VectorXd Featurize(std::string_view text, std::size_t feature_dim) {
  if (feature_dim < 64)
    throw Error("feature_dim must be at least 64, got " +
                std::to_string(feature_dim));
  Eigen::VectorXd features =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(feature_dim));
  const auto tokens = WordTokens(text);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    AddHashed(tokens[i], features);
    if (i + 1 < tokens.size()) AddHashed(tokens[i] + " " + tokens[i + 1], features);
  }
  const double norm = features.norm();
  if (norm > 0.0) features /= norm;
  return features;
}

Eigen::MatrixXd FeaturizeBatch(std::span<const std::string> texts,
                               std::size_t feature_dim) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()),
                      static_cast<Eigen::Index>(feature_dim));
  for (std::size_t i = 0; i < texts.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = Featurize(texts[i], feature_dim);
  return out;
}

bool EncoderParams::AllFinite() const {
  return Finite(w1) && Finite(b1) && Finite(w2) && Finite(b2);
}

EncoderParams EncoderParams::ZerosLike() const {
  return {Eigen::MatrixXd::Zero(w1.rows(), w1.cols()),
          Eigen::VectorXd::Zero(b1.size()),
          Eigen::MatrixXd::Zero(w2.rows(), w2.cols()),
          Eigen::VectorXd::Zero(b2.size())};
}

std::vector<ParamBlock> EncoderParams::Blocks() {
  auto block = [](const char *name, auto &m) {
    return ParamBlock{name,
                      std::span<double>(m.data(), static_cast<std::size_t>(m.size())),
                      m.rows(), m.cols()};
  };
  return {block("w1", w1), block("b1", b1), block("w2", w2), block("b2", b2)};
}

std::vector<ConstParamBlock> EncoderParams::Blocks() const {
  auto block = [](const char *name, const auto &m) {
    return ConstParamBlock{
        name, std::span<const double>(m.data(), static_cast<std::size_t>(m.size())),
        m.rows(), m.cols()};
  };
  return {block("w1", w1), block("b1", b1), block("w2", w2), block("b2", b2)};
}

bool EncoderParams::operator==(const EncoderParams &other) const {
  auto same = [](const auto &a, const auto &b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  return same(w1, other.w1) && same(b1, other.b1) && same(w2, other.w2) &&
         same(b2, other.b2);
}

double GlorotLimit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

EncoderParams InitParams(std::uint64_t seed, std::size_t feature_dim,
                         std::size_t hidden_dim, std::size_t embed_dim) {
  if (feature_dim == 0 || hidden_dim == 0 || embed_dim == 0)
    throw Error("encoder dimensions must be positive");
  std::mt19937_64 rng(seed);
  auto fill = [&rng](Eigen::MatrixXd &m, double limit) {
    std::uniform_real_distribution<double> dist(-limit, limit);
    // Row-major draw order so the layout does not depend on Eigen storage.
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
  };
  const auto f = static_cast<Eigen::Index>(feature_dim);
  const auto h = static_cast<Eigen::Index>(hidden_dim);
  const auto e = static_cast<Eigen::Index>(embed_dim);
  EncoderParams params{Eigen::MatrixXd(h, f), Eigen::VectorXd::Zero(h),
                       Eigen::MatrixXd(e, h), Eigen::VectorXd::Zero(e)};
  fill(params.w1, GlorotLimit(feature_dim, hidden_dim));
  fill(params.w2, GlorotLimit(hidden_dim, embed_dim));
  return params;
}

void NormalizeRows(Eigen::MatrixXd &rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    if (norm < kMinNorm) {
      rows.row(i).setZero();
      if (rows.cols() > 0) rows(i, 0) = 1.0;
    } else {
      rows.row(i) /= norm;
    }
  }
}

HeadActivations Forward(const EncoderParams &params,
                        const Eigen::MatrixXd &features) {
  HeadActivations acts;
  acts.features = features;
  acts.hidden = ((features * params.w1.transpose()).rowwise() +
                 params.b1.transpose())
                    .array()
                    .tanh()
                    .matrix();
  acts.pre_norm =
      (acts.hidden * params.w2.transpose()).rowwise() + params.b2.transpose();
  acts.norms = acts.pre_norm.rowwise().norm();
  acts.output = acts.pre_norm;
  NormalizeRows(acts.output);
  return acts;
}

EncoderParams Backward(const EncoderParams &params, const HeadActivations &acts,
                       const Eigen::MatrixXd &grad_output) {
  const Eigen::Index n = acts.output.rows();
  Eigen::MatrixXd grad_pre(n, acts.output.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (acts.norms[i] < kMinNorm) {
      grad_pre.row(i).setZero();
      continue;
    }
    const auto e = acts.output.row(i);
    const auto g = grad_output.row(i);
    grad_pre.row(i) = (g - e * g.dot(e)) / acts.norms[i];
  }
  EncoderParams grads;
  grads.w2 = grad_pre.transpose() * acts.hidden;
  grads.b2 = grad_pre.colwise().sum().transpose();
  Eigen::MatrixXd grad_hidden = grad_pre * params.w2;
  Eigen::MatrixXd grad_act =
      grad_hidden.array() * (1.0 - acts.hidden.array().square());
  grads.w1 = grad_act.transpose() * acts.features;
  grads.b1 = grad_act.colwise().sum().transpose();
  return grads;
}

EmbeddingMatrix Embed(const EncoderParams &params,
                      std::span<const std::string> texts,
                      std::vector<std::string> ids) {
  if (!params.AllFinite()) throw Error("encoder parameters contain NaN or Inf");
  if (!ids.empty() && ids.size() != texts.size())
    throw Error("embed: ids and texts differ in length");
  EmbeddingMatrix out;
  out.values = Forward(params, FeaturizeBatch(texts, params.feature_dim())).output;
  if (ids.empty()) {
    ids.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) ids.push_back(std::to_string(i));
  }
  out.ids = std::move(ids);
  return out;
}

EmbeddingMatrix ParseEmbeddings(std::istream &in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = Trim(line);
    if (trimmed.empty()) continue;
    if (dim == 0) {
      if (trimmed.rfind("#dim=", 0) != 0)
        throw ParseError("expected '#dim=<d>' header", line_no);
      const auto d = ParseDouble(trimmed.substr(5));
      if (!d || *d < 1 || *d != std::floor(*d))
        throw ParseError("invalid dimension in header", line_no);
      dim = static_cast<std::size_t>(*d);
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ParseError("expected '<id>\\t<values>'", line_no);
    std::vector<double> values;
    for (auto token : SplitWhitespace(std::string_view(line).substr(tab + 1))) {
      const auto v = ParseDouble(token);
      if (!v)
        throw ParseError("non-numeric value '" + std::string(token) + "'",
                         line_no);
      values.push_back(*v);
    }
    if (values.size() != dim)
      throw ParseError("row " + std::to_string(rows.size() + 1) + " has " +
                           std::to_string(values.size()) + " values, expected " +
                           std::to_string(dim),
                       line_no);
    ids.emplace_back(Trim(std::string_view(line).substr(0, tab)));
    rows.push_back(std::move(values));
  }
  if (dim == 0) throw ParseError("missing '#dim=<d>' header", 0);
  EmbeddingMatrix out;
  out.ids = std::move(ids);
  out.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < dim; ++j)
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  if (!out.values.allFinite()) throw ParseError("non-finite embedding value", 0);
  for (Eigen::Index i = 0; i < out.values.rows(); ++i)
    if (out.values.row(i).norm() < kMinNorm)
      throw ParseError("zero-norm embedding for '" +
                           out.ids[static_cast<std::size_t>(i)] + "'",
                       0);
  NormalizeRows(out.values);
  return out;
}

EmbeddingMatrix LoadEmbeddings(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file '" + path + "'");
  return ParseEmbeddings(in);
}

void WriteEmbeddings(const EmbeddingMatrix &embeddings, std::ostream &out) {
  out << "#dim=" << embeddings.dim() << '\n';
  for (std::size_t i = 0; i < embeddings.rows(); ++i) {
    out << embeddings.ids[i] << '\t';
    for (std::size_t j = 0; j < embeddings.dim(); ++j) {
      if (j) out << ' ';
      out << FormatDouble(embeddings.values(static_cast<Eigen::Index>(i),
                                            static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
}

}  // namespace intentforge
