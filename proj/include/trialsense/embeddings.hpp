// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trialsense/feature_sequence.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>

namespace trialsense {

inline constexpr std::size_t kCanonicalTextDim = 768;

/// Token-level contextual embeddings, one row per token.
struct EmbeddingMatrix {
  Eigen::MatrixXd values;  // tokens x dim

  Eigen::Index tokens() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

struct EmbeddingHeader {
  std::size_t dim = 0;
  std::size_t tokens = 0;
};

/// Embedding file: "dim=<int> tokens=<int>" then `tokens` lines of `dim`
/// space-separated reals. Lines starting with '#' are ignored anywhere.
/// Throws MalformedEmbedding.
EmbeddingMatrix parse_embeddings(const std::filesystem::path& path);
EmbeddingMatrix parse_embeddings_text(std::string_view text);

/// Reads only the header line. Throws MalformedEmbedding.
EmbeddingHeader check_embedding_header(const std::filesystem::path& path);

std::string serialize_embeddings(const EmbeddingMatrix& m);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m);

/// Pure relabeling: Text modality, frame_rate 0, values unchanged.
FeatureSequence embeddings_to_features(const EmbeddingMatrix& m);

}  // namespace trialsense
