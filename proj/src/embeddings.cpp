// SPDX-License-Identifier: Apache-2.0
#include "trialsense/embeddings.hpp"

#include "trialsense/error.hpp"
#include "trialsense/text_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>

namespace trialsense {
namespace {

bool parse_count(std::string_view token, std::string_view key, std::size_t& out) {
  if (token.substr(0, key.size()) != key) return false;
  const std::string_view digits = token.substr(key.size());
  if (digits.empty()) return false;
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || value <= 0) return false;
  out = static_cast<std::size_t>(value);
  return true;
}

EmbeddingHeader parse_header(std::string_view line) {
  std::vector<std::string_view> fields;
  for (std::string_view f : split(trim(line), ' ')) {
    if (!f.empty()) fields.push_back(f);
  }
  EmbeddingHeader h;
  if (fields.size() != 2 || !parse_count(fields[0], "dim=", h.dim) ||
      !parse_count(fields[1], "tokens=", h.tokens)) {
    throw MalformedEmbedding("header must read 'dim=<positive int> tokens=<positive int>', got '" +
                             std::string(trim(line)) + "'");
  }
  return h;
}

}  // namespace

EmbeddingMatrix parse_embeddings_text(std::string_view text) {
  std::optional<EmbeddingHeader> header;
  std::vector<double> values;  // row-major, grown as rows arrive
  std::size_t row = 0;
  std::size_t line_no = 0;

  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      header = parse_header(line);
      continue;
    }
    if (row >= header->tokens) {
      throw MalformedEmbedding("more rows than the declared tokens=" + std::to_string(header->tokens));
    }
    std::size_t col = 0;
    for (std::string_view cell : split(line, ' ')) {
      if (cell.empty()) continue;
      double v = 0.0;
      if (!parse_real(cell, v) || !std::isfinite(v)) {
        throw MalformedEmbedding("line " + std::to_string(line_no) + ": bad value '" +
                                 std::string(cell) + "'");
      }
      if (col >= header->dim) {
        throw MalformedEmbedding("line " + std::to_string(line_no) + ": more than dim=" +
                                 std::to_string(header->dim) + " values");
      }
      values.push_back(v);
      ++col;
    }
    if (col != header->dim) {
      throw MalformedEmbedding("line " + std::to_string(line_no) + ": " + std::to_string(col) +
                               " values, expected dim=" + std::to_string(header->dim));
    }
    ++row;
  }
  if (!header) throw MalformedEmbedding("missing header line");
  if (row != header->tokens) {
    throw MalformedEmbedding("header declares tokens=" + std::to_string(header->tokens) +
                             " but body has " + std::to_string(row) + " rows");
  }
  EmbeddingMatrix m;
  m.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(header->tokens), static_cast<Eigen::Index>(header->dim));
  return m;
}

EmbeddingMatrix parse_embeddings(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw MalformedEmbedding(e.what());
  }
  return parse_embeddings_text(text);
}

EmbeddingHeader check_embedding_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedEmbedding("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    return parse_header(view);
  }
  throw MalformedEmbedding("missing header line");
}

std::string serialize_embeddings(const EmbeddingMatrix& m) {
  std::string out = "dim=" + std::to_string(m.dim()) + " tokens=" + std::to_string(m.tokens()) + "\n";
  for (Eigen::Index r = 0; r < m.tokens(); ++r) {
    for (Eigen::Index c = 0; c < m.dim(); ++c) {
      if (c) out += ' ';
      out += format_real(m.values(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  write_file(path, serialize_embeddings(m));
}

FeatureSequence embeddings_to_features(const EmbeddingMatrix& m) {
  FeatureSequence seq;
  seq.modality = Modality::Text;
  seq.frames = m.values;
  seq.frame_rate = 0.0;
  return seq;
}

}  // namespace trialsense
