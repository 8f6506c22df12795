// SPDX-License-Identifier: Apache-2.0
#include "trialsense/embeddings.hpp"
#include "trialsense/error.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace trialsense;

TEST_CASE("parses header, rows and comments") {
  const EmbeddingMatrix m = parse_embeddings_text(
      "# model=bert-base-uncased layer=12\n"
      "dim=3 tokens=2\n"
      "0.5 -1 2e-3\n"
      "# mid-file comment\n"
      "  4 5 6  \n");
  REQUIRE(m.tokens() == 2);
  REQUIRE(m.dim() == 3);
  CHECK(m.values(0, 0) == 0.5);
  CHECK(m.values(0, 2) == 2e-3);
  CHECK(m.values(1, 1) == 5.0);
}

TEST_CASE("malformed embedding files") {
  CHECK_THROWS_AS(parse_embeddings_text(""), MalformedEmbedding);
  CHECK_THROWS_AS(parse_embeddings_text("dim=0 tokens=1\n\n"), MalformedEmbedding);
  CHECK_THROWS_AS(parse_embeddings_text("dim=2 tokens=x\n1 2\n"), MalformedEmbedding);
  CHECK_THROWS_AS(parse_embeddings_text("dim=2 tokens=2\n1 2\n"), MalformedEmbedding);
  CHECK_THROWS_AS(parse_embeddings_text("dim=2 tokens=1\n1 2\n3 4\n"), MalformedEmbedding);
  CHECK_THROWS_AS(parse_embeddings_text("dim=2 tokens=1\n1 2 3\n"), MalformedEmbedding);
  CHECK_THROWS_AS(parse_embeddings_text("dim=2 tokens=1\n1\n"), MalformedEmbedding);
  CHECK_THROWS_AS(parse_embeddings_text("dim=2 tokens=1\n1 inf\n"), MalformedEmbedding);
  CHECK_THROWS_AS(parse_embeddings_text("dim=2 tokens=1\n1 abc\n"), MalformedEmbedding);
  CHECK_THROWS_AS(parse_embeddings_text("dim=2 tokens=99999999999\n1 2\n"), MalformedEmbedding);
}

TEST_CASE("round trip and header check") {
  testing::TempDir dir("emb");
  EmbeddingMatrix m;
  m.values = testing::random_matrix(5, 768, 3);
  write_embeddings(dir / "e.txt", m);
  const EmbeddingHeader h = check_embedding_header(dir / "e.txt");
  CHECK(h.dim == 768);
  CHECK(h.tokens == 5);
  const EmbeddingMatrix back = parse_embeddings(dir / "e.txt");
  CHECK((back.values - m.values).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_THROWS_AS(parse_embeddings(dir / "nope.txt"), MalformedEmbedding);
}

TEST_CASE("features are the token rows") {
  EmbeddingMatrix m;
  m.values = testing::random_matrix(4, 6, 1);
  const FeatureSequence f = embeddings_to_features(m);
  CHECK(f.modality == Modality::Text);
  CHECK(f.frames == m.values);
}
