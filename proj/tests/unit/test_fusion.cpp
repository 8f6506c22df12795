// SPDX-License-Identifier: Apache-2.0
#include "trialsense/error.hpp"
#include "trialsense/fusion.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <vector>

using namespace trialsense;

namespace {

FeatureSequence seq(Modality m, Eigen::MatrixXd frames) { return {m, std::move(frames), 10.0}; }

}  // namespace

TEST_CASE("combo parsing") {
  CHECK(ModalityCombo::parse("v,a,t").label() == "V+A+T");
  CHECK(ModalityCombo::parse("t, v").label() == "V+T");
  CHECK(ModalityCombo::parse("Audio,TEXT").token() == "a,t");
  CHECK(ModalityCombo::parse("t,a") == ModalityCombo::parse("a,t"));
  CHECK(ModalityCombo::parse("v,a").size() == 2);
  CHECK_THROWS_AS(ModalityCombo::parse("x"), ConfigError);
  CHECK_THROWS_AS(ModalityCombo::parse("v,v"), ConfigError);
  CHECK_THROWS_AS(ModalityCombo::parse(""), ConfigError);
  CHECK_THROWS_AS(ModalityCombo(std::span<const Modality>{}), ConfigError);
}

TEST_CASE("the seven combos in report order") {
  std::vector<std::string> labels;
  for (const auto& c : ModalityCombo::all()) labels.push_back(c.label());
  CHECK(labels == std::vector<std::string>{"V", "T", "A", "A+T", "V+T", "V+A", "V+A+T"});
}

TEST_CASE("resample to the same length is the identity") {
  const FeatureSequence s = seq(Modality::Audio, testing::random_matrix(17, 5, 1));
  CHECK(resample_sequence(s, 17).frames == s.frames);
}

TEST_CASE("resampling a linear ramp stays on the ramp") {
  Eigen::MatrixXd ramp(5, 2);
  for (int t = 0; t < 5; ++t) ramp.row(t) << 2.0 * t, 10.0 - t;
  const FeatureSequence r = resample_sequence(seq(Modality::Visual, ramp), 9);
  REQUIRE(r.length() == 9);
  for (int j = 0; j < 9; ++j) {
    CHECK(r.frames(j, 0) == doctest::Approx(static_cast<double>(j)));
    CHECK(r.frames(j, 1) == doctest::Approx(10.0 - 0.5 * j));
  }
  CHECK(r.frames(0, 0) == ramp(0, 0));
  CHECK(r.frames(8, 1) == ramp(4, 1));
}

TEST_CASE("resampling edge cases") {
  const Eigen::MatrixXd m = testing::random_matrix(6, 3, 2);
  const FeatureSequence mean = resample_sequence(seq(Modality::Text, m), 1);
  CHECK((mean.frames.row(0) - m.colwise().mean()).cwiseAbs().maxCoeff() < 1e-15);

  const FeatureSequence one = seq(Modality::Text, testing::random_matrix(1, 3, 3));
  const FeatureSequence rep = resample_sequence(one, 4);
  for (int j = 0; j < 4; ++j) CHECK(rep.frames.row(j) == one.frames.row(0));

  const FeatureSequence constant = seq(Modality::Audio, Eigen::MatrixXd::Constant(7, 2, 0.1));
  CHECK(resample_sequence(constant, 64).frames == Eigen::MatrixXd::Constant(64, 2, 0.1));

  CHECK_THROWS_AS(resample_sequence(constant, 0), ConfigError);
}

TEST_CASE("resampled values stay within the input range") {
  const Eigen::MatrixXd m = testing::random_matrix(13, 4, 7);
  const FeatureSequence r = resample_sequence(seq(Modality::Audio, m), 64);
  for (Eigen::Index c = 0; c < 4; ++c) {
    CHECK(r.frames.col(c).maxCoeff() <= m.col(c).maxCoeff());
    CHECK(r.frames.col(c).minCoeff() >= m.col(c).minCoeff());
  }
}

TEST_CASE("fusion concatenates column blocks in V, A, T order") {
  const FeatureSequence v = seq(Modality::Visual, testing::random_matrix(64, 4, 1));
  const FeatureSequence a = seq(Modality::Audio, testing::random_matrix(64, 3, 2));
  const FeatureSequence t = seq(Modality::Text, testing::random_matrix(64, 2, 3));
  const std::vector<FeatureSequence> shuffled{t, v, a};
  const FusedInput f = fuse(shuffled, ModalityCombo::parse("t,a,v"), 64, NormStats::identity());
  REQUIRE(f.frames.cols() == 9);
  CHECK(f.frames.leftCols(4) == v.frames);
  CHECK(f.frames.middleCols(4, 3) == a.frames);
  CHECK(f.frames.rightCols(2) == t.frames);

  const FusedInput only_a = fuse(shuffled, ModalityCombo::parse("a"), 64, NormStats::identity());
  CHECK(only_a.frames == a.frames);
}

TEST_CASE("fusion applies per-modality z-normalization") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 10.0, 3.0, 30.0;
  NormStats stats;
  stats.per_modality[Modality::Audio] = {Eigen::Vector2d(2.0, 20.0), Eigen::Vector2d(1.0, 10.0)};
  const std::vector<FeatureSequence> seqs{seq(Modality::Audio, m)};
  const FusedInput f = fuse(seqs, ModalityCombo{Modality::Audio}, 2, stats);
  CHECK(f.frames(0, 0) == doctest::Approx(-1.0 / (1.0 + 1e-8)));
  CHECK(f.frames(1, 1) == doctest::Approx(10.0 / (10.0 + 1e-8)));

  NormStats zero_std;
  zero_std.per_modality[Modality::Audio] = {Eigen::Vector2d(1.0, 10.0), Eigen::Vector2d::Zero()};
  const FusedInput z = fuse(seqs, ModalityCombo{Modality::Audio}, 2, zero_std);
  CHECK(z.frames.allFinite());
  CHECK(z.frames(0, 0) == 0.0);
}

TEST_CASE("fusion errors") {
  const FeatureSequence v = seq(Modality::Visual, testing::random_matrix(5, 4, 1));
  const std::vector<FeatureSequence> only_v{v};
  CHECK_THROWS_AS(fuse(only_v, ModalityCombo::parse("v,a"), 8, {}), MissingModality);
  const std::vector<FeatureSequence> twice{v, v};
  CHECK_THROWS_AS(fuse(twice, ModalityCombo::parse("v"), 8, {}), DuplicateModality);
  NormStats wrong;
  wrong.per_modality[Modality::Visual] = {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3)};
  CHECK_THROWS_AS(fuse(only_v, ModalityCombo::parse("v"), 8, wrong), ShapeMismatch);
  const std::vector<FeatureSequence> empty{seq(Modality::Visual, Eigen::MatrixXd(0, 4))};
  CHECK_THROWS_AS(fuse(empty, ModalityCombo::parse("v"), 8, {}), ShapeMismatch);
}

TEST_CASE("norm stats json round trip is exact") {
  NormStats s;
  s.per_modality[Modality::Text] = {testing::random_matrix(5, 1, 1).col(0), testing::random_matrix(5, 1, 2).col(0).cwiseAbs()};
  s.per_modality[Modality::Visual] = {testing::random_matrix(3, 1, 3).col(0), testing::random_matrix(3, 1, 4).col(0).cwiseAbs()};
  testing::TempDir dir("norm");
  write_norm_stats(dir / "n.json", s);
  const NormStats back = read_norm_stats(dir / "n.json");
  REQUIRE(back.per_modality.size() == 2);
  CHECK(back.per_modality.at(Modality::Text).mean == s.per_modality.at(Modality::Text).mean);
  CHECK(back.per_modality.at(Modality::Visual).std == s.per_modality.at(Modality::Visual).std);
  CHECK_THROWS_AS(norm_stats_from_json(nlohmann::json::parse(R"({"audio": {"mean": [1], "std": [-1]}})")),
                  MalformedCheckpoint);
}
