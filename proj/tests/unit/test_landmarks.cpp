// SPDX-License-Identifier: Apache-2.0
#include "trialsense/error.hpp"
#include "trialsense/landmarks.hpp"
#include "trialsense/rng.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace trialsense;

namespace {

LandmarkFrame random_face(Rng& rng) {
  LandmarkFrame f;
  for (auto& p : f.points) p = {rng.uniform(100.0, 300.0), rng.uniform(100.0, 300.0)};
  // Keep the eyes apart.
  for (std::size_t i = 36; i < 42; ++i) f.points[i].x -= 60.0;
  for (std::size_t i = 42; i < 48; ++i) f.points[i].x += 60.0;
  return f;
}

std::string header() {
  std::string h = "frame";
  for (int i = 1; i <= 68; ++i) h += ",x" + std::to_string(i) + ",y" + std::to_string(i);
  return h;
}

std::string row(int index, double value) {
  std::string r = std::to_string(index);
  for (int i = 0; i < 136; ++i) r += "," + std::to_string(value + i);
  return r;
}

}  // namespace

TEST_CASE("inter-ocular distance of a hand-built face") {
  LandmarkFrame f;
  for (std::size_t i = 36; i < 42; ++i) f.points[i] = {10.0 + (i % 2), 20.0};
  for (std::size_t i = 42; i < 48; ++i) f.points[i] = {13.0 + (i % 2), 24.0};
  CHECK(inter_ocular_distance(f) == doctest::Approx(5.0));
}

TEST_CASE("normalized frame has zero centroid and unit eye distance") {
  Rng rng(2);
  const LandmarkFrame n = normalize_frame(random_face(rng));
  double cx = 0.0, cy = 0.0;
  for (const auto& p : n.points) {
    cx += p.x;
    cy += p.y;
  }
  CHECK(std::abs(cx / 68.0) < 1e-12);
  CHECK(std::abs(cy / 68.0) < 1e-12);
  CHECK(inter_ocular_distance(n) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("features are invariant to translation and uniform scaling") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    LandmarkSequence seq{{random_face(rng), random_face(rng), random_face(rng)}, 25.0};
    LandmarkSequence moved = seq;
    const double s = rng.uniform(0.1, 10.0);
    const double tx = rng.uniform(-500.0, 500.0), ty = rng.uniform(-500.0, 500.0);
    for (auto& f : moved.frames) {
      for (auto& p : f.points) p = {s * p.x + tx, s * p.y + ty};
    }
    const FeatureSequence a = landmarks_to_features(seq);
    const FeatureSequence b = landmarks_to_features(moved);
    CHECK((a.frames - b.frames).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("feature layout is x1..x68 then y1..y68") {
  Rng rng(4);
  const LandmarkFrame f = random_face(rng);
  const FeatureSequence feat = landmarks_to_features(LandmarkSequence{{f}, 30.0});
  const LandmarkFrame n = normalize_frame(f);
  REQUIRE(feat.dim() == 136);
  CHECK(feat.modality == Modality::Visual);
  CHECK(feat.frame_rate == 30.0);
  for (Eigen::Index i = 0; i < 68; ++i) {
    CHECK(feat.frames(0, i) == n.points[i].x);
    CHECK(feat.frames(0, 68 + i) == n.points[i].y);
  }
}

TEST_CASE("coincident eye centers report the frame") {
  Rng rng(9);
  LandmarkSequence seq{{random_face(rng), random_face(rng), random_face(rng)}, 30.0};
  for (std::size_t i = 36; i < 48; ++i) seq.frames[2].points[i] = {50.0, 50.0};
  try {
    landmarks_to_features(seq);
    FAIL("expected DegenerateFace");
  } catch (const DegenerateFace& e) {
    CHECK(e.frame() == 2);
  }
}

TEST_CASE("parse reads fps, header and rows") {
  const std::string text = "# fps=29.97\n# detector=dlib\n" + header() + "\n" + row(0, 1.0) + "\n" + row(2, 5.0) + "\n";
  const LandmarkSequence seq = parse_landmarks_text(text);
  CHECK(seq.fps == doctest::Approx(29.97));
  REQUIRE(seq.frames.size() == 2);
  CHECK(seq.frames[0].points[0].x == 1.0);
  CHECK(seq.frames[0].points[0].y == 2.0);
  CHECK(seq.frames[1].points[67].y == 5.0 + 135.0);
}

TEST_CASE("malformed landmark files") {
  const std::string h = header();
  CHECK_THROWS_AS(parse_landmarks_text(h + "\n" + row(0, 1.0) + "\n"), MalformedLandmarks);  // no fps
  CHECK_THROWS_AS(parse_landmarks_text("# fps=30\n" + row(0, 1.0) + "\n"), MalformedLandmarks);
  CHECK_THROWS_AS(parse_landmarks_text("# fps=30\n" + h + "\n"), MalformedLandmarks);  // no rows
  CHECK_THROWS_AS(parse_landmarks_text("# fps=30\n" + h + "\n" + row(1, 0) + "\n" + row(1, 0) + "\n"),
                  MalformedLandmarks);  // repeated index
  CHECK_THROWS_AS(parse_landmarks_text("# fps=0\n" + h + "\n" + row(0, 1.0) + "\n"), MalformedLandmarks);
  std::string short_row = row(0, 1.0);
  short_row.resize(short_row.rfind(','));
  CHECK_THROWS_AS(parse_landmarks_text("# fps=30\n" + h + "\n" + short_row + "\n"), MalformedLandmarks);
  std::string bad_value = row(0, 1.0);
  bad_value.replace(bad_value.rfind(',') + 1, std::string::npos, "nan");
  CHECK_THROWS_AS(parse_landmarks_text("# fps=30\n" + h + "\n" + bad_value + "\n"), MalformedLandmarks);
}

TEST_CASE("serialize and parse round trip") {
  testing::TempDir dir("lm");
  Rng rng(6);
  LandmarkSequence seq{{random_face(rng), random_face(rng)}, 30.0};
  write_landmarks(dir / "a.csv", seq);
  CHECK(check_landmarks_header(dir / "a.csv") == 30.0);
  const LandmarkSequence back = parse_landmarks(dir / "a.csv");
  REQUIRE(back.frames.size() == 2);
  for (std::size_t f = 0; f < 2; ++f) {
    for (std::size_t i = 0; i < 68; ++i) {
      CHECK(back.frames[f].points[i].x == doctest::Approx(seq.frames[f].points[i].x).epsilon(1e-8));
      CHECK(back.frames[f].points[i].y == doctest::Approx(seq.frames[f].points[i].y).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(check_landmarks_header(dir / "missing.csv"), MalformedLandmarks);
}
