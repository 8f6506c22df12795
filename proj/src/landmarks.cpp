// SPDX-License-Identifier: Apache-2.0
#include "trialsense/landmarks.hpp"

#include "trialsense/error.hpp"
#include "trialsense/text_io.hpp"

#include <cmath>
#include <fstream>
#include <optional>

namespace trialsense {
namespace {

constexpr std::size_t kColumns = 1 + kVisualDim;
constexpr double kMinInterOcular = 1e-9;

std::optional<double> parse_fps_comment(std::string_view line) {
  // "# fps=30"
  std::string_view rest = trim(line.substr(1));
  if (rest.substr(0, 4) != "fps=") return std::nullopt;
  double fps = 0.0;
  if (!parse_real(trim(rest.substr(4)), fps) || !std::isfinite(fps) || fps <= 0.0) {
    throw MalformedLandmarks("bad fps value in '" + std::string(line) + "'");
  }
  return fps;
}

std::string expected_header() {
  std::string h = "frame";
  for (std::size_t i = 1; i <= kLandmarkCount; ++i) {
    h += ",x" + std::to_string(i) + ",y" + std::to_string(i);
  }
  return h;
}

void check_header_row(std::string_view line) {
  const auto cells = split(trim(line), ',');
  if (cells.size() != kColumns) {
    throw MalformedLandmarks("header has " + std::to_string(cells.size()) + " columns, expected " +
                             std::to_string(kColumns));
  }
  if (trim(line) != expected_header()) {
    throw MalformedLandmarks("header must read frame,x1,y1,...,x68,y68");
  }
}

}  // namespace

LandmarkSequence parse_landmarks_text(std::string_view text) {
  LandmarkSequence seq;
  std::optional<double> fps;
  bool seen_header = false;
  long long last_index = -1;
  std::size_t line_no = 0;

  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!fps) fps = parse_fps_comment(line);
      continue;
    }
    if (!seen_header) {
      check_header_row(line);
      seen_header = true;
      continue;
    }

    const auto cells = split(line, ',');
    if (cells.size() != kColumns) {
      throw MalformedLandmarks("line " + std::to_string(line_no) + ": " +
                               std::to_string(cells.size()) + " columns, expected " +
                               std::to_string(kColumns));
    }
    double index_value = 0.0;
    if (!parse_real(trim(cells[0]), index_value) || index_value != std::floor(index_value) ||
        index_value < 0.0) {
      throw MalformedLandmarks("line " + std::to_string(line_no) + ": bad frame index");
    }
    const auto index = static_cast<long long>(index_value);
    if (index <= last_index) {
      throw MalformedLandmarks("line " + std::to_string(line_no) +
                               ": frame index not strictly increasing");
    }
    last_index = index;

    LandmarkFrame frame;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      double x = 0.0;
      double y = 0.0;
      if (!parse_real(trim(cells[1 + 2 * i]), x) || !parse_real(trim(cells[2 + 2 * i]), y) ||
          !std::isfinite(x) || !std::isfinite(y)) {
        throw MalformedLandmarks("line " + std::to_string(line_no) + ": non-numeric coordinate for point " +
                                 std::to_string(i + 1));
      }
      frame.points[i] = {x, y};
    }
    seq.frames.push_back(frame);
  }

  if (!fps) throw MalformedLandmarks("missing '# fps=<real>' line");
  if (!seen_header) throw MalformedLandmarks("missing column header");
  if (seq.frames.empty()) throw MalformedLandmarks("no data rows");
  seq.fps = *fps;
  return seq;
}

LandmarkSequence parse_landmarks(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::runtime_error& e) {
    throw MalformedLandmarks(e.what());
  }
  return parse_landmarks_text(text);
}

double check_landmarks_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedLandmarks("cannot open " + path.string());
  std::optional<double> fps;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      if (!fps) fps = parse_fps_comment(view);
      continue;
    }
    if (!fps) throw MalformedLandmarks("missing '# fps=<real>' line before the header");
    check_header_row(view);
    return *fps;
  }
  throw MalformedLandmarks("missing column header");
}

std::string serialize_landmarks(const LandmarkSequence& seq) {
  std::string out = "# fps=" + format_real(seq.fps) + "\n" + expected_header() + "\n";
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    out += std::to_string(f);
    for (const Point2& p : seq.frames[f].points) {
      out += ',';
      out += format_real(p.x);
      out += ',';
      out += format_real(p.y);
    }
    out += '\n';
  }
  return out;
}

void write_landmarks(const std::filesystem::path& path, const LandmarkSequence& seq) {
  write_file(path, serialize_landmarks(seq));
}

double inter_ocular_distance(const LandmarkFrame& frame) {
  Point2 right_eye;
  Point2 left_eye;
  for (std::size_t i = 36; i < 42; ++i) {
    right_eye.x += frame.points[i].x;
    right_eye.y += frame.points[i].y;
  }
  for (std::size_t i = 42; i < 48; ++i) {
    left_eye.x += frame.points[i].x;
    left_eye.y += frame.points[i].y;
  }
  return std::hypot(left_eye.x / 6.0 - right_eye.x / 6.0, left_eye.y / 6.0 - right_eye.y / 6.0);
}

LandmarkFrame normalize_frame(const LandmarkFrame& frame) {
  const double scale = inter_ocular_distance(frame);
  if (!(scale > kMinInterOcular)) throw DegenerateFace(0);
  Point2 centroid;
  for (const Point2& p : frame.points) {
    centroid.x += p.x;
    centroid.y += p.y;
  }
  centroid.x /= static_cast<double>(kLandmarkCount);
  centroid.y /= static_cast<double>(kLandmarkCount);

  LandmarkFrame out;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) {
    out.points[i] = {(frame.points[i].x - centroid.x) / scale,
                     (frame.points[i].y - centroid.y) / scale};
  }
  return out;
}

FeatureSequence landmarks_to_features(const LandmarkSequence& seq) {
  if (seq.frames.empty()) throw MalformedLandmarks("empty landmark sequence");
  FeatureSequence out;
  out.modality = Modality::Visual;
  out.frame_rate = seq.fps;
  out.frames.resize(static_cast<Eigen::Index>(seq.frames.size()), static_cast<Eigen::Index>(kVisualDim));
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    LandmarkFrame normalized;
    try {
      normalized = normalize_frame(seq.frames[f]);
    } catch (const DegenerateFace&) {
      throw DegenerateFace(f);
    }
    const auto row = static_cast<Eigen::Index>(f);
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
      out.frames(row, static_cast<Eigen::Index>(i)) = normalized.points[i].x;
      out.frames(row, static_cast<Eigen::Index>(kLandmarkCount + i)) = normalized.points[i].y;
    }
  }
  return out;
}

}  // namespace trialsense
