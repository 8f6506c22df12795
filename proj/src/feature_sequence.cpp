// SPDX-License-Identifier: Apache-2.0
#include "trialsense/feature_sequence.hpp"

#include "trialsense/error.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace trialsense {

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::Visual: return "visual";
    case Modality::Audio: return "audio";
    case Modality::Text: return "text";
  }
  return "unknown";
}

char modality_letter(Modality m) {
  switch (m) {
    case Modality::Visual: return 'V';
    case Modality::Audio: return 'A';
    case Modality::Text: return 'T';
  }
  return '?';
}

std::optional<Modality> parse_modality(std::string_view token) {
  std::string lower(token);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "v" || lower == "visual") return Modality::Visual;
  if (lower == "a" || lower == "audio") return Modality::Audio;
  if (lower == "t" || lower == "text") return Modality::Text;
  return std::nullopt;
}

void FeatureSequence::validate() const {
  if (frames.rows() < 1 || frames.cols() < 1) {
    throw ShapeMismatch(std::string(modality_name(modality)) + " sequence is empty");
  }
  if (!frames.allFinite()) {
    throw ShapeMismatch(std::string(modality_name(modality)) + " sequence has non-finite entries");
  }
}

}  // namespace trialsense
