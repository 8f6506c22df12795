// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "trialsense/dataset.hpp"
#include "trialsense/feature_sequence.hpp"
#include "trialsense/fusion.hpp"
#include "trialsense/mfcc.hpp"

#include <map>
#include <string>
#include <vector>

namespace trialsense {

/// Extracted feature sequences of one labeled sample.
struct SampleFeatures {
  std::string id;
  Label label = Label::Truthful;
  std::map<Modality, FeatureSequence> sequences;

  /// Throws MissingModality.
  const FeatureSequence& at(Modality m) const;
  bool has(ModalityCombo combo) const;
};

/// Reads and featurizes the requested modalities of one record:
/// Visual via parse_landmarks + landmarks_to_features, Audio via read_wav +
/// extract_mfcc, Text via parse_embeddings + embeddings_to_features.
/// Parser errors propagate.
SampleFeatures load_sample_features(const SampleRecord& record, ModalityCombo modalities,
                                    const MfccConfig& mfcc = {});

}  // namespace trialsense
