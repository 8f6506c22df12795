// SPDX-License-Identifier: Apache-2.0
#include "trialsense/sample_features.hpp"

#include "trialsense/embeddings.hpp"
#include "trialsense/error.hpp"
#include "trialsense/landmarks.hpp"
#include "trialsense/wav.hpp"

namespace trialsense {

const FeatureSequence& SampleFeatures::at(Modality m) const {
  const auto it = sequences.find(m);
  if (it == sequences.end()) {
    throw MissingModality("sample '" + id + "' has no " + std::string(modality_name(m)) + " features");
  }
  return it->second;
}

bool SampleFeatures::has(ModalityCombo combo) const {
  for (Modality m : combo.modalities()) {
    if (!sequences.contains(m)) return false;
  }
  return true;
}

SampleFeatures load_sample_features(const SampleRecord& record, ModalityCombo modalities,
                                    const MfccConfig& mfcc) {
  SampleFeatures out;
  out.id = record.id;
  out.label = record.label;
  for (Modality m : modalities.modalities()) {
    switch (m) {
      case Modality::Visual:
        out.sequences.emplace(m, landmarks_to_features(parse_landmarks(record.landmarks_path)));
        break;
      case Modality::Audio:
        out.sequences.emplace(m, extract_mfcc(read_wav(record.audio_path), mfcc));
        break;
      case Modality::Text:
        out.sequences.emplace(m, embeddings_to_features(parse_embeddings(record.embedding_path)));
        break;
    }
  }
  return out;
}

}  // namespace trialsense
