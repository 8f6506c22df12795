// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trialsense {

inline constexpr int kCanonicalSampleRate = 16000;

/// PCM samples normalized to [-1, 1].
struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = kCanonicalSampleRate;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
  }
};

/// Contents of the "fmt " chunk plus the size of the "data" chunk.
struct WavHeader {
  std::uint16_t audio_format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits_per_sample = 0;
  std::uint32_t data_bytes = 0;
};

/// Walks the RIFF chunks and returns the format description without decoding
/// samples. Throws CorruptWav on truncated or inconsistent chunk structure.
WavHeader read_wav_header(std::span<const std::uint8_t> bytes);

/// Throws UnsupportedWav unless the header is PCM, mono, 16 kHz, 16-bit.
/// The message names the offending field, e.g. "channels=2, expected mono".
void require_canonical(const WavHeader& header);

/// Parses a canonical WAV file; sample s maps to s / 32768.
/// Throws UnsupportedWav, CorruptWav.
AudioSignal read_wav(const std::filesystem::path& path);
AudioSignal decode_wav(std::span<const std::uint8_t> bytes);

/// Encodes as canonical 16-bit PCM mono. Samples are clamped to [-1, 1) and
/// rounded to the nearest code, i.e. round(s * 32768) clamped to int16.
std::vector<std::uint8_t> encode_wav(const AudioSignal& signal);
void write_wav(const std::filesystem::path& path, const AudioSignal& signal);

}  // namespace trialsense
