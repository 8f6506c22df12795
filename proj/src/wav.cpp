// SPDX-License-Identifier: Apache-2.0
#include "trialsense/wav.hpp"

#include "trialsense/error.hpp"
#include "trialsense/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace trialsense {
namespace {

constexpr std::uint16_t kFormatPcm = 1;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, std::string_view tag) {
  return std::equal(tag.begin(), tag.end(), b.begin() + static_cast<std::ptrdiff_t>(at));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_tag(std::vector<std::uint8_t>& out, std::string_view tag) {
  out.insert(out.end(), tag.begin(), tag.end());
}

struct ChunkLayout {
  WavHeader header;
  std::size_t data_offset = 0;
};

ChunkLayout walk_chunks(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) throw CorruptWav("file shorter than the RIFF header");
  if (!tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw CorruptWav("missing RIFF/WAVE signature");
  }

  ChunkLayout layout;
  bool have_fmt = false;
  std::optional<std::size_t> data_offset;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16 || body + size > bytes.size()) throw CorruptWav("truncated fmt chunk");
      layout.header.audio_format = read_u16(bytes, body);
      layout.header.channels = read_u16(bytes, body + 2);
      layout.header.sample_rate = read_u32(bytes, body + 4);
      layout.header.bits_per_sample = read_u16(bytes, body + 14);
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (body + size > bytes.size()) throw CorruptWav("truncated data chunk");
      layout.header.data_bytes = size;
      data_offset = body;
    } else if (body + size > bytes.size()) {
      throw CorruptWav("truncated chunk");
    }
    pos = body + size + (size & 1u);
    if (have_fmt && data_offset) break;
  }
  if (!have_fmt) throw CorruptWav("no fmt chunk");
  if (!data_offset) throw CorruptWav("no data chunk");
  layout.data_offset = *data_offset;
  return layout;
}

std::vector<std::uint8_t> as_bytes(const std::string& s) {
  return {s.begin(), s.end()};
}

}  // namespace

WavHeader read_wav_header(std::span<const std::uint8_t> bytes) {
  return walk_chunks(bytes).header;
}

void require_canonical(const WavHeader& h) {
  if (h.audio_format != kFormatPcm) {
    throw UnsupportedWav("format=" + std::to_string(h.audio_format) + ", expected PCM (1)");
  }
  if (h.channels != 1) {
    throw UnsupportedWav("channels=" + std::to_string(h.channels) + ", expected mono");
  }
  if (h.sample_rate != static_cast<std::uint32_t>(kCanonicalSampleRate)) {
    throw UnsupportedWav("sample_rate=" + std::to_string(h.sample_rate) + ", expected 16000");
  }
  if (h.bits_per_sample != 16) {
    throw UnsupportedWav("bits_per_sample=" + std::to_string(h.bits_per_sample) +
                         ", expected 16");
  }
}

AudioSignal decode_wav(std::span<const std::uint8_t> bytes) {
  const ChunkLayout layout = walk_chunks(bytes);
  require_canonical(layout.header);
  if (layout.header.data_bytes % 2 != 0) throw CorruptWav("odd byte count in 16-bit data");

  AudioSignal signal;
  signal.sample_rate = kCanonicalSampleRate;
  const std::size_t n = layout.header.data_bytes / 2;
  signal.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto code = static_cast<std::int16_t>(read_u16(bytes, layout.data_offset + 2 * i));
    signal.samples[i] = static_cast<double>(code) / 32768.0;
  }
  return signal;
}

AudioSignal read_wav(const std::filesystem::path& path) {
  std::string raw;
  try {
    raw = read_file(path);
  } catch (const std::runtime_error& e) {
    throw CorruptWav(e.what());
  }
  const auto bytes = as_bytes(raw);
  return decode_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(const AudioSignal& signal) {
  const auto n = static_cast<std::uint32_t>(signal.samples.size());
  const std::uint32_t data_bytes = 2 * n;
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : signal.samples) {
    const double scaled = std::round(std::clamp(s, -1.0, 1.0) * 32768.0);
    const auto code = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(code));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const AudioSignal& signal) {
  const auto bytes = encode_wav(signal);
  write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace trialsense
