// SPDX-License-Identifier: Apache-2.0
#include "trialsense/error.hpp"
#include "trialsense/wav.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cstring>
#include <string>

using namespace trialsense;

namespace {

// Hand-assembled RIFF file with arbitrary fmt fields and an optional extra chunk.
std::vector<std::uint8_t> build_wav(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                    std::uint16_t bits, const std::vector<std::int16_t>& samples,
                                    const std::string& extra_chunk_body = "") {
  std::vector<std::uint8_t> b;
  auto u16 = [&b](std::uint16_t v) {
    b.push_back(v & 0xff);
    b.push_back(v >> 8);
  };
  auto u32 = [&b](std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) b.push_back((v >> s) & 0xff);
  };
  auto tag = [&b](const char* t) { b.insert(b.end(), t, t + 4); };
  tag("RIFF");
  u32(0);
  tag("WAVE");
  if (!extra_chunk_body.empty()) {
    tag("LIST");
    u32(static_cast<std::uint32_t>(extra_chunk_body.size()));
    b.insert(b.end(), extra_chunk_body.begin(), extra_chunk_body.end());
    if (extra_chunk_body.size() % 2) b.push_back(0);
  }
  tag("fmt ");
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(static_cast<std::uint16_t>(channels * bits / 8));
  u16(bits);
  tag("data");
  u32(static_cast<std::uint32_t>(samples.size() * 2));
  for (auto s : samples) u16(static_cast<std::uint16_t>(s));
  const auto riff = static_cast<std::uint32_t>(b.size() - 8);
  std::memcpy(b.data() + 4, &riff, 4);
  return b;
}

std::string unsupported_message(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_wav(bytes);
  } catch (const UnsupportedWav& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("decodes 16-bit PCM with full-scale mapping") {
  const auto bytes = build_wav(1, 1, 16000, 16, {0, 16384, -32768, 32767});
  const AudioSignal a = decode_wav(bytes);
  REQUIRE(a.samples.size() == 4);
  CHECK(a.samples[0] == 0.0);
  CHECK(a.samples[1] == 0.5);
  CHECK(a.samples[2] == -1.0);
  CHECK(a.samples[3] == 32767.0 / 32768.0);
  CHECK(a.duration_seconds() == doctest::Approx(4.0 / 16000.0));
}

TEST_CASE("skips unknown chunks including odd-sized ones") {
  const auto bytes = build_wav(1, 1, 16000, 16, {100, -100}, "odd");
  const AudioSignal a = decode_wav(bytes);
  REQUIRE(a.samples.size() == 2);
  CHECK(a.samples[0] == 100.0 / 32768.0);
}

TEST_CASE("non-canonical formats are named in the error") {
  CHECK(unsupported_message(build_wav(3, 1, 16000, 16, {0})).find("format=3") != std::string::npos);
  CHECK(unsupported_message(build_wav(1, 2, 16000, 16, {0, 0})).find("channels=2") != std::string::npos);
  CHECK(unsupported_message(build_wav(1, 1, 44100, 16, {0})).find("sample_rate=44100") != std::string::npos);
  CHECK(unsupported_message(build_wav(1, 1, 16000, 8, {0})).find("bits_per_sample=8") != std::string::npos);
}

TEST_CASE("truncation and garbage are CorruptWav") {
  auto bytes = build_wav(1, 1, 16000, 16, {1, 2, 3, 4});
  bytes.resize(bytes.size() - 3);
  CHECK_THROWS_AS(decode_wav(bytes), CorruptWav);
  const std::vector<std::uint8_t> junk{'R', 'I', 'F', 'X', 0, 0, 0, 0, 'W', 'A', 'V', 'E'};
  CHECK_THROWS_AS(decode_wav(junk), CorruptWav);
  CHECK_THROWS_AS(decode_wav(std::vector<std::uint8_t>{}), CorruptWav);
}

TEST_CASE("header reading does not require canonical parameters") {
  const WavHeader h = read_wav_header(build_wav(1, 2, 48000, 24, {0, 0, 0}));
  CHECK(h.channels == 2);
  CHECK(h.sample_rate == 48000);
  CHECK(h.bits_per_sample == 24);
  CHECK_THROWS_AS(require_canonical(h), UnsupportedWav);
}

TEST_CASE("encode then decode is exact on the 16-bit grid and clamps") {
  AudioSignal a;
  a.samples = {0.0, 0.25, -0.75, 1.5, -2.0, 123.0 / 32768.0};
  const AudioSignal b = decode_wav(encode_wav(a));
  REQUIRE(b.samples.size() == a.samples.size());
  CHECK(b.samples[1] == 0.25);
  CHECK(b.samples[2] == -0.75);
  CHECK(b.samples[3] == 32767.0 / 32768.0);
  CHECK(b.samples[4] == -1.0);
  CHECK(b.samples[5] == a.samples[5]);
}

TEST_CASE("file round trip") {
  testing::TempDir dir("wav");
  AudioSignal a;
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) a.samples.push_back(std::round(rng.uniform(-0.9, 0.9) * 32768.0) / 32768.0);
  write_wav(dir / "a.wav", a);
  CHECK(read_wav(dir / "a.wav").samples == a.samples);
  CHECK_THROWS_AS(read_wav(dir / "missing.wav"), CorruptWav);
}
