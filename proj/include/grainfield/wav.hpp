#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "grainfield/audio_buffer.hpp"

namespace grainfield {

// RIFF/WAVE codec. The writer always emits IEEE float-32 (format tag 3); the
// reader accepts PCM-16/24 (tag 1), float-32 (tag 3) and the extensible
// wrapper (0xFFFE) around either. Integer samples map to s / 2^(bits-1).
namespace wav_detail {

static_assert(std::endian::native == std::endian::little,
              "WAV codec assumes a little-endian host");

inline std::uint32_t u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}
inline std::uint16_t u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}
inline void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void tag(std::vector<std::uint8_t>& out, const char* t) { out.insert(out.end(), t, t + 4); }

}  // namespace wav_detail

template <std::floating_point Sample>
std::vector<std::uint8_t> encode_wav(const BasicAudioBuffer<Sample>& buffer) {
  using namespace wav_detail;
  const auto channels = static_cast<std::uint32_t>(buffer.channels());
  const auto frames = static_cast<std::uint64_t>(buffer.frames());
  const std::uint64_t data_bytes = frames * channels * 4;
  if (data_bytes + 36 > 0xFFFFFFFFull) throw FormatError("data chunk exceeds 4 GiB RIFF limit");

  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(44 + data_bytes));
  tag(out, "RIFF");
  put32(out, static_cast<std::uint32_t>(36 + data_bytes));
  tag(out, "WAVE");
  tag(out, "fmt ");
  put32(out, 16);
  put16(out, 3);
  put16(out, static_cast<std::uint16_t>(channels));
  put32(out, static_cast<std::uint32_t>(buffer.sample_rate()));
  put32(out, static_cast<std::uint32_t>(buffer.sample_rate()) * channels * 4);
  put16(out, static_cast<std::uint16_t>(channels * 4));
  put16(out, 32);
  tag(out, "data");
  put32(out, static_cast<std::uint32_t>(data_bytes));
  for (std::size_t i = 0; i < buffer.frames(); ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const float v = static_cast<float>(buffer.channel(c)[i]);
      put32(out, std::bit_cast<std::uint32_t>(v));
    }
  }
  return out;
}

inline AudioBuffer decode_wav(const std::vector<std::uint8_t>& bytes) {
  using namespace wav_detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0) {
    throw FormatError("RIFF chunk: missing RIFF signature");
  }
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError("RIFF chunk: form type is not WAVE");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::string id(reinterpret_cast<const char*>(hdr), 4);
    const std::size_t size = u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size()) throw FormatError("fmt chunk: truncated");
      const std::uint8_t* f = bytes.data() + body;
      format = u16(f);
      channels = u16(f + 2);
      rate = u32(f + 4);
      block_align = u16(f + 12);
      bits = u16(f + 14);
      if (format == 0xFFFE) {
        if (size < 40) throw FormatError("fmt chunk: truncated extensible header");
        format = u16(f + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("data chunk: appears before fmt chunk");
      if (body + size > bytes.size()) throw FormatError("data chunk: truncated");
      data = bytes.data() + body;
      data_size = size;
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw FormatError("fmt chunk: missing");
  if (!data) throw FormatError("data chunk: missing");
  if (channels == 0) throw FormatError("fmt chunk: zero channels");
  if (rate == 0) throw FormatError("fmt chunk: zero sample rate");

  const bool pcm = format == 1 && (bits == 16 || bits == 24);
  const bool flt = format == 3 && bits == 32;
  if (!pcm && !flt) {
    throw FormatError("fmt chunk: unsupported codec (format tag " + std::to_string(format) +
                      ", " + std::to_string(bits) + " bits)");
  }
  const std::size_t bytes_per_sample = bits / 8;
  if (block_align != bytes_per_sample * channels) {
    throw FormatError("fmt chunk: block align inconsistent with channels and bit depth");
  }
  const std::size_t frames = data_size / block_align;

  std::vector<std::vector<float>> out(channels, std::vector<float>(frames));
  const std::uint8_t* p = data;
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c, p += bytes_per_sample) {
      float v;
      if (flt) {
        v = std::bit_cast<float>(u32(p));
      } else if (bits == 16) {
        v = static_cast<float>(static_cast<std::int16_t>(u16(p))) / 32768.0f;
      } else {
        std::int32_t s = std::int32_t(p[0]) | std::int32_t(p[1]) << 8 | std::int32_t(p[2]) << 16;
        if (s & 0x800000) s -= 0x1000000;
        v = static_cast<float>(s) / 8388608.0f;
      }
      out[c][i] = v;
    }
  }
  return AudioBuffer(std::move(out), static_cast<int>(rate));
}

inline AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

template <std::floating_point Sample>
void write_wav(const BasicAudioBuffer<Sample>& buffer, const std::filesystem::path& path) {
  const auto bytes = encode_wav(buffer);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write WAV file: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing WAV file: " + path.string());
}

}  // namespace grainfield
