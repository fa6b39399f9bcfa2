// Copyright 2026  aqassess authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "aqassess/binary_io.hpp"
#include "aqassess/corpus/corpus.hpp"
#include "aqassess/error.hpp"

namespace aqassess::corpus {

Audio read_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open audio file " + path.string());
  try {
    io::expect_magic(is, "RIFF", "RIFF WAV");
    io::get_u32(is);
    char wave[4];
    is.read(wave, 4);
    if (!is || std::memcmp(wave, "WAVE", 4) != 0) throw DataError("not a WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    while (true) {
      char id[4];
      is.read(id, 4);
      if (!is) throw DataError("no data chunk");
      const std::uint32_t size = io::get_u32(is);
      if (std::memcmp(id, "fmt ", 4) == 0) {
        format = io::get_u16(is);
        channels = io::get_u16(is);
        rate = io::get_u32(is);
        io::get_u32(is);  // byte rate
        io::get_u16(is);  // block align
        bits = io::get_u16(is);
        if (size > 16) is.ignore(size - 16 + (size & 1));
        have_fmt = true;
      } else if (std::memcmp(id, "data", 4) == 0) {
        if (!have_fmt) throw DataError("data chunk before fmt chunk");
        // 0xFFFE = WAVE_FORMAT_EXTENSIBLE, accepted when it carries 16-bit PCM.
        if ((format != 1 && format != 0xFFFE) || bits != 16)
          throw DataError("only 16-bit PCM is supported (format " + std::to_string(format) +
                          ", " + std::to_string(bits) + " bits)");
        if (channels == 0 || rate == 0) throw DataError("invalid fmt chunk");
        const std::size_t frames = size / (2u * channels);
        Audio a;
        a.sample_rate = rate;
        a.samples.resize(frames);
        std::vector<char> raw(frames * 2u * channels);
        is.read(raw.data(), static_cast<std::streamsize>(raw.size()));
        const auto got = static_cast<std::size_t>(is.gcount()) / (2u * channels);
        a.samples.resize(got);
        for (std::size_t f = 0; f < got; ++f) {
          double acc = 0;
          for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t o = (f * channels + c) * 2;
            const auto v = static_cast<std::int16_t>(static_cast<std::uint16_t>(
                static_cast<unsigned char>(raw[o]) | (static_cast<unsigned char>(raw[o + 1]) << 8)));
            acc += v / 32768.0;
          }
          a.samples[f] = acc / channels;
        }
        return a;
      } else {
        is.ignore(size + (size & 1));
      }
    }
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Audio resample(const Audio& in, double target_rate) {
  if (in.sample_rate == target_rate || in.samples.empty()) {
    Audio out = in;
    out.sample_rate = target_rate;
    return out;
  }
  const double ratio = in.sample_rate / target_rate;
  const auto n = static_cast<std::size_t>(
      std::floor(static_cast<double>(in.samples.size()) * target_rate / in.sample_rate));
  Audio out;
  out.sample_rate = target_rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto i0 = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i0);
    const double a = in.samples[std::min(i0, in.samples.size() - 1)];
    const double b = in.samples[std::min(i0 + 1, in.samples.size() - 1)];
    out.samples[i] = a + (b - a) * frac;
  }
  return out;
}

Audio load_audio(const std::filesystem::path& path) {
  Audio a = read_wav(path);
  return a.sample_rate == kTargetRate ? a : resample(a, kTargetRate);
}

void write_wav(const std::filesystem::path& path, const Audio& audio) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path.string());
  const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate));
  const auto bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  os.write("RIFF", 4);
  io::put_u32(os, 36 + bytes);
  os.write("WAVEfmt ", 8);
  io::put_u32(os, 16);
  io::put_u16(os, 1);
  io::put_u16(os, 1);
  io::put_u32(os, rate);
  io::put_u32(os, rate * 2);
  io::put_u16(os, 2);
  io::put_u16(os, 16);
  os.write("data", 4);
  io::put_u32(os, bytes);
  for (double s : audio.samples) {
    const auto v = static_cast<std::int16_t>(std::lround(std::clamp(s, -1.0, 1.0) * 32767.0));
    io::put_u16(os, static_cast<std::uint16_t>(v));
  }
  if (!os) throw DataError("write failed: " + path.string());
}

}  // namespace aqassess::corpus
