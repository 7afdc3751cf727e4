#include "wavad/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "wavad/errors.hpp"

namespace wavad {

namespace {

// Little-endian scalar IO (the container format is little-endian by
// definition; this code assumes a little-endian host, as does the checkpoint
// writer).
template <typename T>
void write_le(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_le(std::istream& is, const std::string& what) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw FormatError("truncated wav file while reading " + what);
  return v;
}

}  // namespace

WavData load_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open wav file: " + path.string());

  char riff[4], wave[4];
  if (!is.read(riff, 4)) throw FormatError("truncated wav file: " + path.string());
  read_le<std::uint32_t>(is, "riff size");
  if (!is.read(wave, 4)) throw FormatError("truncated wav file: " + path.string());
  if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0)
    throw FormatError("not a RIFF/WAVE file: " + path.string());

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  WavData out;

  while (true) {
    char id[4];
    if (!is.read(id, 4)) break;
    const auto chunk_size = read_le<std::uint32_t>(is, "chunk size");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      format = read_le<std::uint16_t>(is, "format tag");
      channels = read_le<std::uint16_t>(is, "channel count");
      rate = read_le<std::uint32_t>(is, "sample rate");
      read_le<std::uint32_t>(is, "byte rate");
      read_le<std::uint16_t>(is, "block align");
      bits = read_le<std::uint16_t>(is, "bits per sample");
      if (chunk_size > 16) is.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw FormatError("wav data chunk before fmt chunk: " + path.string());
      if (format != 1) throw FormatError("unsupported wav encoding (want PCM, got format tag " +
                                         std::to_string(format) + "): " + path.string());
      if (bits != 16)
        throw FormatError("unsupported wav sample width (want 16-bit, got " +
                          std::to_string(bits) + "): " + path.string());
      if (channels != 1)
        throw FormatError("unsupported wav channel count (want mono, got " +
                          std::to_string(channels) + "): " + path.string());
      if (rate == 0 || rate % 100 != 0)
        throw FormatError("unsupported wav sample rate (want a multiple of 100 Hz for the "
                          "10 ms label grid, got " + std::to_string(rate) + "): " +
                          path.string());
      const std::size_t n = chunk_size / 2;
      out.samples.resize(n);
      out.fs = static_cast<int>(rate);
      std::vector<std::int16_t> raw(n);
      if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * 2)))
        throw FormatError("truncated wav data chunk: " + path.string());
      for (std::size_t i = 0; i < n; ++i) out.samples[i] = raw[i] / 32768.0;
      return out;
    } else {
      // skip unknown chunk (word-aligned)
      is.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  throw FormatError("wav file has no data chunk: " + path.string());
}

void save_wav(const std::filesystem::path& path, std::span<const double> samples, int fs) {
  if (fs <= 0 || fs % 100 != 0)
    throw FormatError("refusing to write wav with sample rate " + std::to_string(fs));
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot create wav file: " + path.string());

  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  os.write("RIFF", 4);
  write_le<std::uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  write_le<std::uint32_t>(os, 16);
  write_le<std::uint16_t>(os, 1);  // PCM
  write_le<std::uint16_t>(os, 1);  // mono
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(fs));
  write_le<std::uint32_t>(os, static_cast<std::uint32_t>(fs * 2));
  write_le<std::uint16_t>(os, 2);
  write_le<std::uint16_t>(os, 16);
  os.write("data", 4);
  write_le<std::uint32_t>(os, data_bytes);
  for (double x : samples) {
    const double scaled = std::round(std::clamp(x, -1.0, 1.0) * 32768.0);
    write_le<std::int16_t>(os, static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
  }
  if (!os) throw FormatError("failed writing wav file: " + path.string());
}

}  // namespace wavad
