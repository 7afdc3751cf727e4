#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace wavad {

struct WavData {
  std::vector<double> samples;  // scaled to [-1, 1)
  int fs = 0;
};

// PCM 16-bit mono only; the sampling rate must be divisible by 100 so the
// 10 ms label grid is integral. Anything else raises FormatError naming the
// offense.
WavData load_wav(const std::filesystem::path& path);

// Clamps to [-1, 1] and quantizes to 16-bit PCM.
void save_wav(const std::filesystem::path& path, std::span<const double> samples, int fs);

}  // namespace wavad
