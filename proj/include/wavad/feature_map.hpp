#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace wavad {

// Channels-by-time activation with a paired gradient buffer of identical
// shape. Row-major: row c holds the full time series of channel c.
struct FeatureMap {
  int channels = 0;
  int length = 0;
  std::vector<double> values;
  std::vector<double> grad;

  FeatureMap() = default;
  FeatureMap(int channels_, int length_)
      : channels(channels_),
        length(length_),
        values(static_cast<std::size_t>(channels_) * length_, 0.0),
        grad(static_cast<std::size_t>(channels_) * length_, 0.0) {}

  std::size_t size() const { return values.size(); }

  double& value(int c, int t) { return values[static_cast<std::size_t>(c) * length + t]; }
  double value(int c, int t) const { return values[static_cast<std::size_t>(c) * length + t]; }
  double& gradient(int c, int t) { return grad[static_cast<std::size_t>(c) * length + t]; }
  double gradient(int c, int t) const { return grad[static_cast<std::size_t>(c) * length + t]; }

  std::span<double> value_row(int c) {
    return {values.data() + static_cast<std::size_t>(c) * length, static_cast<std::size_t>(length)};
  }
  std::span<const double> value_row(int c) const {
    return {values.data() + static_cast<std::size_t>(c) * length, static_cast<std::size_t>(length)};
  }
  std::span<double> grad_row(int c) {
    return {grad.data() + static_cast<std::size_t>(c) * length, static_cast<std::size_t>(length)};
  }
  std::span<const double> grad_row(int c) const {
    return {grad.data() + static_cast<std::size_t>(c) * length, static_cast<std::size_t>(length)};
  }

  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

  // One-channel map over a raw waveform.
  static FeatureMap from_waveform(std::span<const double> samples) {
    FeatureMap m(1, static_cast<int>(samples.size()));
    std::copy(samples.begin(), samples.end(), m.values.begin());
    return m;
  }
};

}  // namespace wavad
