#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wavad/autograd.hpp"

namespace wavad {

// Topology of the full detector: four encoder convolutions at sample rate, a
// strided framing convolution producing one feature vector per 10 ms, a
// decoder stack ending in a 2-channel speech/non-speech head, and a noise-type
// discriminator stack ending in an (n_noise_types+1)-channel softmax head.
struct NetworkConfig {
  int fs = 8000;
  std::array<int, 4> eb_kernels{30, 30, 80, 153};
  std::array<int, 4> eb_channels{32, 32, 32, 32};
  int fb_frame_len = 160;  // 2 * fs/100: 50% frame overlap
  int fb_stride = 80;      // fs/100: one output per 10 ms
  int fb_channels = 32;
  std::array<int, 3> db_kernels{55, 15, 5};  // 0 = layer omitted
  int db_channels = 32;
  std::array<int, 3> dn_kernels{55, 15, 5};
  int dn_channels = 32;
  double alpha = 0.1;
  int n_noise_types = 4;

  // Default topology with the framing grid adjusted to fs.
  static NetworkConfig for_sample_rate(int fs);

  void validate() const;  // throws ConfigError

  std::string to_json() const;
  static NetworkConfig from_json(const std::string& text);
};

// Everything the backward pass needs: the input map and every layer's
// post-activation output, in forward order. The two head outputs are aligned
// to a common frame count (the decoder and discriminator stacks may shrink
// differently); the offsets locate the aligned window inside the raw head
// maps.
struct ForwardTrace {
  FeatureMap input;  // 1 x n waveform
  std::vector<FeatureMap> eb_out;
  FeatureMap fb_out;
  FeatureMap dn_input;  // gradient-reversal node output (value copy of fb_out)
  std::vector<FeatureMap> db_out;
  std::vector<FeatureMap> dn_out;
  bool has_dn = false;

  FeatureMap vad_scores;        // 2 x frames, aligned
  FeatureMap noise_posteriors;  // (N+1) x frames, aligned; empty without DN
  int vad_offset = 0;           // aligned window start inside db_out.back()
  int noise_offset = 0;         // ... inside dn_out.back()

  int frames() const { return vad_scores.length; }
  void zero_grad();
};

struct MultitaskLosses {
  double vad_loss = 0.0;    // mean over frames
  double noise_loss = 0.0;  // mean over frames (0 when the trace skipped the DN)
  long frames = 0;
};

struct VadNetwork {
  NetworkConfig config;
  std::vector<ConvLayer> eb;  // 4 layers, stride 1
  ConvLayer fb;               // stride fs/100
  std::vector<ConvLayer> db;  // remaining layers; head = 2-channel sigmoid
  std::vector<ConvLayer> dn;  // 3 layers; head = (N+1)-channel softmax
  std::uint64_t init_seed = 0;

  static VadNetwork build(const NetworkConfig& config);

  // He init for leaky-ReLU layers, Xavier for the sigmoid/softmax heads;
  // biases zero. Fully determined by seed.
  void initialize(std::uint64_t seed);

  // Smallest waveform producing one output frame; the discriminator path may
  // need more context than the decoder path when its kernels are larger.
  int min_input_samples(bool with_dn = false) const;
  // Decoder-path output frame count for an input of n samples. Throws
  // InsufficientContextError (naming the minimum) when n is too short.
  int frames_for_input(long n) const;

  // with_dn=false skips the discriminator entirely (inference, or training a
  // model that has no adversarial branch).
  ForwardTrace forward(std::span<const double> waveform, bool with_dn = true) const;

  // Accumulates parameter gradients with the multi-task routing:
  //   DN params   <- dLz/dtheta
  //   DB params   <- dLy/dtheta
  //   EB/FB params<- dLy/dtheta - alpha * dLz/dtheta
  // Gradients are of the per-frame *sums* divided by `normalizer`;
  // normalizer <= 0 means the trace's frame count (per-frame means).
  MultitaskLosses backward_multitask(ForwardTrace& trace, std::span<const int> vad_labels,
                                     std::span<const int> noise_labels, double alpha,
                                     double normalizer = 0.0);

  void zero_grad();
  void scale_grad(double factor);

  struct ParamRef {
    std::string name;
    std::vector<double>* values;
    std::vector<double>* grads;
  };
  // Stable order and names; the checkpoint format and optimizer state rely on
  // this ordering.
  std::vector<ParamRef> parameters();

  // Per-frame speech scores for a waveform (no DN evaluation).
  std::vector<double> score(std::span<const double> waveform) const;
};

struct VadDecision {
  std::vector<int> labels;    // 1 = speech; ties resolve to non-speech
  std::vector<double> scores; // P(speech) via 2-way softmax of the head channels
};

// Channel 0 is non-speech, channel 1 is speech.
VadDecision vad_decision(const FeatureMap& vad_scores);

// Trims per-10ms labels symmetrically to the shrunken frame count; an odd trim
// drops the extra frame from the end.
std::vector<int> frame_label_alignment(int num_frames, std::span<const int> labels);

}  // namespace wavad
