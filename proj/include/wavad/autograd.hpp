#pragma once

#include <span>
#include <vector>

#include "wavad/errors.hpp"
#include "wavad/feature_map.hpp"
#include "wavad/rng.hpp"

namespace wavad {

enum class Activation { kIdentity, kLeakyRelu, kSigmoid, kSoftmaxChannels };

inline constexpr double kLeakyReluSlope = 0.01;

// Probabilities are clamped to [kProbFloor, 1 - kProbFloor] before any log so
// losses stay finite.
inline constexpr double kProbFloor = 1e-12;

double leaky_relu(double x, double slope = kLeakyReluSlope);
double sigmoid(double x);

// Numerically stable softmax over one column of channel logits.
void softmax_over_channels(std::span<const double> logits, std::span<double> probs);
std::vector<double> softmax_over_channels(std::span<const double> logits);

// 1-D convolution layer, cross-correlation orientation, valid padding only.
// Parameter gradients accumulate additively across backward calls until
// zero_grad().
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_size = 0;
  int stride = 1;
  Activation activation = Activation::kLeakyRelu;

  std::vector<double> kernel;  // [out_channels][in_channels][kernel_size]
  std::vector<double> bias;    // [out_channels]
  std::vector<double> kernel_grad;
  std::vector<double> bias_grad;

  ConvLayer() = default;
  ConvLayer(int in_ch, int out_ch, int k, int stride_, Activation act);

  double& kernel_at(int oc, int ic, int j) {
    return kernel[(static_cast<std::size_t>(oc) * in_channels + ic) * kernel_size + j];
  }
  double kernel_at(int oc, int ic, int j) const {
    return kernel[(static_cast<std::size_t>(oc) * in_channels + ic) * kernel_size + j];
  }

  // floor((n - k) / stride) + 1; throws InsufficientContextError if n < k.
  int output_length(int input_length) const;

  void zero_grad();
  void scale_grad(double factor);
};

FeatureMap conv1d_forward(const ConvLayer& layer, const FeatureMap& input);

// Exact adjoint of conv1d_forward. `output` must be the map conv1d_forward
// produced for `input`, with the upstream gradient dL/d(output values) in
// output.grad. Parameter gradients accumulate into the layer, input gradients
// into input.grad.
void conv1d_backward(ConvLayer& layer, FeatureMap& input, const FeatureMap& output);

// Mean over frames of -log p[target]; targets are class indices per frame.
double cross_entropy(const FeatureMap& probs, std::span<const int> targets);

// dL/dprobs for L = sum over frames of -log p[target] / normalizer.
FeatureMap cross_entropy_grad(const FeatureMap& probs, std::span<const int> targets,
                              double normalizer);

// Mean over frames of -[t log p + (1-t) log(1-p)].
double binary_cross_entropy(std::span<const double> p, std::span<const int> t);
std::vector<double> binary_cross_entropy_grad(std::span<const double> p, std::span<const int> t,
                                              double normalizer);

// Gradient reversal node: identity on values, -alpha scaling on gradients.
std::vector<double> gradient_reversal(std::span<const double> upstream_grad, double alpha);
FeatureMap gradient_reversal_forward(const FeatureMap& x);
// downstream.grad += -alpha * upstream.grad
void gradient_reversal_backward(const FeatureMap& upstream, double alpha, FeatureMap& downstream);

// RMSprop: v <- rho*v + (1-rho)*g^2;  p <- p - lr*g/(sqrt(v) + eps).
// mean_sq is sized lazily on first use and must then keep its shape.
struct RmsPropState {
  std::vector<double> mean_sq;
};

void rmsprop_step(std::span<double> params, std::span<const double> grads, RmsPropState& state,
                  double lr, double rho = 0.9, double eps = 1e-8);

// Kernel entries ~ N(0, 2/fan_in), biases zero.
void init_he(ConvLayer& layer, Rng& rng);
// Kernel entries ~ N(0, 2/(fan_in+fan_out)), biases zero.
void init_xavier(ConvLayer& layer, Rng& rng);

}  // namespace wavad
