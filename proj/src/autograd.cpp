#include "wavad/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wavad {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

void check_shape(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax_over_channels(std::span<const double> logits, std::span<double> probs) {
  check_shape(logits.size() == probs.size() && !logits.empty(), "softmax: size mismatch");
  double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - max_logit);
    sum += probs[i];
  }
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] /= sum;
}

std::vector<double> softmax_over_channels(std::span<const double> logits) {
  std::vector<double> probs(logits.size());
  softmax_over_channels(logits, probs);
  return probs;
}

ConvLayer::ConvLayer(int in_ch, int out_ch, int k, int stride_, Activation act)
    : in_channels(in_ch),
      out_channels(out_ch),
      kernel_size(k),
      stride(stride_),
      activation(act),
      kernel(static_cast<std::size_t>(out_ch) * in_ch * k, 0.0),
      bias(out_ch, 0.0),
      kernel_grad(kernel.size(), 0.0),
      bias_grad(out_ch, 0.0) {
  if (in_ch < 1 || out_ch < 1 || k < 1 || stride_ < 1)
    throw ConfigError("ConvLayer: channels, kernel size and stride must be positive");
}

int ConvLayer::output_length(int input_length) const {
  if (input_length < kernel_size)
    throw InsufficientContextError("conv input length " + std::to_string(input_length) +
                                   " shorter than kernel size " + std::to_string(kernel_size));
  return (input_length - kernel_size) / stride + 1;
}

void ConvLayer::zero_grad() {
  std::fill(kernel_grad.begin(), kernel_grad.end(), 0.0);
  std::fill(bias_grad.begin(), bias_grad.end(), 0.0);
}

void ConvLayer::scale_grad(double factor) {
  for (double& g : kernel_grad) g *= factor;
  for (double& g : bias_grad) g *= factor;
}

FeatureMap conv1d_forward(const ConvLayer& layer, const FeatureMap& input) {
  check_shape(input.channels == layer.in_channels,
              "conv1d_forward: input has " + std::to_string(input.channels) +
                  " channels, layer expects " + std::to_string(layer.in_channels));
  const int out_len = layer.output_length(input.length);
  FeatureMap out(layer.out_channels, out_len);

  for (int oc = 0; oc < layer.out_channels; ++oc) {
    std::span<double> out_row = out.value_row(oc);
    for (double& v : out_row) v = layer.bias[oc];
    for (int ic = 0; ic < layer.in_channels; ++ic) {
      std::span<const double> in_row = input.value_row(ic);
      for (int j = 0; j < layer.kernel_size; ++j) {
        const double w = layer.kernel_at(oc, ic, j);
        if (layer.stride == 1) {
          for (int t = 0; t < out_len; ++t) out_row[t] += w * in_row[t + j];
        } else {
          for (int t = 0; t < out_len; ++t)
            out_row[t] += w * in_row[static_cast<std::size_t>(t) * layer.stride + j];
        }
      }
    }
  }

  switch (layer.activation) {
    case Activation::kIdentity:
      break;
    case Activation::kLeakyRelu:
      for (double& v : out.values) v = leaky_relu(v);
      break;
    case Activation::kSigmoid:
      for (double& v : out.values) v = sigmoid(v);
      break;
    case Activation::kSoftmaxChannels: {
      std::vector<double> col(out.channels);
      std::vector<double> probs(out.channels);
      for (int t = 0; t < out_len; ++t) {
        for (int c = 0; c < out.channels; ++c) col[c] = out.value(c, t);
        softmax_over_channels(col, probs);
        for (int c = 0; c < out.channels; ++c) out.value(c, t) = probs[c];
      }
      break;
    }
  }
  return out;
}

namespace {

// dL/dpreactivation from dL/dactivation (output.grad), using only the
// post-activation map.
FeatureMap preactivation_grad(const ConvLayer& layer, const FeatureMap& output) {
  FeatureMap pg(output.channels, output.length);
  switch (layer.activation) {
    case Activation::kIdentity:
      pg.values = output.grad;
      break;
    case Activation::kLeakyRelu:
      // Leaky ReLU is sign-preserving, so the branch can be read off the
      // output; the derivative at exactly 0 follows the x >= 0 branch.
      for (std::size_t i = 0; i < pg.values.size(); ++i)
        pg.values[i] = output.grad[i] * (output.values[i] >= 0.0 ? 1.0 : kLeakyReluSlope);
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < pg.values.size(); ++i) {
        const double y = output.values[i];
        pg.values[i] = output.grad[i] * y * (1.0 - y);
      }
      break;
    case Activation::kSoftmaxChannels:
      for (int t = 0; t < output.length; ++t) {
        double dot = 0.0;
        for (int c = 0; c < output.channels; ++c)
          dot += output.gradient(c, t) * output.value(c, t);
        for (int c = 0; c < output.channels; ++c)
          pg.value(c, t) = output.value(c, t) * (output.gradient(c, t) - dot);
      }
      break;
  }
  return pg;
}

}  // namespace

void conv1d_backward(ConvLayer& layer, FeatureMap& input, const FeatureMap& output) {
  check_shape(input.channels == layer.in_channels, "conv1d_backward: input channel mismatch");
  check_shape(output.channels == layer.out_channels, "conv1d_backward: output channel mismatch");
  check_shape(layer.output_length(input.length) == output.length,
              "conv1d_backward: output length inconsistent with input");

  const FeatureMap pg = preactivation_grad(layer, output);
  const int out_len = output.length;

  for (int oc = 0; oc < layer.out_channels; ++oc) {
    std::span<const double> pg_row = pg.value_row(oc);
    double bsum = 0.0;
    for (double v : pg_row) bsum += v;
    layer.bias_grad[oc] += bsum;

    for (int ic = 0; ic < layer.in_channels; ++ic) {
      std::span<const double> in_row = input.value_row(ic);
      std::span<double> ig_row = input.grad_row(ic);
      for (int j = 0; j < layer.kernel_size; ++j) {
        const double w = layer.kernel_at(oc, ic, j);
        double ksum = 0.0;
        if (layer.stride == 1) {
          for (int t = 0; t < out_len; ++t) {
            ksum += pg_row[t] * in_row[t + j];
            ig_row[t + j] += pg_row[t] * w;
          }
        } else {
          for (int t = 0; t < out_len; ++t) {
            const std::size_t s = static_cast<std::size_t>(t) * layer.stride + j;
            ksum += pg_row[t] * in_row[s];
            ig_row[s] += pg_row[t] * w;
          }
        }
        layer.kernel_grad[(static_cast<std::size_t>(oc) * layer.in_channels + ic) *
                              layer.kernel_size +
                          j] += ksum;
      }
    }
  }
}

double cross_entropy(const FeatureMap& probs, std::span<const int> targets) {
  check_shape(static_cast<std::size_t>(probs.length) == targets.size(),
              "cross_entropy: frame count mismatch");
  double sum = 0.0;
  for (int t = 0; t < probs.length; ++t) {
    const int cls = targets[t];
    check_shape(cls >= 0 && cls < probs.channels, "cross_entropy: target class out of range");
    sum -= std::log(clamp_prob(probs.value(cls, t)));
  }
  return sum / probs.length;
}

FeatureMap cross_entropy_grad(const FeatureMap& probs, std::span<const int> targets,
                              double normalizer) {
  check_shape(static_cast<std::size_t>(probs.length) == targets.size(),
              "cross_entropy_grad: frame count mismatch");
  FeatureMap g(probs.channels, probs.length);
  for (int t = 0; t < probs.length; ++t) {
    const int cls = targets[t];
    g.value(cls, t) = -1.0 / (clamp_prob(probs.value(cls, t)) * normalizer);
  }
  return g;
}

double binary_cross_entropy(std::span<const double> p, std::span<const int> t) {
  check_shape(p.size() == t.size() && !p.empty(), "binary_cross_entropy: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = clamp_prob(p[i]);
    sum -= t[i] != 0 ? std::log(pi) : std::log(1.0 - pi);
  }
  return sum / static_cast<double>(p.size());
}

std::vector<double> binary_cross_entropy_grad(std::span<const double> p, std::span<const int> t,
                                              double normalizer) {
  check_shape(p.size() == t.size(), "binary_cross_entropy_grad: size mismatch");
  std::vector<double> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = clamp_prob(p[i]);
    g[i] = (t[i] != 0 ? -1.0 / pi : 1.0 / (1.0 - pi)) / normalizer;
  }
  return g;
}

std::vector<double> gradient_reversal(std::span<const double> upstream_grad, double alpha) {
  std::vector<double> g(upstream_grad.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = -alpha * upstream_grad[i];
  return g;
}

FeatureMap gradient_reversal_forward(const FeatureMap& x) {
  FeatureMap out(x.channels, x.length);
  out.values = x.values;
  return out;
}

void gradient_reversal_backward(const FeatureMap& upstream, double alpha,
                                FeatureMap& downstream) {
  check_shape(upstream.channels == downstream.channels && upstream.length == downstream.length,
              "gradient_reversal: shape mismatch");
  for (std::size_t i = 0; i < upstream.grad.size(); ++i)
    downstream.grad[i] += -alpha * upstream.grad[i];
}

void rmsprop_step(std::span<double> params, std::span<const double> grads, RmsPropState& state,
                  double lr, double rho, double eps) {
  check_shape(params.size() == grads.size(), "rmsprop_step: size mismatch");
  if (state.mean_sq.empty()) state.mean_sq.assign(params.size(), 0.0);
  check_shape(state.mean_sq.size() == params.size(), "rmsprop_step: state size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    double& v = state.mean_sq[i];
    v = rho * v + (1.0 - rho) * g * g;
    params[i] -= lr * g / (std::sqrt(v) + eps);
  }
}

namespace {

void init_normal(ConvLayer& layer, Rng& rng, double variance) {
  const double stddev = std::sqrt(variance);
  for (double& w : layer.kernel) w = rng.normal(0.0, stddev);
  std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
}

}  // namespace

void init_he(ConvLayer& layer, Rng& rng) {
  const double fan_in = static_cast<double>(layer.in_channels) * layer.kernel_size;
  init_normal(layer, rng, 2.0 / fan_in);
}

void init_xavier(ConvLayer& layer, Rng& rng) {
  const double fan_in = static_cast<double>(layer.in_channels) * layer.kernel_size;
  const double fan_out = static_cast<double>(layer.out_channels) * layer.kernel_size;
  init_normal(layer, rng, 2.0 / (fan_in + fan_out));
}

}  // namespace wavad
