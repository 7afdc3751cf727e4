#include "wavad/model.hpp"

#include <cmath>
#include <string>

#include <json.hpp>

#include "wavad/errors.hpp"

namespace wavad {

NetworkConfig NetworkConfig::for_sample_rate(int fs) {
  NetworkConfig cfg;
  cfg.fs = fs;
  if (fs <= 0 || fs % 100 != 0)
    throw ConfigError("sampling rate must be a positive multiple of 100 Hz, got " +
                      std::to_string(fs));
  cfg.fb_stride = fs / 100;
  cfg.fb_frame_len = 2 * cfg.fb_stride;
  return cfg;
}

void NetworkConfig::validate() const {
  if (fs <= 0 || fs % 100 != 0)
    throw ConfigError("fs must be a positive multiple of 100 Hz, got " + std::to_string(fs));
  if (fb_stride != fs / 100)
    throw ConfigError("fb_stride must be fs/100 (one output per 10 ms), got " +
                      std::to_string(fb_stride));
  if (fb_frame_len != 2 * fb_stride)
    throw ConfigError("fb_frame_len must be 2*fb_stride (50% frame overlap), got " +
                      std::to_string(fb_frame_len));
  for (int k : eb_kernels)
    if (k < 1) throw ConfigError("encoder kernel sizes must be positive");
  for (int c : eb_channels)
    if (c < 1) throw ConfigError("encoder channel widths must be positive");
  for (int k : db_kernels)
    if (k < 0) throw ConfigError("decoder kernel sizes must be nonnegative (0 omits the layer)");
  for (int k : dn_kernels)
    if (k < 1) throw ConfigError("discriminator kernel sizes must be positive");
  if (fb_channels < 1 || db_channels < 1 || dn_channels < 1)
    throw ConfigError("channel widths must be positive");
  if (alpha < 0.0) throw ConfigError("alpha must be nonnegative");
  if (n_noise_types < 1) throw ConfigError("n_noise_types must be at least 1");
}

std::string NetworkConfig::to_json() const {
  nlohmann::ordered_json j;
  j["fs"] = fs;
  j["eb_kernels"] = eb_kernels;
  j["eb_channels"] = eb_channels;
  j["fb_frame_len"] = fb_frame_len;
  j["fb_stride"] = fb_stride;
  j["fb_channels"] = fb_channels;
  j["db_kernels"] = db_kernels;
  j["db_channels"] = db_channels;
  j["dn_kernels"] = dn_kernels;
  j["dn_channels"] = dn_channels;
  j["alpha"] = alpha;
  j["n_noise_types"] = n_noise_types;
  return j.dump(2);
}

NetworkConfig NetworkConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad network config JSON: ") + e.what());
  }
  NetworkConfig cfg = for_sample_rate(j.value("fs", 8000));
  try {
    if (j.contains("eb_kernels")) j.at("eb_kernels").get_to(cfg.eb_kernels);
    if (j.contains("eb_channels")) j.at("eb_channels").get_to(cfg.eb_channels);
    if (j.contains("fb_frame_len")) cfg.fb_frame_len = j.at("fb_frame_len").get<int>();
    if (j.contains("fb_stride")) cfg.fb_stride = j.at("fb_stride").get<int>();
    if (j.contains("fb_channels")) cfg.fb_channels = j.at("fb_channels").get<int>();
    if (j.contains("db_kernels")) j.at("db_kernels").get_to(cfg.db_kernels);
    if (j.contains("db_channels")) cfg.db_channels = j.at("db_channels").get<int>();
    if (j.contains("dn_kernels")) j.at("dn_kernels").get_to(cfg.dn_kernels);
    if (j.contains("dn_channels")) cfg.dn_channels = j.at("dn_channels").get<int>();
    if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
    if (j.contains("n_noise_types")) cfg.n_noise_types = j.at("n_noise_types").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad network config JSON: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void ForwardTrace::zero_grad() {
  input.zero_grad();
  for (auto& m : eb_out) m.zero_grad();
  fb_out.zero_grad();
  dn_input.zero_grad();
  for (auto& m : db_out) m.zero_grad();
  for (auto& m : dn_out) m.zero_grad();
  vad_scores.zero_grad();
  noise_posteriors.zero_grad();
}

VadNetwork VadNetwork::build(const NetworkConfig& config) {
  config.validate();
  VadNetwork net;
  net.config = config;

  int ch = 1;
  for (int i = 0; i < 4; ++i) {
    net.eb.emplace_back(ch, config.eb_channels[i], config.eb_kernels[i], 1,
                        Activation::kLeakyRelu);
    ch = config.eb_channels[i];
  }
  net.fb = ConvLayer(ch, config.fb_channels, config.fb_frame_len, config.fb_stride,
                     Activation::kLeakyRelu);

  std::vector<int> db_ks;
  for (int k : config.db_kernels)
    if (k > 0) db_ks.push_back(k);
  // With every decoder layer omitted a kernel-1 head still maps the framing
  // features to the two output channels; it contributes no delay.
  if (db_ks.empty()) db_ks.push_back(1);
  ch = config.fb_channels;
  for (std::size_t i = 0; i < db_ks.size(); ++i) {
    const bool head = i + 1 == db_ks.size();
    net.db.emplace_back(ch, head ? 2 : config.db_channels, db_ks[i], 1,
                        head ? Activation::kSigmoid : Activation::kLeakyRelu);
    ch = head ? 2 : config.db_channels;
  }

  ch = config.fb_channels;
  for (std::size_t i = 0; i < config.dn_kernels.size(); ++i) {
    const bool head = i + 1 == config.dn_kernels.size();
    net.dn.emplace_back(ch, head ? config.n_noise_types + 1 : config.dn_channels,
                        config.dn_kernels[i], 1,
                        head ? Activation::kSoftmaxChannels : Activation::kLeakyRelu);
    ch = head ? config.n_noise_types + 1 : config.dn_channels;
  }
  return net;
}

void VadNetwork::initialize(std::uint64_t seed) {
  init_seed = seed;
  Rng rng(derive_seed(seed, "net-init"));
  auto init_layer = [&rng](ConvLayer& layer) {
    if (layer.activation == Activation::kLeakyRelu)
      init_he(layer, rng);
    else
      init_xavier(layer, rng);
  };
  for (auto& l : eb) init_layer(l);
  init_layer(fb);
  for (auto& l : db) init_layer(l);
  for (auto& l : dn) init_layer(l);
}

int VadNetwork::min_input_samples(bool with_dn) const {
  long eb_ctx = 0;
  for (const auto& l : eb) eb_ctx += l.kernel_size - 1;
  long db_shrink = 0;
  for (const auto& l : db) db_shrink += l.kernel_size - 1;
  long shrink = db_shrink;
  if (with_dn) {
    long dn_shrink = 0;
    for (const auto& l : dn) dn_shrink += l.kernel_size - 1;
    shrink = std::max(shrink, dn_shrink);
  }
  return static_cast<int>(eb_ctx + config.fb_frame_len + shrink * config.fb_stride);
}

int VadNetwork::frames_for_input(long n) const {
  const int min_n = min_input_samples();
  if (n < min_n)
    throw InsufficientContextError(
        "waveform of " + std::to_string(n) + " samples is shorter than the receptive field; " +
        std::to_string(min_n) + " samples are required for one output frame");
  long len = n;
  for (const auto& l : eb) len = l.output_length(static_cast<int>(len));
  len = fb.output_length(static_cast<int>(len));
  for (const auto& l : db) len = l.output_length(static_cast<int>(len));
  return static_cast<int>(len);
}

namespace {

FeatureMap slice_columns(const FeatureMap& m, int offset, int length) {
  FeatureMap out(m.channels, length);
  for (int c = 0; c < m.channels; ++c)
    for (int t = 0; t < length; ++t) out.value(c, t) = m.value(c, offset + t);
  return out;
}

}  // namespace

ForwardTrace VadNetwork::forward(std::span<const double> waveform, bool with_dn) const {
  const long n = static_cast<long>(waveform.size());
  const int min_n = min_input_samples(with_dn);
  if (n < min_n)
    throw InsufficientContextError(
        "waveform of " + std::to_string(n) + " samples is shorter than the receptive field; " +
        std::to_string(min_n) + " samples are required for one output frame");

  ForwardTrace trace;
  trace.input = FeatureMap::from_waveform(waveform);

  const FeatureMap* cur = &trace.input;
  for (const auto& l : eb) {
    trace.eb_out.push_back(conv1d_forward(l, *cur));
    cur = &trace.eb_out.back();
  }
  trace.fb_out = conv1d_forward(fb, *cur);

  cur = &trace.fb_out;
  for (const auto& l : db) {
    trace.db_out.push_back(conv1d_forward(l, *cur));
    cur = &trace.db_out.back();
  }

  trace.has_dn = with_dn;
  if (with_dn) {
    trace.dn_input = gradient_reversal_forward(trace.fb_out);
    cur = &trace.dn_input;
    for (const auto& l : dn) {
      trace.dn_out.push_back(conv1d_forward(l, *cur));
      cur = &trace.dn_out.back();
    }
    // The two stacks shrink by different amounts when their kernels differ;
    // both heads are centred on the same frames, trimmed like labels.
    const int t_db = trace.db_out.back().length;
    const int t_dn = trace.dn_out.back().length;
    const int frames = std::min(t_db, t_dn);
    trace.vad_offset = (t_db - frames) / 2;
    trace.noise_offset = (t_dn - frames) / 2;
    trace.vad_scores = slice_columns(trace.db_out.back(), trace.vad_offset, frames);
    trace.noise_posteriors = slice_columns(trace.dn_out.back(), trace.noise_offset, frames);
  } else {
    trace.vad_offset = 0;
    trace.vad_scores = trace.db_out.back();
  }
  return trace;
}

namespace {

// 2-way softmax over the head channels per frame; channel 1 is speech.
FeatureMap vad_posteriors(const FeatureMap& vad_scores) {
  FeatureMap p(2, vad_scores.length);
  for (int t = 0; t < vad_scores.length; ++t) {
    const double s0 = vad_scores.value(0, t);
    const double s1 = vad_scores.value(1, t);
    const double p1 = sigmoid(s1 - s0);
    p.value(0, t) = 1.0 - p1;
    p.value(1, t) = p1;
  }
  return p;
}

}  // namespace

MultitaskLosses VadNetwork::backward_multitask(ForwardTrace& trace,
                                               std::span<const int> vad_labels,
                                               std::span<const int> noise_labels, double alpha,
                                               double normalizer) {
  const int frames = trace.frames();
  if (static_cast<std::size_t>(frames) != vad_labels.size())
    throw DataError("vad label count " + std::to_string(vad_labels.size()) +
                    " does not match frame count " + std::to_string(frames));
  if (trace.has_dn && static_cast<std::size_t>(frames) != noise_labels.size())
    throw DataError("noise label count " + std::to_string(noise_labels.size()) +
                    " does not match frame count " + std::to_string(frames));
  const double norm = normalizer > 0.0 ? normalizer : static_cast<double>(frames);

  trace.zero_grad();

  MultitaskLosses losses;
  losses.frames = frames;

  // VAD branch: cross-entropy of the 2-way softmax over the head channels,
  // algebraically the binary cross-entropy of the speech posterior.
  const FeatureMap p_vad = vad_posteriors(trace.vad_scores);
  losses.vad_loss = cross_entropy(p_vad, vad_labels);
  FeatureMap& head = trace.db_out.back();
  for (int t = 0; t < frames; ++t) {
    const int cls = vad_labels[t];
    for (int c = 0; c < 2; ++c)
      head.gradient(c, trace.vad_offset + t) =
          (p_vad.value(c, t) - (c == cls ? 1.0 : 0.0)) / norm;
  }
  for (std::size_t i = db.size(); i-- > 0;) {
    FeatureMap& in = i == 0 ? trace.fb_out : trace.db_out[i - 1];
    conv1d_backward(db[i], in, trace.db_out[i]);
  }

  // Noise branch: updates the discriminator normally; the reversal node folds
  // -alpha times its input gradient into the framing output.
  if (trace.has_dn) {
    losses.noise_loss = cross_entropy(trace.noise_posteriors, noise_labels);
    const FeatureMap g = cross_entropy_grad(trace.noise_posteriors, noise_labels, norm);
    FeatureMap& dn_head = trace.dn_out.back();
    for (int t = 0; t < frames; ++t)
      for (int c = 0; c < dn_head.channels; ++c)
        dn_head.gradient(c, trace.noise_offset + t) = g.value(c, t);
    for (std::size_t i = dn.size(); i-- > 0;) {
      FeatureMap& in = i == 0 ? trace.dn_input : trace.dn_out[i - 1];
      conv1d_backward(dn[i], in, trace.dn_out[i]);
    }
    gradient_reversal_backward(trace.dn_input, alpha, trace.fb_out);
  }

  conv1d_backward(fb, trace.eb_out.back(), trace.fb_out);
  for (std::size_t i = eb.size(); i-- > 0;) {
    FeatureMap& in = i == 0 ? trace.input : trace.eb_out[i - 1];
    conv1d_backward(eb[i], in, trace.eb_out[i]);
  }
  return losses;
}

void VadNetwork::zero_grad() {
  for (auto& l : eb) l.zero_grad();
  fb.zero_grad();
  for (auto& l : db) l.zero_grad();
  for (auto& l : dn) l.zero_grad();
}

void VadNetwork::scale_grad(double factor) {
  for (auto& l : eb) l.scale_grad(factor);
  fb.scale_grad(factor);
  for (auto& l : db) l.scale_grad(factor);
  for (auto& l : dn) l.scale_grad(factor);
}

std::vector<VadNetwork::ParamRef> VadNetwork::parameters() {
  std::vector<ParamRef> refs;
  auto add = [&refs](const std::string& name, ConvLayer& l) {
    refs.push_back({name + ".kernel", &l.kernel, &l.kernel_grad});
    refs.push_back({name + ".bias", &l.bias, &l.bias_grad});
  };
  for (std::size_t i = 0; i < eb.size(); ++i) add("eb" + std::to_string(i + 1), eb[i]);
  add("fb", fb);
  for (std::size_t i = 0; i < db.size(); ++i) add("db" + std::to_string(i + 1), db[i]);
  for (std::size_t i = 0; i < dn.size(); ++i) add("dn" + std::to_string(i + 1), dn[i]);
  return refs;
}

std::vector<double> VadNetwork::score(std::span<const double> waveform) const {
  const ForwardTrace trace = forward(waveform, /*with_dn=*/false);
  return vad_decision(trace.vad_scores).scores;
}

VadDecision vad_decision(const FeatureMap& vad_scores) {
  if (vad_scores.channels != 2)
    throw ConfigError("vad_decision expects 2 channels, got " +
                      std::to_string(vad_scores.channels));
  VadDecision d;
  d.labels.resize(vad_scores.length);
  d.scores.resize(vad_scores.length);
  for (int t = 0; t < vad_scores.length; ++t) {
    const double s0 = vad_scores.value(0, t);
    const double s1 = vad_scores.value(1, t);
    d.scores[t] = sigmoid(s1 - s0);
    d.labels[t] = s1 > s0 ? 1 : 0;  // tie resolves to non-speech
  }
  return d;
}

std::vector<int> frame_label_alignment(int num_frames, std::span<const int> labels) {
  const long total = static_cast<long>(labels.size());
  if (num_frames > total)
    throw DataError("cannot align " + std::to_string(total) + " labels to " +
                    std::to_string(num_frames) + " frames");
  const long trim = total - num_frames;
  const long front = trim / 2;  // odd trims drop the extra frame from the end
  return std::vector<int>(labels.begin() + front, labels.begin() + front + num_frames);
}

}  // namespace wavad
