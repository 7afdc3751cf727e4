#include "wavad/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wavad/errors.hpp"
#include "wavad/wav.hpp"

namespace wavad {

namespace {

constexpr double kPi = 3.14159265358979323846;

double mean_power(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return x.empty() ? 0.0 : sum / static_cast<double>(x.size());
}

}  // namespace

std::vector<int> labels_from_word_alignments(
    std::span<const std::pair<long, long>> word_intervals, long n_samples, int fs) {
  if (fs <= 0 || fs % 100 != 0)
    throw ConfigError("labels_from_word_alignments: fs must be a multiple of 100");
  const long frame = fs / 100;
  const long n_frames = n_samples / frame;

  // Merge overlapping intervals.
  std::vector<std::pair<long, long>> merged(word_intervals.begin(), word_intervals.end());
  std::sort(merged.begin(), merged.end());
  std::vector<std::pair<long, long>> spans;
  for (const auto& [s, e] : merged) {
    if (s < 0 || e > n_samples || s > e)
      throw DataError("word interval [" + std::to_string(s) + ", " + std::to_string(e) +
                      ") out of file bounds");
    if (!spans.empty() && s <= spans.back().second)
      spans.back().second = std::max(spans.back().second, e);
    else
      spans.emplace_back(s, e);
  }

  std::vector<int> labels(n_frames, 0);
  std::size_t cursor = 0;
  for (long f = 0; f < n_frames; ++f) {
    const long fs0 = f * frame;
    const long fe0 = fs0 + frame;
    while (cursor < spans.size() && spans[cursor].second <= fs0) ++cursor;
    long covered = 0;
    for (std::size_t i = cursor; i < spans.size() && spans[i].first < fe0; ++i)
      covered += std::max(0L, std::min(fe0, spans[i].second) - std::max(fs0, spans[i].first));
    // speech iff at least half the frame's samples are inside a word
    labels[f] = (2 * covered >= frame) ? 1 : 0;
  }
  return labels;
}

MixResult mix_at_snr(const Utterance& speech, std::span<const double> noise,
                     std::optional<double> snr_db, int noise_type,
                     bool active_speech_reference, Rng* rng) {
  MixResult result;
  result.mixed = speech;
  if (!snr_db.has_value()) {
    result.mixed.noise_type = 0;
    result.mixed.snr_db.reset();
    result.gain = 0.0;
    return result;
  }

  const std::size_t n = speech.samples.size();
  if (noise.empty()) throw DataError("mix_at_snr: empty noise");

  // Tile short noise, then crop long noise at a random offset.
  std::vector<double> segment;
  segment.reserve(n);
  if (noise.size() < n) {
    while (segment.size() < n)
      for (std::size_t i = 0; i < noise.size() && segment.size() < n; ++i)
        segment.push_back(noise[i]);
  } else {
    std::size_t offset = 0;
    if (noise.size() > n && rng != nullptr)
      offset = static_cast<std::size_t>(rng->below(noise.size() - n + 1));
    segment.assign(noise.begin() + offset, noise.begin() + offset + n);
  }

  double p_speech = 0.0;
  if (active_speech_reference) {
    const long frame = speech.frame_len();
    double sum = 0.0;
    long count = 0;
    for (std::size_t f = 0; f < speech.vad_labels.size(); ++f) {
      if (speech.vad_labels[f] == 0) continue;
      const long s = static_cast<long>(f) * frame;
      for (long i = s; i < s + frame && i < static_cast<long>(n); ++i)
        sum += speech.samples[i] * speech.samples[i];
      count += frame;
    }
    if (count == 0 || sum == 0.0)
      throw UndefinedMetricError(
          "mix_at_snr: speech-active region is silent; the requested SNR is undefined");
    p_speech = sum / static_cast<double>(count);
  } else {
    p_speech = mean_power(speech.samples);
    if (p_speech == 0.0)
      throw UndefinedMetricError("mix_at_snr: speech file is silent; SNR undefined");
  }

  const double p_noise = mean_power(segment);
  if (p_noise == 0.0) throw DataError("mix_at_snr: noise segment has zero power");

  const double gain = std::sqrt(p_speech / (p_noise * std::pow(10.0, *snr_db / 10.0)));
  for (std::size_t i = 0; i < n; ++i) {
    segment[i] *= gain;
    result.mixed.samples[i] = speech.samples[i] + segment[i];
  }
  result.mixed.noise_type = noise_type;
  result.mixed.snr_db = snr_db;
  result.noise_component = std::move(segment);
  result.gain = gain;
  return result;
}

// ---------------------------------------------------------------------------
// Synthetic speech surrogate

Utterance synth_utterance(std::uint64_t seed, double duration_s, int fs,
                          const SpeechStructure& structure) {
  if (duration_s < 0.5) throw ConfigError("synth_utterance: duration must be at least 0.5 s");
  if (fs <= 0 || fs % 100 != 0)
    throw ConfigError("synth_utterance: fs must be a positive multiple of 100");

  Rng rng(derive_seed(seed, "utterance"));
  const long frame = fs / 100;
  const long n = std::lround(duration_s * fs / frame) * frame;

  Utterance utt;
  utt.fs = fs;
  utt.samples.assign(n, 0.0);

  const double fraction = std::clamp(structure.speech_fraction, 0.0, 0.95);
  if (fraction <= 0.0) {
    utt.vad_labels.assign(n / frame, 0);
    return utt;
  }

  // Segment plan: lead silence, speech chunks separated by pauses, tail
  // silence. Budgets split by random weights.
  const long speech_budget = std::lround(fraction * n);
  const long silence_budget = n - speech_budget;
  const int n_pauses = static_cast<int>(rng.below(structure.max_pauses + 1));
  const int n_silence_slots = n_pauses + 2;
  const int n_speech_slots = n_pauses + 1;

  auto split_budget = [&rng](long budget, int slots, double spread) {
    std::vector<double> w(slots);
    double total = 0.0;
    for (double& v : w) {
      v = 1.0 + spread * (rng.uniform() - 0.5);
      total += v;
    }
    std::vector<long> out(slots);
    long used = 0;
    for (int i = 0; i < slots - 1; ++i) {
      out[i] = std::lround(budget * w[i] / total);
      used += out[i];
    }
    out[slots - 1] = budget - used;
    return out;
  };
  const std::vector<long> silence = split_budget(silence_budget, n_silence_slots, 0.9);
  const std::vector<long> speech = split_budget(speech_budget, n_speech_slots, 0.6);

  std::vector<std::pair<long, long>> intervals;
  long pos = silence[0];
  for (int i = 0; i < n_speech_slots; ++i) {
    const long len = std::max(speech[i], frame);
    const long end = std::min(pos + len, n);
    if (end > pos) intervals.emplace_back(pos, end);
    pos = end + silence[i + 1];
  }

  // Harmonic series with drifting pitch, syllabic amplitude modulation and a
  // little aspiration noise; edges are tapered to avoid clicks.
  for (const auto& [s, e] : intervals) {
    const double f0_base = rng.uniform(110.0, 220.0);
    const double drift_rate = rng.uniform(0.4, 2.0);
    const double drift_depth = rng.uniform(0.02, 0.08);
    const double drift_phase = rng.uniform(0.0, 2.0 * kPi);
    const double am_rate = rng.uniform(2.0, 8.0);  // syllabic range
    const double am_phase = rng.uniform(0.0, 2.0 * kPi);
    const int max_harmonics =
        std::max(1, static_cast<int>(0.4 * fs / (f0_base * (1.0 + drift_depth))));
    const int n_harmonics = std::min(8, max_harmonics);
    std::vector<double> amp(n_harmonics);
    for (int h = 0; h < n_harmonics; ++h)
      amp[h] = (1.0 / (h + 1)) * std::exp(-(h + 1) * f0_base / 2500.0) *
               (1.0 + 0.3 * (rng.uniform() - 0.5));
    const long taper = std::min<long>(fs / 100, (e - s) / 4);

    double phase = rng.uniform(0.0, 2.0 * kPi);
    for (long i = s; i < e; ++i) {
      const double t = static_cast<double>(i - s) / fs;
      const double f0 =
          f0_base * (1.0 + drift_depth * std::sin(2.0 * kPi * drift_rate * t + drift_phase));
      phase += 2.0 * kPi * f0 / fs;
      double v = 0.0;
      for (int h = 0; h < n_harmonics; ++h) v += amp[h] * std::sin((h + 1) * phase);
      const double am =
          0.25 + 0.75 * std::pow(0.5 + 0.5 * std::sin(2.0 * kPi * am_rate * t + am_phase), 1.6);
      v = v * am + 0.03 * rng.normal();
      long edge = std::min(i - s, e - 1 - i);
      if (taper > 0 && edge < taper)
        v *= 0.5 - 0.5 * std::cos(kPi * static_cast<double>(edge) / taper);
      utt.samples[i] = v;
    }
  }

  utt.vad_labels = labels_from_word_alignments(intervals, n, fs);

  // Normalize so the mean power over speech-active frames hits the target.
  double active_sum = 0.0;
  long active_count = 0;
  for (std::size_t f = 0; f < utt.vad_labels.size(); ++f) {
    if (utt.vad_labels[f] == 0) continue;
    const long s = static_cast<long>(f) * frame;
    for (long i = s; i < s + frame; ++i) active_sum += utt.samples[i] * utt.samples[i];
    active_count += frame;
  }
  if (active_count > 0 && active_sum > 0.0) {
    const double scale = std::sqrt(structure.active_power * active_count / active_sum);
    for (double& v : utt.samples) v *= scale;
  }
  return utt;
}

// ---------------------------------------------------------------------------
// Noise bank

const std::vector<std::string>& default_noise_kinds() {
  static const std::vector<std::string> kinds = {"white", "pink", "hum", "speech_shaped",
                                                 "bursty"};
  return kinds;
}

namespace {

void normalize_rms(std::vector<double>& x) {
  const double p = mean_power(x);
  if (p <= 0.0) return;
  const double scale = 1.0 / std::sqrt(p);
  for (double& v : x) v *= scale;
}

std::vector<double> white_noise(Rng& rng, long n) {
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal();
  return x;
}

// Paul Kellet's 1/f pinking filter; ~-3 dB/octave across the audio band.
std::vector<double> pink_noise(Rng& rng, long n) {
  std::vector<double> x(n);
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
  const long warmup = 2000;
  for (long i = -warmup; i < n; ++i) {
    const double w = rng.normal();
    b0 = 0.99886 * b0 + w * 0.0555179;
    b1 = 0.99332 * b1 + w * 0.0750759;
    b2 = 0.96900 * b2 + w * 0.1538520;
    b3 = 0.86650 * b3 + w * 0.3104856;
    b4 = 0.55000 * b4 + w * 0.5329522;
    b5 = -0.7616 * b5 - w * 0.0168980;
    const double v = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
    b6 = w * 0.115926;
    if (i >= 0) x[i] = v;
  }
  normalize_rms(x);
  return x;
}

std::vector<double> hum_noise(Rng& rng, long n, int fs) {
  std::vector<double> x(n, 0.0);
  const double f0 = 50.0;
  const int n_harm = std::max(1, std::min(8, static_cast<int>(0.45 * fs / f0)));
  std::vector<double> phase(n_harm), amp(n_harm);
  for (int h = 0; h < n_harm; ++h) {
    phase[h] = rng.uniform(0.0, 2.0 * kPi);
    amp[h] = 1.0 / (h + 1) * (1.0 + 0.2 * (rng.uniform() - 0.5));
  }
  const double wobble_rate = rng.uniform(0.1, 0.5);
  const double wobble_phase = rng.uniform(0.0, 2.0 * kPi);
  for (long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    double v = 0.0;
    for (int h = 0; h < n_harm; ++h)
      v += amp[h] * std::sin(2.0 * kPi * f0 * (h + 1) * t + phase[h]);
    v *= 1.0 + 0.15 * std::sin(2.0 * kPi * wobble_rate * t + wobble_phase);
    x[i] = v + 0.1 * rng.normal();
  }
  normalize_rms(x);
  return x;
}

// White noise through two one-pole lowpasses at ~600 Hz: a crude long-term
// speech spectrum stand-in.
std::vector<double> speech_shaped_noise(Rng& rng, long n, int fs) {
  std::vector<double> x(n);
  const double a = std::exp(-2.0 * kPi * 600.0 / fs);
  double y1 = 0.0, y2 = 0.0;
  const long warmup = 500;
  for (long i = -warmup; i < n; ++i) {
    const double w = rng.normal();
    y1 = a * y1 + (1.0 - a) * w;
    y2 = a * y2 + (1.0 - a) * y1;
    if (i >= 0) x[i] = y2;
  }
  normalize_rms(x);
  return x;
}

std::vector<double> bursty_noise(Rng& rng, long n, int fs) {
  std::vector<double> x(n);
  const long ramp = fs / 200;  // 5 ms
  long i = 0;
  bool on = rng.uniform() < 0.5;
  while (i < n) {
    const double dur_s = on ? rng.uniform(0.05, 0.4) : rng.uniform(0.1, 0.6);
    const long len = std::max<long>(1, std::lround(dur_s * fs));
    for (long j = 0; j < len && i < n; ++j, ++i) {
      double env = on ? 1.0 : 0.05;
      if (on && ramp > 0) {
        const long edge = std::min(j, len - 1 - j);
        if (edge < ramp) env *= 0.5 - 0.5 * std::cos(kPi * static_cast<double>(edge) / ramp);
      }
      x[i] = env * rng.normal();
    }
    on = !on;
  }
  normalize_rms(x);
  return x;
}

int noise_kind_index(const std::string& kind) {
  const auto& kinds = default_noise_kinds();
  for (std::size_t i = 0; i < kinds.size(); ++i)
    if (kinds[i] == kind) return static_cast<int>(i);
  throw ConfigError("unknown noise kind '" + kind + "'");
}

}  // namespace

std::vector<double> synth_noise(const std::string& kind, std::uint64_t seed, long n_samples,
                                int fs) {
  if (n_samples < 0) throw ConfigError("synth_noise: negative length");
  const int idx = noise_kind_index(kind);
  Rng rng(derive_seed(seed, "noise", static_cast<std::uint64_t>(idx)));
  switch (idx) {
    case 0: return white_noise(rng, n_samples);
    case 1: return pink_noise(rng, n_samples);
    case 2: return hum_noise(rng, n_samples, fs);
    case 3: return speech_shaped_noise(rng, n_samples, fs);
    default: return bursty_noise(rng, n_samples, fs);
  }
}

Utterance concat_batch(std::span<const Utterance* const> pool, int count, Rng& rng) {
  if (count < 1) throw ConfigError("concat_batch: count must be positive");
  if (static_cast<int>(pool.size()) < count)
    throw DataError("concat_batch: pool of " + std::to_string(pool.size()) +
                    " files cannot supply " + std::to_string(count));
  const auto idx = rng.sample_without_replacement(pool.size(), static_cast<std::size_t>(count));

  const Utterance& first = *pool[idx[0]];
  Utterance out;
  out.fs = first.fs;
  out.noise_type = first.noise_type;
  out.snr_db = first.snr_db;
  for (std::size_t i : idx) {
    const Utterance& u = *pool[i];
    if (u.fs != out.fs || u.noise_type != out.noise_type || u.snr_db != out.snr_db)
      throw DataError("concat_batch: pool mixes different (fs, noise_type, snr) cells");
    out.samples.insert(out.samples.end(), u.samples.begin(), u.samples.end());
    out.vad_labels.insert(out.vad_labels.end(), u.vad_labels.begin(), u.vad_labels.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// On-disk corpus

namespace {

std::string snr_to_string(const std::optional<double>& snr) {
  if (!snr.has_value()) return "clean";
  std::ostringstream os;
  os.precision(10);
  os << *snr;
  return os.str();
}

std::optional<double> snr_from_string(const std::string& s) {
  if (s == "clean") return std::nullopt;
  try {
    return std::stod(s);
  } catch (const std::exception&) {
    throw FormatError("bad snr field '" + s + "' in manifest");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot create manifest: " + path.string());
  os << "wav,labels,noise_kind,noise_type,snr_db\n";
  for (const auto& e : entries) {
    os << e.wav_path << ',' << e.label_path << ',' << e.noise_kind << ',' << e.noise_type << ','
       << snr_to_string(e.snr_db) << '\n';
  }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open manifest: " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty manifest: " + path.string());
  std::vector<ManifestEntry> entries;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5)
      throw FormatError("manifest line with " + std::to_string(f.size()) +
                        " fields (want 5): " + line);
    ManifestEntry e;
    e.wav_path = f[0];
    e.label_path = f[1];
    e.noise_kind = f[2];
    e.noise_type = std::stoi(f[3]);
    e.snr_db = snr_from_string(f[4]);
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_labels(const std::filesystem::path& path, const Utterance& utt) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot create label file: " + path.string());
  for (std::size_t i = 0; i < utt.vad_labels.size(); ++i)
    os << i << ' ' << utt.vad_labels[i] << ' ' << utt.noise_type << '\n';
}

void read_labels(const std::filesystem::path& path, std::vector<int>& vad_labels,
                 int& noise_type) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open label file: " + path.string());
  vad_labels.clear();
  noise_type = 0;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    long idx;
    int vad, nt;
    if (!(ls >> idx >> vad >> nt))
      throw FormatError("bad label line in " + path.string() + ": " + line);
    if (idx != static_cast<long>(vad_labels.size()))
      throw FormatError("non-contiguous frame index in " + path.string());
    if (vad != 0 && vad != 1) throw FormatError("vad label must be 0 or 1 in " + path.string());
    if (first)
      noise_type = nt;
    else if (nt != noise_type)
      throw FormatError("noise type varies within " + path.string());
    first = false;
    vad_labels.push_back(vad);
  }
}

Utterance load_utterance(const std::filesystem::path& manifest_dir, const ManifestEntry& entry) {
  const WavData wav = load_wav(manifest_dir / entry.wav_path);
  Utterance utt;
  utt.samples = std::move(wav.samples);
  utt.fs = wav.fs;
  int label_noise_type = 0;
  read_labels(manifest_dir / entry.label_path, utt.vad_labels, label_noise_type);
  if (label_noise_type != entry.noise_type)
    throw DataError("label file and manifest disagree on noise type for " + entry.wav_path);
  utt.noise_type = entry.noise_type;
  utt.snr_db = entry.snr_db;
  if (static_cast<long>(utt.vad_labels.size()) != utt.expected_label_count())
    throw DataError("label count " + std::to_string(utt.vad_labels.size()) +
                    " does not match frame count " + std::to_string(utt.expected_label_count()) +
                    " for " + entry.wav_path);
  return utt;
}

namespace {

struct SplitPlan {
  std::string name;
  int files_per_cell;
  std::vector<std::optional<double>> snrs;  // includes the clean cell as nullopt
};

}  // namespace

void synth_corpus(const CorpusParams& params, const std::filesystem::path& out_dir) {
  if (params.fs <= 0 || params.fs % 100 != 0)
    throw ConfigError("synth_corpus: fs must be a positive multiple of 100");
  for (const auto& kind : params.noise_kinds) noise_kind_index(kind);  // validates

  std::filesystem::create_directories(out_dir / "wav");
  std::filesystem::create_directories(out_dir / "labels");

  std::vector<SplitPlan> plans;
  auto snr_list = [](const std::vector<double>& snrs) {
    std::vector<std::optional<double>> out;
    out.emplace_back(std::nullopt);  // clean cell
    for (double s : snrs) out.emplace_back(s);
    return out;
  };
  plans.push_back({"train", params.files_per_train_cell, snr_list(params.train_snrs)});
  plans.push_back({"val", params.files_per_eval_cell, snr_list(params.eval_snrs)});
  plans.push_back({"test", params.files_per_eval_cell, snr_list(params.eval_snrs)});

  const SpeechStructure structure{params.speech_fraction, 0.01, 2};

  for (const auto& plan : plans) {
    std::vector<ManifestEntry> manifest;
    std::uint64_t noise_counter = 0;
    for (const auto& snr : plan.snrs) {
      // clean cell once; one cell per noise kind otherwise
      const int n_kinds = snr.has_value() ? static_cast<int>(params.noise_kinds.size()) : 1;
      for (int kind_i = 0; kind_i < n_kinds; ++kind_i) {
        const std::string kind = snr.has_value() ? params.noise_kinds[kind_i] : "clean";
        const int noise_type = snr.has_value() ? kind_i + 1 : 0;
        for (int file_i = 0; file_i < plan.files_per_cell; ++file_i) {
          const std::uint64_t cell_tag =
              (static_cast<std::uint64_t>(kind_i) << 32) ^
              static_cast<std::uint64_t>(snr.has_value() ? std::lround(*snr * 100) + 100000 : 0);
          Rng file_rng(derive_seed(params.seed, "file-" + plan.name, cell_tag,
                                   static_cast<std::uint64_t>(file_i)));
          const double dur = file_rng.uniform(params.min_duration_s, params.max_duration_s);
          Utterance utt =
              synth_utterance(file_rng.next_u64(), dur, params.fs, structure);

          if (snr.has_value()) {
            // Fresh noise instance per file; the split tag keeps train and
            // test instances disjoint.
            const std::uint64_t noise_seed =
                derive_seed(params.seed, "noise-instance-" + plan.name,
                            static_cast<std::uint64_t>(kind_i), noise_counter++);
            const std::vector<double> noise =
                synth_noise(kind, noise_seed, static_cast<long>(utt.samples.size()), params.fs);
            utt = mix_at_snr(utt, noise, snr, noise_type).mixed;
            // keep the mix inside the PCM range; a common scale leaves the SNR
            // untouched
            double peak = 0.0;
            for (double v : utt.samples) peak = std::max(peak, std::abs(v));
            if (peak > 0.999)
              for (double& v : utt.samples) v *= 0.999 / peak;
          }

          std::ostringstream name;
          name << plan.name << '_' << kind;
          if (snr.has_value()) name << "_snr" << snr_to_string(snr);
          name << '_' << file_i;
          const std::string wav_rel = "wav/" + name.str() + ".wav";
          const std::string lab_rel = "labels/" + name.str() + ".txt";
          save_wav(out_dir / wav_rel, utt.samples, params.fs);
          write_labels(out_dir / lab_rel, utt);
          manifest.push_back({wav_rel, lab_rel, kind, noise_type, snr});
        }
      }
    }
    write_manifest(out_dir / ("manifest_" + plan.name + ".csv"), manifest);
  }
}

bool CellKey::operator<(const CellKey& o) const {
  if (noise_type != o.noise_type) return noise_type < o.noise_type;
  if (snr_db.has_value() != o.snr_db.has_value()) return !snr_db.has_value();  // clean first
  if (!snr_db.has_value()) return false;
  return *snr_db > *o.snr_db;  // higher SNR first
}

std::string cell_to_string(const CellKey& key) {
  if (!key.snr_db.has_value()) return "clean";
  std::ostringstream os;
  os << "noise" << key.noise_type << '@' << snr_to_string(key.snr_db) << "dB";
  return os.str();
}

LoadedCorpus LoadedCorpus::load(const std::filesystem::path& manifest_path) {
  const auto entries = read_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  LoadedCorpus corpus;
  corpus.noise_kind_names = {"clean"};
  for (const auto& e : entries) {
    const int idx = static_cast<int>(corpus.files.size());
    corpus.files.push_back(load_utterance(dir, e));
    if (e.noise_type >= static_cast<int>(corpus.noise_kind_names.size()))
      corpus.noise_kind_names.resize(e.noise_type + 1);
    if (e.noise_type > 0) corpus.noise_kind_names[e.noise_type] = e.noise_kind;
    corpus.cells[CellKey{e.noise_type, e.snr_db}].push_back(idx);
  }
  return corpus;
}

std::vector<const Utterance*> LoadedCorpus::cell_files(const CellKey& key) const {
  std::vector<const Utterance*> out;
  const auto it = cells.find(key);
  if (it == cells.end()) return out;
  out.reserve(it->second.size());
  for (int i : it->second) out.push_back(&files[i]);
  return out;
}

}  // namespace wavad
