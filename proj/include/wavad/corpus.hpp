#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wavad/rng.hpp"

namespace wavad {

// One audio file with its per-10ms labels. noise_type 0 means clean; mixed
// files carry the constant noise-type id of what was added. snr_db is empty
// for clean files.
struct Utterance {
  std::vector<double> samples;
  int fs = 0;
  std::vector<int> vad_labels;  // one {0,1} per fs/100 samples
  int noise_type = 0;
  std::optional<double> snr_db;

  bool clean() const { return !snr_db.has_value(); }
  int frame_len() const { return fs / 100; }
  long expected_label_count() const { return static_cast<long>(samples.size()) / frame_len(); }
};

// Frame labelled speech iff at least half of its samples fall inside a word
// interval. Intervals are [start, end) sample ranges; overlaps are merged.
std::vector<int> labels_from_word_alignments(
    std::span<const std::pair<long, long>> word_intervals, long n_samples, int fs);

struct MixResult {
  Utterance mixed;
  std::vector<double> noise_component;  // gain-scaled noise actually added
  double gain = 0.0;
};

// Scales the noise so that 10*log10(P_speech / P_noise) == snr_db, with the
// speech power measured over speech-active frames by default (whole-file mode
// via active_speech_reference=false). snr_db empty means clean: gain 0.
// If the noise is longer than the speech it is cropped at a random offset
// (rng required); if shorter it is tiled first.
MixResult mix_at_snr(const Utterance& speech, std::span<const double> noise,
                     std::optional<double> snr_db, int noise_type,
                     bool active_speech_reference = true, Rng* rng = nullptr);

struct SpeechStructure {
  double speech_fraction = 0.75;  // target fraction of frames labelled speech
  double active_power = 0.01;     // mean power over speech-active frames
  int max_pauses = 2;
};

// Speech surrogate: harmonic series with a drifting pitch and 2-8 Hz
// amplitude modulation, padded with exact silence and optional interior
// pauses. Labels are known by construction. Deterministic per seed.
Utterance synth_utterance(std::uint64_t seed, double duration_s, int fs,
                          const SpeechStructure& structure = {});

// Available kinds: white, pink, hum, speech_shaped, bursty.
const std::vector<std::string>& default_noise_kinds();

// Unit-power noise, deterministic per (kind, seed). Unknown kind -> ConfigError.
std::vector<double> synth_noise(const std::string& kind, std::uint64_t seed, long n_samples,
                                int fs);

// Concatenates `count` files drawn seed-deterministically without replacement
// from a pool of same-cell files (same fs, noise_type and snr required).
Utterance concat_batch(std::span<const Utterance* const> pool, int count, Rng& rng);

// ---------------------------------------------------------------------------
// On-disk corpus

struct ManifestEntry {
  std::string wav_path;     // relative to the manifest's directory
  std::string label_path;
  std::string noise_kind;   // "clean" for unmixed files
  int noise_type = 0;
  std::optional<double> snr_db;
};

void write_manifest(const std::filesystem::path& path, std::span<const ManifestEntry> entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Label file: one line per 10 ms frame, "<frame_index> <vad 0|1> <noise_type>".
void write_labels(const std::filesystem::path& path, const Utterance& utt);
void read_labels(const std::filesystem::path& path, std::vector<int>& vad_labels,
                 int& noise_type);

Utterance load_utterance(const std::filesystem::path& manifest_dir, const ManifestEntry& entry);

struct CorpusParams {
  int fs = 8000;
  int files_per_train_cell = 50;
  int files_per_eval_cell = 10;
  std::vector<std::string> noise_kinds = {"white", "pink", "hum", "speech_shaped"};
  std::vector<double> train_snrs = {20, 15, 10, 5};
  std::vector<double> eval_snrs = {20, 15, 10, 5, 0, -5};
  double speech_fraction = 0.75;
  double min_duration_s = 0.8;
  double max_duration_s = 1.6;
  std::uint64_t seed = 1;
};

// Writes wav/, labels/ and manifest_{train,val,test}.csv under out_dir.
// Noise instances are seeded from disjoint per-split namespaces, so no noise
// instance repeats across splits. Train cells cover {clean} + train_snrs,
// val/test cells cover {clean} + eval_snrs.
void synth_corpus(const CorpusParams& params, const std::filesystem::path& out_dir);

// In-memory corpus grouped by (noise_type, snr) cell.
struct CellKey {
  int noise_type = 0;
  std::optional<double> snr_db;

  bool operator==(const CellKey&) const = default;
  bool operator<(const CellKey& o) const;
};

std::string cell_to_string(const CellKey& key);

struct LoadedCorpus {
  std::vector<Utterance> files;
  std::map<CellKey, std::vector<int>> cells;  // indices into files
  std::vector<std::string> noise_kind_names;  // by noise_type id (0 = clean)

  static LoadedCorpus load(const std::filesystem::path& manifest_path);
  std::vector<const Utterance*> cell_files(const CellKey& key) const;
};

}  // namespace wavad
