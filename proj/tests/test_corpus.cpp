#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "testutil.hpp"
#include "wavad/corpus.hpp"
#include "wavad/errors.hpp"
#include "wavad/wav.hpp"

using namespace wavad;

namespace {

double measured_snr_db(const Utterance& speech, std::span<const double> noise_component) {
  const long frame = speech.frame_len();
  double p_speech = 0.0;
  long active = 0;
  for (std::size_t f = 0; f < speech.vad_labels.size(); ++f) {
    if (speech.vad_labels[f] == 0) continue;
    for (long i = static_cast<long>(f) * frame; i < static_cast<long>(f + 1) * frame; ++i)
      p_speech += speech.samples[i] * speech.samples[i];
    active += frame;
  }
  p_speech /= static_cast<double>(active);
  double p_noise = 0.0;
  for (double v : noise_component) p_noise += v * v;
  p_noise /= static_cast<double>(noise_component.size());
  return 10.0 * std::log10(p_speech / p_noise);
}

}  // namespace

TEST_CASE("labels_from_word_alignments: majority rule") {
  // one interval covering the whole file -> every frame speech
  const std::pair<long, long> whole[] = {{0, 800}};
  std::vector<int> all = labels_from_word_alignments(whole, 800, 8000);
  REQUIRE(all.size() == 10);
  for (int l : all) CHECK(l == 1);

  // no intervals -> all zero
  const std::vector<int> none = labels_from_word_alignments({}, 800, 8000);
  for (int l : none) CHECK(l == 0);

  // exactly half of frame 0 covered -> labelled speech under the >=50% rule
  const std::pair<long, long> half[] = {{0, 40}};
  CHECK(labels_from_word_alignments(half, 800, 8000)[0] == 1);
  // one sample less than half -> non-speech
  const std::pair<long, long> less[] = {{0, 39}};
  CHECK(labels_from_word_alignments(less, 800, 8000)[0] == 0);

  // overlapping intervals merge silently
  const std::pair<long, long> overlap[] = {{0, 100}, {50, 200}, {150, 240}};
  const std::vector<int> merged = labels_from_word_alignments(overlap, 800, 8000);
  CHECK(merged[0] == 1);
  CHECK(merged[1] == 1);
  CHECK(merged[2] == 1);
  CHECK(merged[3] == 0);

  const std::pair<long, long> outside[] = {{700, 900}};
  CHECK_THROWS_AS(labels_from_word_alignments(outside, 800, 8000), DataError);
}

TEST_CASE("synth_utterance: deterministic, labelled, power-calibrated") {
  const Utterance a = synth_utterance(123, 1.0, 8000);
  const Utterance b = synth_utterance(123, 1.0, 8000);
  CHECK(a.samples == b.samples);
  CHECK(a.vad_labels == b.vad_labels);
  CHECK(a.samples.size() == 8000);
  CHECK(static_cast<long>(a.vad_labels.size()) == a.expected_label_count());
  CHECK(a.clean());

  const Utterance c = synth_utterance(124, 1.0, 8000);
  CHECK(a.samples != c.samples);

  // speech-active power hits the configured target
  SpeechStructure structure;
  structure.active_power = 0.02;
  const Utterance d = synth_utterance(5, 1.2, 8000, structure);
  const long frame = d.frame_len();
  double p = 0.0;
  long n = 0;
  for (std::size_t f = 0; f < d.vad_labels.size(); ++f) {
    if (d.vad_labels[f] == 0) continue;
    for (long i = static_cast<long>(f) * frame; i < static_cast<long>(f + 1) * frame; ++i)
      p += d.samples[i] * d.samples[i];
    n += frame;
  }
  CHECK(p / n == doctest::Approx(0.02).epsilon(1e-6));

  CHECK_THROWS_AS(synth_utterance(1, 0.3, 8000), ConfigError);
}

TEST_CASE("synth_utterance: zero speech fraction gives exact silence") {
  SpeechStructure structure;
  structure.speech_fraction = 0.0;
  const Utterance u = synth_utterance(9, 1.0, 8000, structure);
  for (double v : u.samples) CHECK(v == 0.0);
  for (int l : u.vad_labels) CHECK(l == 0);
}

TEST_CASE("synth_utterance: label prior is tunable") {
  for (double target : {0.73, 0.85}) {
    SpeechStructure structure;
    structure.speech_fraction = target;
    long speech = 0, total = 0;
    for (int i = 0; i < 1000; ++i) {
      const Utterance u =
          synth_utterance(derive_seed(42, "prior", i), 0.8 + 0.4 * (i % 5) / 5.0, 2000,
                          structure);
      for (int l : u.vad_labels) speech += l;
      total += static_cast<long>(u.vad_labels.size());
    }
    const double fraction = static_cast<double>(speech) / static_cast<double>(total);
    CHECK(fraction == doctest::Approx(target).epsilon(0.03));
  }
}

TEST_CASE("synth_noise: determinism and statistics") {
  // identical samples for the same (kind, seed)
  for (const std::string& kind : default_noise_kinds()) {
    const std::vector<double> x = synth_noise(kind, 7, 4000, 8000);
    const std::vector<double> y = synth_noise(kind, 7, 4000, 8000);
    CHECK(x == y);
    const std::vector<double> z = synth_noise(kind, 8, 4000, 8000);
    CHECK(x != z);
  }
  CHECK_THROWS_AS(synth_noise("thunder", 1, 100, 8000), ConfigError);

  // white noise sample variance within 2% of unit power at 10 s
  const std::vector<double> white = synth_noise("white", 3, 80000, 8000);
  double var = 0.0;
  for (double v : white) var += v * v;
  var /= static_cast<double>(white.size());
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));

  // pink noise spectral slope near -3 dB/octave over 100-3000 Hz
  const std::vector<double> pink = synth_noise("pink", 11, 80000, 8000);
  const double slope = testutil::spectral_slope_db_per_octave(pink, 8000, 100.0, 3000.0);
  CHECK(slope == doctest::Approx(-3.0).epsilon(0.2));
}

TEST_CASE("mix_at_snr: gain algebra") {
  // unit-power speech (all frames active) and unit-power noise at 0 dB -> g=1
  Utterance speech;
  speech.fs = 8000;
  speech.samples.assign(800, 0.0);
  for (std::size_t i = 0; i < speech.samples.size(); ++i)
    speech.samples[i] = (i % 2 == 0) ? 1.0 : -1.0;
  speech.vad_labels.assign(10, 1);

  std::vector<double> noise(800);
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = (i % 2 == 0) ? -1.0 : 1.0;

  const MixResult at0 = mix_at_snr(speech, noise, 0.0, 1);
  CHECK(at0.gain == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(at0.mixed.noise_type == 1);
  CHECK(at0.mixed.snr_db == 0.0);

  // P_s = 1, P_n = 4, snr -5 dB -> g = sqrt(10^0.5 / 4)
  for (double& v : noise) v *= 2.0;
  const MixResult atm5 = mix_at_snr(speech, noise, -5.0, 2);
  CHECK(atm5.gain == doctest::Approx(std::sqrt(std::pow(10.0, 0.5) / 4.0)).epsilon(1e-12));

  // clean convention: identity, zero gain
  const MixResult clean = mix_at_snr(speech, noise, std::nullopt, 3);
  CHECK(clean.gain == 0.0);
  CHECK(clean.mixed.samples == speech.samples);
  CHECK(clean.mixed.clean());

  // silent speech-active region: SNR undefined
  Utterance silent = speech;
  std::fill(silent.samples.begin(), silent.samples.end(), 0.0);
  CHECK_THROWS_AS(mix_at_snr(silent, noise, 0.0, 1), UndefinedMetricError);
}

TEST_CASE("mix_at_snr: requested SNR is recovered from the stored parts") {
  for (double snr : {-5.0, 0.0, 5.0, 10.0, 15.0, 20.0}) {
    for (const std::string& kind : {"white", "pink", "hum"}) {
      const Utterance speech = synth_utterance(derive_seed(1, kind, std::lround(snr)), 1.0, 8000);
      const std::vector<double> noise =
          synth_noise(kind, derive_seed(2, kind, std::lround(snr)), 8000, 8000);
      const MixResult mix = mix_at_snr(speech, noise, snr, 1);
      CHECK(measured_snr_db(speech, mix.noise_component) == doctest::Approx(snr).epsilon(1e-9));
      // mixed = speech + scaled noise, exactly
      for (std::size_t i = 0; i < speech.samples.size(); ++i)
        CHECK(mix.mixed.samples[i] == speech.samples[i] + mix.noise_component[i]);
    }
  }
}

TEST_CASE("mix_at_snr: short noise tiles, long noise crops") {
  Utterance speech = synth_utterance(3, 1.0, 8000);
  const std::vector<double> short_noise = synth_noise("white", 5, 3000, 8000);
  const MixResult tiled = mix_at_snr(speech, short_noise, 10.0, 1);
  CHECK(tiled.mixed.samples.size() == speech.samples.size());

  Rng rng(17);
  const std::vector<double> long_noise = synth_noise("white", 6, 20000, 8000);
  const MixResult cropped = mix_at_snr(speech, long_noise, 10.0, 1, true, &rng);
  CHECK(cropped.mixed.samples.size() == speech.samples.size());
}

TEST_CASE("concat_batch: additivity and draw rules") {
  std::vector<Utterance> pool;
  for (int i = 0; i < 12; ++i) {
    Utterance u = synth_utterance(derive_seed(10, "pool", i), 1.0, 8000);
    u.noise_type = 2;
    u.snr_db = 5.0;
    pool.push_back(std::move(u));
  }
  std::vector<const Utterance*> ptrs;
  for (const auto& u : pool) ptrs.push_back(&u);

  Rng rng(1);
  const Utterance batch = concat_batch(ptrs, 10, rng);
  CHECK(batch.samples.size() == 10 * 8000);
  CHECK(batch.vad_labels.size() == 1000);
  CHECK(batch.noise_type == 2);
  CHECK(batch.snr_db == 5.0);

  // the label vector is exactly the concatenation of the drawn files
  Rng rng2(1);
  const auto idx = rng2.sample_without_replacement(ptrs.size(), 10);
  std::vector<int> expected;
  for (std::size_t i : idx)
    expected.insert(expected.end(), pool[i].vad_labels.begin(), pool[i].vad_labels.end());
  CHECK(batch.vad_labels == expected);
  // no index repeats within one draw
  std::vector<std::size_t> sorted(idx.begin(), idx.end());
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());

  // count = 1 is the identity on some pool file
  Rng rng3(2);
  const Utterance one = concat_batch(ptrs, 1, rng3);
  bool matches_any = false;
  for (const auto& u : pool) matches_any |= (one.samples == u.samples);
  CHECK(matches_any);

  // concatenation preserves the total speech fraction of its parts
  long speech = 0;
  for (std::size_t i : idx)
    for (int l : pool[i].vad_labels) speech += l;
  long got = 0;
  for (int l : batch.vad_labels) got += l;
  CHECK(got == speech);

  Rng rng4(3);
  CHECK_THROWS_AS(concat_batch(ptrs, 13, rng4), DataError);

  // mixed cells are rejected
  pool[3].snr_db = 0.0;
  Rng rng5(4);
  CHECK_THROWS_AS(concat_batch(ptrs, 12, rng5), DataError);
}

TEST_CASE("wav: round-trip, scaling, rejections") {
  testutil::TempDir tmp("wavad_wav");

  // a second of silence reads back as 8000 exact zeros
  const std::vector<double> silence(8000, 0.0);
  save_wav(tmp.path() / "silence.wav", silence, 8000);
  const WavData loaded = load_wav(tmp.path() / "silence.wav");
  CHECK(loaded.fs == 8000);
  REQUIRE(loaded.samples.size() == 8000);
  for (double v : loaded.samples) CHECK(v == 0.0);

  // write -> read -> write -> read is the identity on the PCM grid
  const Utterance u = synth_utterance(4, 1.0, 8000);
  save_wav(tmp.path() / "a.wav", u.samples, 8000);
  const WavData r1 = load_wav(tmp.path() / "a.wav");
  save_wav(tmp.path() / "b.wav", r1.samples, 8000);
  const WavData r2 = load_wav(tmp.path() / "b.wav");
  CHECK(r1.samples == r2.samples);

  // 16-bit scaling law
  save_wav(tmp.path() / "c.wav", std::vector<double>{0.5, -0.5, 1.0, -1.0}, 8000);
  const WavData scaled = load_wav(tmp.path() / "c.wav");
  CHECK(scaled.samples[0] == doctest::Approx(16384.0 / 32768.0));
  CHECK(scaled.samples[1] == doctest::Approx(-16384.0 / 32768.0));
  CHECK(scaled.samples[2] == doctest::Approx(32767.0 / 32768.0));
  CHECK(scaled.samples[3] == -1.0);

  // stereo is rejected with a format error
  {
    std::ofstream os(tmp.path() / "stereo.wav", std::ios::binary);
    auto w16 = [&os](std::uint16_t v) { os.write(reinterpret_cast<char*>(&v), 2); };
    auto w32 = [&os](std::uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); };
    os.write("RIFF", 4);
    w32(36 + 8);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    w32(16);
    w16(1);
    w16(2);  // stereo
    w32(8000);
    w32(32000);
    w16(4);
    w16(16);
    os.write("data", 4);
    w32(8);
    w32(0);
    w32(0);
  }
  CHECK_THROWS_AS(load_wav(tmp.path() / "stereo.wav"), FormatError);

  // sampling rates off the 10 ms grid are rejected
  CHECK_THROWS_AS(save_wav(tmp.path() / "bad.wav", silence, 22050), FormatError);
  CHECK_THROWS_AS(load_wav(tmp.path() / "missing.wav"), FormatError);
}

TEST_CASE("label files and manifests round-trip") {
  testutil::TempDir tmp("wavad_labels");
  Utterance u = synth_utterance(6, 1.0, 8000);
  u.noise_type = 3;
  u.snr_db = -5.0;
  write_labels(tmp.path() / "u.txt", u);
  std::vector<int> vad;
  int noise_type = 0;
  read_labels(tmp.path() / "u.txt", vad, noise_type);
  CHECK(vad == u.vad_labels);
  CHECK(noise_type == 3);

  const std::vector<ManifestEntry> entries = {
      {"wav/a.wav", "labels/a.txt", "pink", 2, 5.0},
      {"wav/b.wav", "labels/b.txt", "clean", 0, std::nullopt},
  };
  write_manifest(tmp.path() / "manifest.csv", entries);
  const auto back = read_manifest(tmp.path() / "manifest.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].wav_path == "wav/a.wav");
  CHECK(back[0].noise_kind == "pink");
  CHECK(back[0].noise_type == 2);
  CHECK(back[0].snr_db == 5.0);
  CHECK(back[1].snr_db == std::nullopt);
}

TEST_CASE("synth_corpus: layout, loading, cell structure") {
  testutil::TempDir tmp("wavad_corpus");
  CorpusParams params;
  params.fs = 2000;
  params.files_per_train_cell = 3;
  params.files_per_eval_cell = 2;
  params.noise_kinds = {"white", "pink"};
  params.train_snrs = {10, 5};
  params.eval_snrs = {5, 0};
  params.seed = 99;
  synth_corpus(params, tmp.path());

  const LoadedCorpus train = LoadedCorpus::load(tmp.path() / "manifest_train.csv");
  // cells: clean + 2 kinds x 2 snrs
  CHECK(train.cells.size() == 5);
  CHECK(train.files.size() == 3 * 5);
  for (const auto& [key, indices] : train.cells) CHECK(indices.size() == 3);

  const LoadedCorpus val = LoadedCorpus::load(tmp.path() / "manifest_val.csv");
  CHECK(val.cells.size() == 5);
  CHECK(val.files.size() == 2 * 5);

  // every file carries labels matching its frame count
  for (const auto& f : train.files)
    CHECK(static_cast<long>(f.vad_labels.size()) == f.expected_label_count());

  // regeneration is byte-deterministic
  testutil::TempDir tmp2("wavad_corpus2");
  synth_corpus(params, tmp2.path());
  const Utterance a = load_utterance(tmp.path(), read_manifest(tmp.path() / "manifest_train.csv")[4]);
  const Utterance b =
      load_utterance(tmp2.path(), read_manifest(tmp2.path() / "manifest_train.csv")[4]);
  CHECK(a.samples == b.samples);

  // zero files per cell -> empty manifests
  testutil::TempDir tmp3("wavad_corpus3");
  CorpusParams empty = params;
  empty.files_per_train_cell = 0;
  empty.files_per_eval_cell = 0;
  synth_corpus(empty, tmp3.path());
  CHECK(read_manifest(tmp3.path() / "manifest_train.csv").empty());
}

TEST_CASE("train and test noise instances never repeat") {
  // the corpus generator namespaces noise seeds by split; fingerprint the
  // instances drawn for the same (kind, counter) across splits
  for (int kind_i = 0; kind_i < 2; ++kind_i) {
    for (std::uint64_t counter = 0; counter < 8; ++counter) {
      const auto s_train = derive_seed(1, "noise-instance-train", kind_i, counter);
      const auto s_test = derive_seed(1, "noise-instance-test", kind_i, counter);
      CHECK(s_train != s_test);
      const auto a = synth_noise("white", s_train, 512, 8000);
      const auto b = synth_noise("white", s_test, 512, 8000);
      CHECK(a != b);
    }
  }
}
