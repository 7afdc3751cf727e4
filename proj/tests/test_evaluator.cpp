#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "testutil.hpp"
#include "wavad/checkpoint.hpp"
#include "wavad/evaluator.hpp"

using namespace wavad;

namespace {

// tiny fs-400 network for evaluation plumbing tests
VadNetwork tiny_net(int n_noise = 2) {
  NetworkConfig cfg = NetworkConfig::for_sample_rate(400);
  cfg.eb_kernels = {3, 3, 3, 3};
  cfg.eb_channels = {2, 2, 2, 2};
  cfg.fb_channels = 2;
  cfg.db_kernels = {3, 0, 0};
  cfg.db_channels = 2;
  cfg.dn_kernels = {3, 3, 3};
  cfg.dn_channels = 2;
  cfg.n_noise_types = n_noise;
  VadNetwork net = VadNetwork::build(cfg);
  net.initialize(77);
  return net;
}

LoadedCorpus tiny_corpus(const std::vector<std::pair<int, std::optional<double>>>& cells,
                         int files_per_cell, std::uint64_t seed) {
  LoadedCorpus corpus;
  corpus.noise_kind_names = {"clean", "white", "pink"};
  for (const auto& [noise_type, snr] : cells) {
    for (int i = 0; i < files_per_cell; ++i) {
      Utterance u = synth_utterance(
          derive_seed(seed, "tiny", static_cast<std::uint64_t>(noise_type * 100 + i),
                      static_cast<std::uint64_t>(snr.has_value() ? std::lround(*snr) + 50 : 0)),
          0.8, 400);
      if (snr.has_value()) {
        const std::vector<double> noise = synth_noise(
            "white", derive_seed(seed, "tinynoise", noise_type, i),
            static_cast<long>(u.samples.size()), 400);
        u = mix_at_snr(u, noise, snr, noise_type).mixed;
      }
      const int idx = static_cast<int>(corpus.files.size());
      corpus.files.push_back(std::move(u));
      corpus.cells[CellKey{noise_type, snr}].push_back(idx);
    }
  }
  return corpus;
}

}  // namespace

TEST_CASE("roc: hand case 0.75 and basic symmetries") {
  const std::vector<double> scores = {0.1, 0.4, 0.35, 0.8};
  const std::vector<int> labels = {0, 0, 1, 1};
  const RocCurve curve = roc(scores, labels);
  CHECK(curve.auc == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(auc_pairwise_oracle(scores, labels) == doctest::Approx(0.75).epsilon(1e-15));

  // perfectly separated
  const std::vector<double> sep = {0.9, 0.8, 0.2, 0.1};
  const std::vector<int> sep_l = {1, 1, 0, 0};
  CHECK(roc(sep, sep_l).auc == 1.0);

  // inverting the labels flips the area
  std::vector<int> inverted = labels;
  for (int& l : inverted) l = 1 - l;
  CHECK(roc(scores, inverted).auc == doctest::Approx(1.0 - 0.75).epsilon(1e-15));

  // all scores equal -> chance with half-credit ties
  const std::vector<double> flat = {0.5, 0.5, 0.5, 0.5};
  CHECK(roc(flat, labels).auc == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(auc_pairwise_oracle(flat, labels) == doctest::Approx(0.5).epsilon(1e-15));

  // one positive above all negatives
  const std::vector<double> top = {0.9, 0.1, 0.2, 0.3};
  const std::vector<int> top_l = {1, 0, 0, 0};
  CHECK(auc_pairwise_oracle(top, top_l) == 1.0);
}

TEST_CASE("roc: single-class input is an error, not a default") {
  const std::vector<double> s = {0.4, 0.6};
  CHECK_THROWS_AS(roc(s, std::vector<int>{1, 1}), UndefinedMetricError);
  CHECK_THROWS_AS(roc(s, std::vector<int>{0, 0}), UndefinedMetricError);
  CHECK_THROWS_AS(auc_pairwise_oracle(s, std::vector<int>{1, 1}), UndefinedMetricError);
}

TEST_CASE("roc: sweep equals the pairwise oracle on 1000 random tie-heavy instances") {
  Rng rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(199));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    // small discrete score alphabets force heavy ties
    const int alphabet = 1 + static_cast<int>(rng.below(12));
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.below(alphabet)) / alphabet;
      labels[i] = static_cast<int>(rng.below(2));
      (labels[i] != 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = 1;
    if (!has_neg) labels[n - 1] = 0;
    const double sweep = roc(scores, labels).auc;
    const double oracle = auc_pairwise_oracle(scores, labels);
    CHECK(std::abs(sweep - oracle) <= 1e-12);
  }
}

TEST_CASE("roc: curve endpoints and monotonicity") {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 10 + static_cast<int>(rng.below(100));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = rng.normal();
      labels[i] = static_cast<int>(rng.below(2));
    }
    labels[0] = 1;
    labels[1] = 0;
    const RocCurve curve = roc(scores, labels);
    CHECK(curve.fpr.front() == 0.0);
    CHECK(curve.tpr.front() == 0.0);
    CHECK(curve.fpr.back() == 1.0);
    CHECK(curve.tpr.back() == 1.0);
    for (std::size_t i = 1; i < curve.fpr.size(); ++i) {
      CHECK(curve.fpr[i] >= curve.fpr[i - 1]);
      CHECK(curve.tpr[i] >= curve.tpr[i - 1]);
      CHECK(curve.thresholds[i] < curve.thresholds[i - 1]);
    }
    // auc recomputable from the points by the trapezoid rule
    double auc = 0.0;
    for (std::size_t i = 1; i < curve.fpr.size(); ++i)
      auc += (curve.fpr[i] - curve.fpr[i - 1]) * (curve.tpr[i] + curve.tpr[i - 1]) * 0.5;
    CHECK(curve.auc == doctest::Approx(auc).epsilon(1e-15));
  }
}

TEST_CASE("roc: invariant under strictly increasing transforms") {
  Rng rng(31);
  std::vector<double> scores(300);
  std::vector<int> labels(300);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = static_cast<double>(rng.below(40)) / 40.0;
    labels[i] = static_cast<int>(rng.below(2));
  }
  labels[0] = 1;
  labels[1] = 0;
  const double base = roc(scores, labels).auc;
  std::vector<double> affine(scores), expo(scores);
  for (double& v : affine) v = 3.0 * v + 2.0;
  for (double& v : expo) v = std::exp(v);
  CHECK(roc(affine, labels).auc == doctest::Approx(base).epsilon(1e-15));
  CHECK(roc(expo, labels).auc == doctest::Approx(base).epsilon(1e-15));
}

TEST_CASE("roc: random scores against random labels sit at chance") {
  Rng rng(55);
  const int n = 100000;
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    labels[i] = static_cast<int>(rng.below(2));
  }
  CHECK(roc(scores, labels).auc == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("condition_report: single cell, column order, duplication invariance") {
  VadNetwork net = tiny_net();

  // one cell: the mean equals the cell AUC
  const LoadedCorpus one = tiny_corpus({{1, 5.0}}, 4, 3);
  const ConditionReport r1 = condition_report(net, one);
  REQUIRE(r1.cells.size() == 1);
  REQUIRE(r1.cells[0].auc.has_value());
  CHECK(r1.mean_auc == r1.cells[0].auc);

  // Table-2 column layout: clean first, then SNR descending, then mean
  const LoadedCorpus grid = tiny_corpus(
      {
          {0, std::nullopt}, {1, 20.0}, {1, 15.0}, {1, 10.0}, {1, 5.0}, {1, 0.0}, {1, -5.0},
          {2, 20.0}, {2, 15.0}, {2, 10.0}, {2, 5.0}, {2, 0.0}, {2, -5.0},
      },
      3, 4);
  const ConditionReport r2 = condition_report(net, grid);
  const std::string csv = r2.summary_csv();
  std::istringstream is(csv);
  std::string header;
  std::getline(is, header);
  CHECK(header == "clean,20 dB,15 dB,10 dB,5 dB,0 dB,-5 dB,mean");

  // the mean column is the arithmetic mean of the SNR columns
  double sum = 0.0;
  for (const auto& col : r2.column_auc) {
    REQUIRE(col.has_value());
    sum += *col;
  }
  CHECK(*r2.mean_auc == doctest::Approx(sum / r2.column_auc.size()).epsilon(1e-12));

  // Duplicating every file leaves the report unchanged. Exact in per-file
  // scoring; the default concatenated protocol regroups files, so only the
  // per-file route is a sharp check.
  LoadedCorpus doubled = grid;
  for (const auto& [key, indices] : grid.cells) {
    for (int idx : indices) {
      doubled.files.push_back(grid.files[idx]);
      doubled.cells[key].push_back(static_cast<int>(doubled.files.size()) - 1);
    }
  }
  EvalOptions per_file;
  per_file.per_file_auc = true;
  const ConditionReport before = condition_report(net, grid, per_file);
  const ConditionReport after = condition_report(net, doubled, per_file);
  REQUIRE(after.column_auc.size() == before.column_auc.size());
  for (std::size_t i = 0; i < before.column_auc.size(); ++i)
    CHECK(*after.column_auc[i] == doctest::Approx(*before.column_auc[i]).epsilon(1e-12));
}

TEST_CASE("roc: pooled AUC is invariant to duplicating the score set") {
  Rng rng(71);
  std::vector<double> scores(500);
  std::vector<int> labels(500);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = static_cast<double>(rng.below(64)) / 64.0;
    labels[i] = static_cast<int>(rng.below(2));
  }
  labels[0] = 1;
  labels[1] = 0;
  std::vector<double> twice = scores;
  twice.insert(twice.end(), scores.begin(), scores.end());
  std::vector<int> twice_l = labels;
  twice_l.insert(twice_l.end(), labels.begin(), labels.end());
  CHECK(roc(twice, twice_l).auc == doctest::Approx(roc(scores, labels).auc).epsilon(1e-15));
}

TEST_CASE("condition_report: empty cells are missing, not zero") {
  VadNetwork net = tiny_net();
  LoadedCorpus corpus = tiny_corpus({{1, 5.0}}, 3, 6);
  corpus.cells[CellKey{2, 5.0}] = {};  // an empty cell
  const ConditionReport report = condition_report(net, corpus);
  bool found_missing = false;
  for (const auto& cell : report.cells)
    if (cell.key.noise_type == 2) {
      CHECK_FALSE(cell.auc.has_value());
      found_missing = true;
    }
  CHECK(found_missing);
  const std::string csv = report.cells_csv();
  CHECK(csv.find("NA") != std::string::npos);
}

TEST_CASE("condition_report: pooled and per-file modes stay defined") {
  VadNetwork net = tiny_net();
  const LoadedCorpus corpus = tiny_corpus({{1, 10.0}, {2, 10.0}, {1, 0.0}, {2, 0.0}}, 4, 8);

  EvalOptions pooled;
  pooled.pool_noise_types = true;
  const ConditionReport rp = condition_report(net, corpus, pooled);
  REQUIRE(rp.mean_auc.has_value());

  EvalOptions per_file;
  per_file.per_file_auc = true;
  const ConditionReport rf = condition_report(net, corpus, per_file);
  REQUIRE(rf.mean_auc.has_value());
  for (const auto& cell : rf.cells) CHECK(cell.frames > 0);
}

TEST_CASE("delay_performance_curve: missing checkpoints become missing rows") {
  testutil::TempDir tmp("wavad_curve");
  VadNetwork net = tiny_net();
  const LoadedCorpus corpus = tiny_corpus({{1, 5.0}, {2, 5.0}}, 4, 12);

  // independently recomputed expectations for the tiny fs-400 spec:
  // ctx = sum(k_eb - 1) + hop - 1 + sum(k_db) * hop, hop = 4
  DelaySpec base;
  base.fs = 400;
  base.eb_kernels = {3, 3, 3, 3};
  base.mode = DelayMode::kFrameWindow;

  save_checkpoint(net, tmp.path() / "present.ckpt");

  const DelayCurveEntry entries[] = {
      {{3, 0, 0}, tmp.path() / "present.ckpt"},
      {{5, 3, 3}, tmp.path() / "absent.ckpt"},
  };
  const auto rows = delay_performance_curve(entries, corpus, base);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].delay_ms == (8.0 + 3.0 + 3 * 4) * 1000.0 / 800.0);
  CHECK(rows[1].delay_ms == (8.0 + 3.0 + 11 * 4) * 1000.0 / 800.0);
  CHECK(rows[0].mean_auc.has_value());
  CHECK_FALSE(rows[1].mean_auc.has_value());

  const std::string csv = delay_curve_csv(rows);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "db1,db2,db3,delay_ms,mean_auc");
  std::getline(is, line);
  CHECK(line.rfind("3,0,0,", 0) == 0);
  std::getline(is, line);
  CHECK(line.find("NA") != std::string::npos);
}
