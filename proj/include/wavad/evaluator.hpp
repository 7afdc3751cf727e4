#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavad/corpus.hpp"
#include "wavad/delay.hpp"
#include "wavad/model.hpp"

namespace wavad {

struct RocCurve {
  std::vector<double> thresholds;  // descending
  std::vector<double> fpr;         // nondecreasing, starts 0 ends 1
  std::vector<double> tpr;
  double auc = 0.0;                // trapezoidal
};

// Threshold sweep over the distinct score values; equal scores are processed
// as one step, which makes the trapezoidal area equal to the half-credit
// pairwise (Mann-Whitney) statistic. Throws UndefinedMetricError when labels
// are single-class.
RocCurve roc(std::span<const double> scores, std::span<const int> labels);

// O(P*N) brute force: fraction of (positive, negative) pairs ordered
// correctly, ties worth 0.5. Independent check of roc().auc.
double auc_pairwise_oracle(std::span<const double> scores, std::span<const int> labels);

struct CellResult {
  CellKey key;
  std::string noise_kind;
  long frames = 0;
  std::optional<double> auc;  // empty: no frames or single-class
};

struct ConditionReport {
  std::vector<CellResult> cells;
  // Column order: clean first, then SNRs descending; per-column value is the
  // mean AUC over noise types (or the pooled-frames AUC in pooled mode).
  std::vector<std::optional<double>> column_snrs;  // empty optional = clean
  std::vector<std::optional<double>> column_auc;
  std::optional<double> mean_auc;  // arithmetic mean of the defined columns

  std::string summary_csv() const;  // header clean,<snr> dB,...,mean
  std::string cells_csv() const;    // noise_kind,noise_type,snr,frames,auc
};

struct EvalOptions {
  int files_per_concat = 10;      // evaluation concatenates files like training
  bool pool_noise_types = false;  // pool all frames of an SNR instead of averaging cell AUCs
  bool per_file_auc = false;      // cell AUC = mean of per-file AUCs instead of pooled frames
};

// Per-cell frame scores pooled over that cell's concatenated files.
struct CellScores {
  CellKey key;
  std::vector<double> scores;
  std::vector<int> labels;
};
std::vector<CellScores> score_corpus(const VadNetwork& net, const LoadedCorpus& corpus,
                                     int files_per_concat = 10);

ConditionReport condition_report(const VadNetwork& net, const LoadedCorpus& corpus,
                                 const EvalOptions& options = {});

struct DelayCurveEntry {
  std::array<int, 3> db_kernels;
  std::filesystem::path checkpoint;
};

struct DelayCurveRow {
  std::array<int, 3> db_kernels;
  double delay_ms = 0.0;
  std::optional<double> mean_auc;  // empty when the checkpoint is missing
};

// Pairs each configuration's algorithmic delay with its mean AUC on the
// corpus. Missing checkpoints produce a row with an empty AUC, never a zero.
std::vector<DelayCurveRow> delay_performance_curve(std::span<const DelayCurveEntry> entries,
                                                   const LoadedCorpus& corpus,
                                                   const DelaySpec& delay_base,
                                                   const EvalOptions& options = {});

std::string delay_curve_csv(std::span<const DelayCurveRow> rows);

}  // namespace wavad
