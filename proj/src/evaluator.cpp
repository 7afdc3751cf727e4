#include "wavad/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>

#include "wavad/checkpoint.hpp"
#include "wavad/errors.hpp"

namespace wavad {

namespace {

void check_two_classes(std::span<const int> labels) {
  long pos = 0, neg = 0;
  for (int l : labels) (l != 0 ? pos : neg)++;
  if (pos == 0 || neg == 0)
    throw UndefinedMetricError("AUC undefined: labels contain a single class (" +
                               std::to_string(pos) + " positive, " + std::to_string(neg) +
                               " negative)");
}

std::string format_auc(const std::optional<double>& auc) {
  if (!auc.has_value()) return "NA";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(6);
  os << *auc;
  return os.str();
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

RocCurve roc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw ConfigError("roc: scores and labels must be nonempty and equal-length");
  check_two_classes(labels);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double total_pos = 0, total_neg = 0;
  for (int l : labels) (l != 0 ? total_pos : total_neg)++;

  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);

  double tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    // all frames with an equal score step together
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] != 0 ? tp : fp)++;
      ++i;
    }
    curve.thresholds.push_back(threshold);
    curve.fpr.push_back(fp / total_neg);
    curve.tpr.push_back(tp / total_pos);
  }

  double auc = 0.0;
  for (std::size_t k = 1; k < curve.fpr.size(); ++k)
    auc += (curve.fpr[k] - curve.fpr[k - 1]) * (curve.tpr[k] + curve.tpr[k - 1]) * 0.5;
  curve.auc = auc;
  return curve;
}

double auc_pairwise_oracle(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw ConfigError("auc_pairwise_oracle: scores and labels must be nonempty and equal-length");
  check_two_classes(labels);
  double correct = 0.0;
  long pairs = 0;
  for (std::size_t p = 0; p < scores.size(); ++p) {
    if (labels[p] == 0) continue;
    for (std::size_t q = 0; q < scores.size(); ++q) {
      if (labels[q] != 0) continue;
      ++pairs;
      if (scores[p] > scores[q])
        correct += 1.0;
      else if (scores[p] == scores[q])
        correct += 0.5;
    }
  }
  return correct / static_cast<double>(pairs);
}

namespace {

// Contiguous near-equal chunks of at most `target` files each; evaluation
// needs no randomness, so draw order is manifest order.
std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t n,
                                                              std::size_t target) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  if (n == 0) return ranges;
  const std::size_t groups = (n + target - 1) / target;
  const std::size_t base = n / groups;
  const std::size_t extra = n % groups;
  std::size_t start = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t len = base + (g < extra ? 1 : 0);
    ranges.emplace_back(start, start + len);
    start += len;
  }
  return ranges;
}

void score_concat(const VadNetwork& net, std::span<const Utterance* const> group,
                  std::vector<double>& scores, std::vector<int>& labels) {
  std::vector<double> samples;
  std::vector<int> file_labels;
  for (const Utterance* u : group) {
    samples.insert(samples.end(), u->samples.begin(), u->samples.end());
    file_labels.insert(file_labels.end(), u->vad_labels.begin(), u->vad_labels.end());
  }
  const std::vector<double> s = net.score(samples);
  const std::vector<int> aligned =
      frame_label_alignment(static_cast<int>(s.size()), file_labels);
  scores.insert(scores.end(), s.begin(), s.end());
  labels.insert(labels.end(), aligned.begin(), aligned.end());
}

}  // namespace

std::vector<CellScores> score_corpus(const VadNetwork& net, const LoadedCorpus& corpus,
                                     int files_per_concat) {
  std::vector<CellScores> out;
  for (const auto& [key, indices] : corpus.cells) {
    CellScores cell;
    cell.key = key;
    std::vector<const Utterance*> files = corpus.cell_files(key);
    for (const auto& [lo, hi] : chunk_ranges(files.size(), files_per_concat)) {
      score_concat(net, std::span(files.data() + lo, hi - lo), cell.scores, cell.labels);
    }
    out.push_back(std::move(cell));
  }
  return out;
}

ConditionReport condition_report(const VadNetwork& net, const LoadedCorpus& corpus,
                                 const EvalOptions& options) {
  ConditionReport report;

  std::vector<CellScores> cells;
  if (options.per_file_auc) {
    for (const auto& [key, indices] : corpus.cells) {
      CellScores dummy;
      dummy.key = key;
      cells.push_back(std::move(dummy));
    }
  } else {
    cells = score_corpus(net, corpus, options.files_per_concat);
  }

  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const CellScores& cell = cells[ci];
    CellResult res;
    res.key = cell.key;
    res.noise_kind = cell.key.noise_type < static_cast<int>(corpus.noise_kind_names.size())
                         ? corpus.noise_kind_names[cell.key.noise_type]
                         : "unknown";
    if (options.per_file_auc) {
      double sum = 0.0;
      long count = 0;
      for (const Utterance* u : corpus.cell_files(cell.key)) {
        std::vector<double> scores;
        std::vector<int> labels;
        score_concat(net, std::span(&u, 1), scores, labels);
        res.frames += static_cast<long>(scores.size());
        try {
          sum += roc(scores, labels).auc;
          ++count;
        } catch (const UndefinedMetricError&) {
          // single-class file: contributes no per-file AUC
        }
      }
      if (count > 0) res.auc = sum / count;
    } else {
      res.frames = static_cast<long>(cell.scores.size());
      try {
        if (!cell.scores.empty()) res.auc = roc(cell.scores, cell.labels).auc;
      } catch (const UndefinedMetricError&) {
        // reported as missing, never as a default value
      }
    }
    report.cells.push_back(std::move(res));
  }

  // Columns: clean first, then SNRs descending.
  std::vector<std::optional<double>> snr_columns;
  for (const auto& cell : report.cells) {
    if (std::find(snr_columns.begin(), snr_columns.end(), cell.key.snr_db) == snr_columns.end())
      snr_columns.push_back(cell.key.snr_db);
  }
  std::sort(snr_columns.begin(), snr_columns.end(),
            [](const std::optional<double>& a, const std::optional<double>& b) {
              if (a.has_value() != b.has_value()) return !a.has_value();
              if (!a.has_value()) return false;
              return *a > *b;
            });
  report.column_snrs = snr_columns;

  for (const auto& snr : snr_columns) {
    std::optional<double> col;
    if (options.pool_noise_types && !options.per_file_auc) {
      std::vector<double> scores;
      std::vector<int> labels;
      for (const auto& cell : cells) {
        if (cell.key.snr_db != snr) continue;
        scores.insert(scores.end(), cell.scores.begin(), cell.scores.end());
        labels.insert(labels.end(), cell.labels.begin(), cell.labels.end());
      }
      try {
        if (!scores.empty()) col = roc(scores, labels).auc;
      } catch (const UndefinedMetricError&) {
      }
    } else {
      double sum = 0.0;
      long count = 0;
      for (const auto& cell : report.cells) {
        if (cell.key.snr_db != snr || !cell.auc.has_value()) continue;
        sum += *cell.auc;
        ++count;
      }
      if (count > 0) col = sum / count;
    }
    report.column_auc.push_back(col);
  }

  double sum = 0.0;
  long count = 0;
  for (const auto& col : report.column_auc) {
    if (!col.has_value()) continue;
    sum += *col;
    ++count;
  }
  if (count > 0) report.mean_auc = sum / count;
  return report;
}

std::string ConditionReport::summary_csv() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < column_snrs.size(); ++i) {
    if (i) os << ',';
    if (!column_snrs[i].has_value())
      os << "clean";
    else
      os << format_number(*column_snrs[i]) << " dB";
  }
  os << ",mean\n";
  for (std::size_t i = 0; i < column_auc.size(); ++i) {
    if (i) os << ',';
    os << format_auc(column_auc[i]);
  }
  os << ',' << format_auc(mean_auc) << '\n';
  return os.str();
}

std::string ConditionReport::cells_csv() const {
  std::ostringstream os;
  os << "noise_kind,noise_type,snr_db,frames,auc\n";
  for (const auto& cell : cells) {
    os << cell.noise_kind << ',' << cell.key.noise_type << ',';
    if (cell.key.snr_db.has_value())
      os << format_number(*cell.key.snr_db);
    else
      os << "clean";
    os << ',' << cell.frames << ',' << format_auc(cell.auc) << '\n';
  }
  return os.str();
}

std::vector<DelayCurveRow> delay_performance_curve(std::span<const DelayCurveEntry> entries,
                                                   const LoadedCorpus& corpus,
                                                   const DelaySpec& delay_base,
                                                   const EvalOptions& options) {
  std::vector<DelayCurveRow> rows;
  for (const auto& entry : entries) {
    DelayCurveRow row;
    row.db_kernels = entry.db_kernels;
    DelaySpec spec = delay_base;
    spec.db_kernels = entry.db_kernels;
    row.delay_ms = algorithmic_delay_ms(spec);
    if (std::filesystem::exists(entry.checkpoint)) {
      RestoredCheckpoint restored = load_checkpoint(entry.checkpoint);
      if (restored.net.config.db_kernels != entry.db_kernels)
        throw ConfigError("checkpoint " + entry.checkpoint.string() +
                          " was trained with different decoder kernels");
      row.mean_auc = condition_report(restored.net, corpus, options).mean_auc;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string delay_curve_csv(std::span<const DelayCurveRow> rows) {
  std::ostringstream os;
  os << "db1,db2,db3,delay_ms,mean_auc\n";
  for (const auto& row : rows) {
    os << row.db_kernels[0] << ',' << row.db_kernels[1] << ',' << row.db_kernels[2] << ','
       << format_number(row.delay_ms) << ',' << format_auc(row.mean_auc) << '\n';
  }
  return os.str();
}

}  // namespace wavad
