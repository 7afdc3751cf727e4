#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wavad/checkpoint.hpp"
#include "wavad/corpus.hpp"
#include "wavad/model.hpp"

namespace wavad {

struct TrainSchedule {
  int epochs = 30;
  double lr0 = 0.01;
  double lr_decay = 0.7;  // lr at epoch e = lr0 * lr_decay^e
  int forwards_per_backward = 3;
  int files_per_forward = 10;
  double alpha = 0.1;
  std::uint64_t seed = 1;
  double rmsprop_rho = 0.9;
  double rmsprop_eps = 1e-8;
  bool train_dn = true;  // false: never evaluate or update the discriminator

  void validate() const;
};

// lr0 * lr_decay^epoch
double learning_rate_at(const TrainSchedule& schedule, int epoch);

struct StepRecord {
  int step = 0;
  int epoch = 0;
  double vad_loss = 0.0;
  double noise_loss = 0.0;
};

struct TrainReport {
  std::vector<StepRecord> steps;
  std::vector<double> epoch_val_auc;  // empty when no validation corpus given
  int optimizer_steps = 0;
  int forward_passes = 0;
  double wall_seconds = 0.0;
  std::string config_echo;  // schedule + network config, JSON

  // Deterministic byte-for-byte for a fixed (seed, config, corpus); excludes
  // wall time.
  std::string csv() const;
  std::string val_auc_csv() const;
  // Human summary; includes wall time.
  std::string summary() const;
};

class Trainer {
 public:
  Trainer(VadNetwork net, TrainSchedule schedule);

  // Runs epochs [from_epoch, schedule.epochs). Gradients of the
  // forwards_per_backward forward passes are summed and normalized by the
  // total frame count of the step before each RMSprop update. A non-finite
  // loss aborts with TrainingDivergedError after writing a diagnostic
  // checkpoint next to diag_dir (when given).
  TrainReport run(const LoadedCorpus& train, const LoadedCorpus* val = nullptr,
                  int from_epoch = 0,
                  const std::optional<std::filesystem::path>& diag_dir = std::nullopt);

  VadNetwork& net() { return net_; }
  const VadNetwork& net() const { return net_; }
  OptimizerStateSet& optimizer_state() { return opt_; }
  const TrainSchedule& schedule() const { return schedule_; }

  void save(const std::filesystem::path& path);         // with optimizer state
  static Trainer restore(const std::filesystem::path& path, TrainSchedule schedule);

 private:
  VadNetwork net_;
  TrainSchedule schedule_;
  OptimizerStateSet opt_;
};

// Pooled-frame AUC of the whole corpus (validation metric during training).
double pooled_corpus_auc(const VadNetwork& net, const LoadedCorpus& corpus,
                         int files_per_concat);

struct AlphaSweepRow {
  double alpha = 0.0;
  double mean_val_auc = 0.0;
};

// Trains one model per alpha, every run restored from one shared
// initialization, and reports the validation mean AUC per alpha.
std::vector<AlphaSweepRow> alpha_sweep(const NetworkConfig& config, const TrainSchedule& base,
                                       const LoadedCorpus& train, const LoadedCorpus& val,
                                       std::span<const double> grid,
                                       const std::optional<std::filesystem::path>& out_dir =
                                           std::nullopt);

std::string alpha_sweep_csv(std::span<const AlphaSweepRow> rows);

}  // namespace wavad
