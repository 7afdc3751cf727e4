#include "wavad/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "wavad/errors.hpp"
#include "wavad/evaluator.hpp"

namespace wavad {

void TrainSchedule::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (lr0 <= 0.0) throw ConfigError("lr0 must be positive");
  if (lr_decay <= 0.0 || lr_decay > 1.0) throw ConfigError("lr_decay must be in (0, 1]");
  if (forwards_per_backward < 1) throw ConfigError("forwards_per_backward must be positive");
  if (files_per_forward < 1) throw ConfigError("files_per_forward must be positive");
  if (alpha < 0.0) throw ConfigError("alpha must be nonnegative");
  if (rmsprop_rho <= 0.0 || rmsprop_rho >= 1.0) throw ConfigError("rmsprop_rho must be in (0,1)");
  if (rmsprop_eps <= 0.0) throw ConfigError("rmsprop_eps must be positive");
}

double learning_rate_at(const TrainSchedule& schedule, int epoch) {
  return schedule.lr0 * std::pow(schedule.lr_decay, epoch);
}

namespace {

std::string format_full(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

nlohmann::ordered_json schedule_json(const TrainSchedule& s) {
  nlohmann::ordered_json j;
  j["epochs"] = s.epochs;
  j["lr0"] = s.lr0;
  j["lr_decay"] = s.lr_decay;
  j["forwards_per_backward"] = s.forwards_per_backward;
  j["files_per_forward"] = s.files_per_forward;
  j["alpha"] = s.alpha;
  j["seed"] = s.seed;
  j["rmsprop_rho"] = s.rmsprop_rho;
  j["rmsprop_eps"] = s.rmsprop_eps;
  j["train_dn"] = s.train_dn;
  return j;
}

}  // namespace

std::string TrainReport::csv() const {
  std::ostringstream os;
  os << "step,epoch,vad_loss,noise_loss\n";
  for (const auto& s : steps)
    os << s.step << ',' << s.epoch << ',' << format_full(s.vad_loss) << ','
       << format_full(s.noise_loss) << '\n';
  return os.str();
}

std::string TrainReport::val_auc_csv() const {
  std::ostringstream os;
  os << "epoch,val_auc\n";
  for (std::size_t e = 0; e < epoch_val_auc.size(); ++e)
    os << e << ',' << format_full(epoch_val_auc[e]) << '\n';
  return os.str();
}

std::string TrainReport::summary() const {
  std::ostringstream os;
  os << "optimizer_steps: " << optimizer_steps << '\n';
  os << "forward_passes: " << forward_passes << '\n';
  if (!steps.empty()) {
    os << "first_vad_loss: " << format_full(steps.front().vad_loss) << '\n';
    os << "final_vad_loss: " << format_full(steps.back().vad_loss) << '\n';
    os << "final_noise_loss: " << format_full(steps.back().noise_loss) << '\n';
  }
  if (!epoch_val_auc.empty())
    os << "final_val_auc: " << format_full(epoch_val_auc.back()) << '\n';
  os << "wall_seconds: " << wall_seconds << '\n';
  return os.str();
}

Trainer::Trainer(VadNetwork net, TrainSchedule schedule)
    : net_(std::move(net)), schedule_(schedule) {
  schedule_.validate();
  opt_.resize(net_.parameters().size());
}

TrainReport Trainer::run(const LoadedCorpus& train, const LoadedCorpus* val, int from_epoch,
                         const std::optional<std::filesystem::path>& diag_dir) {
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<CellKey> cell_keys;
  long total_files = 0;
  for (const auto& [key, indices] : train.cells) {
    if (indices.empty()) continue;
    cell_keys.push_back(key);
    total_files += static_cast<long>(indices.size());
  }
  if (cell_keys.empty()) throw DataError("training corpus is empty");

  // One pass over the corpus per epoch (each file drawn once in expectation),
  // padded so every optimizer step sees exactly forwards_per_backward
  // forwards.
  const int fpb = schedule_.forwards_per_backward;
  long forwards_per_epoch =
      (total_files + schedule_.files_per_forward - 1) / schedule_.files_per_forward;
  forwards_per_epoch = ((forwards_per_epoch + fpb - 1) / fpb) * fpb;
  const long steps_per_epoch = forwards_per_epoch / fpb;

  TrainReport report;
  {
    nlohmann::ordered_json echo;
    echo["schedule"] = schedule_json(schedule_);
    echo["network"] = nlohmann::ordered_json::parse(net_.config.to_json());
    report.config_echo = echo.dump(2);
  }

  auto params = net_.parameters();

  for (int epoch = from_epoch; epoch < schedule_.epochs; ++epoch) {
    const double lr = learning_rate_at(schedule_, epoch);
    // Cells are visited in a fresh seeded shuffle each epoch: even coverage,
    // and one optimizer step mixes different noise types, which keeps the
    // discriminator's task stationary enough to track.
    std::vector<CellKey> cell_order = cell_keys;
    {
      Rng order_rng(derive_seed(schedule_.seed, "cell-order", static_cast<std::uint64_t>(epoch)));
      order_rng.shuffle(cell_order);
    }
    for (long step = 0; step < steps_per_epoch; ++step) {
      net_.zero_grad();
      double vad_loss_sum = 0.0;
      double noise_loss_sum = 0.0;
      long frames_total = 0;

      for (int f = 0; f < fpb; ++f) {
        const long forward_idx = step * fpb + f;
        const CellKey& cell = cell_order[forward_idx % cell_order.size()];
        std::vector<const Utterance*> pool = train.cell_files(cell);
        Rng draw_rng(derive_seed(schedule_.seed, "draw", static_cast<std::uint64_t>(epoch),
                                 static_cast<std::uint64_t>(forward_idx)));
        const int count =
            std::min<int>(schedule_.files_per_forward, static_cast<int>(pool.size()));
        const Utterance batch = concat_batch(pool, count, draw_rng);

        ForwardTrace trace = net_.forward(batch.samples, schedule_.train_dn);
        const std::vector<int> vad_labels =
            frame_label_alignment(trace.frames(), batch.vad_labels);
        const std::vector<int> noise_labels(trace.frames(), batch.noise_type);
        // normalizer 1: raw per-frame sums; the step divides by its total
        // frame count below
        const MultitaskLosses losses =
            net_.backward_multitask(trace, vad_labels, noise_labels, schedule_.alpha, 1.0);

        if (!std::isfinite(losses.vad_loss) || !std::isfinite(losses.noise_loss)) {
          if (diag_dir.has_value()) {
            std::filesystem::create_directories(*diag_dir);
            save_checkpoint(net_, *diag_dir / "diverged.ckpt", &opt_);
          }
          throw TrainingDivergedError("non-finite loss at epoch " + std::to_string(epoch) +
                                      " step " + std::to_string(step));
        }
        vad_loss_sum += losses.vad_loss * static_cast<double>(losses.frames);
        noise_loss_sum += losses.noise_loss * static_cast<double>(losses.frames);
        frames_total += losses.frames;
        ++report.forward_passes;
      }

      net_.scale_grad(1.0 / static_cast<double>(frames_total));
      for (std::size_t i = 0; i < params.size(); ++i)
        rmsprop_step(*params[i].values, *params[i].grads, opt_[i], lr, schedule_.rmsprop_rho,
                     schedule_.rmsprop_eps);
      ++report.optimizer_steps;

      report.steps.push_back({static_cast<int>(epoch * steps_per_epoch + step), epoch,
                              vad_loss_sum / static_cast<double>(frames_total),
                              noise_loss_sum / static_cast<double>(frames_total)});
    }
    if (val != nullptr)
      report.epoch_val_auc.push_back(
          pooled_corpus_auc(net_, *val, schedule_.files_per_forward));
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void Trainer::save(const std::filesystem::path& path) { save_checkpoint(net_, path, &opt_); }

Trainer Trainer::restore(const std::filesystem::path& path, TrainSchedule schedule) {
  RestoredCheckpoint restored = load_checkpoint(path);
  Trainer trainer(std::move(restored.net), schedule);
  if (restored.optimizer.has_value()) trainer.opt_ = std::move(*restored.optimizer);
  return trainer;
}

double pooled_corpus_auc(const VadNetwork& net, const LoadedCorpus& corpus,
                         int files_per_concat) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const CellScores& cell : score_corpus(net, corpus, files_per_concat)) {
    scores.insert(scores.end(), cell.scores.begin(), cell.scores.end());
    labels.insert(labels.end(), cell.labels.begin(), cell.labels.end());
  }
  return roc(scores, labels).auc;
}

std::vector<AlphaSweepRow> alpha_sweep(const NetworkConfig& config, const TrainSchedule& base,
                                       const LoadedCorpus& train, const LoadedCorpus& val,
                                       std::span<const double> grid,
                                       const std::optional<std::filesystem::path>& out_dir) {
  // One shared initialization: every run starts from bit-identical parameters.
  VadNetwork init = VadNetwork::build(config);
  init.initialize(base.seed);

  std::vector<AlphaSweepRow> rows;
  for (double alpha : grid) {
    TrainSchedule schedule = base;
    schedule.alpha = alpha;
    Trainer trainer(init, schedule);  // copies the shared initialization
    trainer.run(train, nullptr);
    const ConditionReport report = condition_report(trainer.net(), val);
    if (!report.mean_auc.has_value())
      throw DataError("alpha sweep: validation corpus yields no defined AUC");
    rows.push_back({alpha, *report.mean_auc});
    if (out_dir.has_value()) {
      std::filesystem::create_directories(*out_dir);
      std::ostringstream name;
      name.precision(12);
      name << "alpha_" << alpha << ".ckpt";
      save_checkpoint(trainer.net(), *out_dir / name.str());
    }
  }
  return rows;
}

std::string alpha_sweep_csv(std::span<const AlphaSweepRow> rows) {
  std::ostringstream head, body;
  head << "set";
  body << "synthetic";
  head.precision(12);
  for (const auto& row : rows) {
    head << ',' << row.alpha;
    body << ',' << format_full(row.mean_val_auc);
  }
  return head.str() + "\n" + body.str() + "\n";
}

}  // namespace wavad
