// Command-line front end: corpus synthesis, training, alpha sweeps,
// evaluation, delay tables and plots. Exit codes: 0 success, 1 runtime
// failure, 2 usage error. Every run writes a config echo under --out-dir.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wavad/checkpoint.hpp"
#include "wavad/corpus.hpp"
#include "wavad/delay.hpp"
#include "wavad/errors.hpp"
#include "wavad/evaluator.hpp"
#include "wavad/model.hpp"
#include "wavad/plot.hpp"
#include "wavad/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw wavad::FormatError("cannot write " + path.string());
  os << text;
}

void write_echo(const fs::path& out_dir, const std::string& command, const ordered_json& args) {
  ordered_json echo;
  echo["command"] = command;
  echo["args"] = args;
  write_text(out_dir / "config_echo.json", echo.dump(2) + "\n");
}

void require_exists(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw UsageError(what + " not found: " + path.string());
}

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> grid;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    grid.push_back(std::stod(tok));
  }
  if (grid.empty()) throw UsageError("empty grid: " + csv);
  return grid;
}

wavad::NetworkConfig load_network_config(const std::string& config_path, int corpus_fs) {
  if (config_path.empty()) return wavad::NetworkConfig::for_sample_rate(corpus_fs);
  require_exists(config_path, "config file");
  std::ifstream is(config_path);
  std::stringstream buf;
  buf << is.rdbuf();
  wavad::NetworkConfig cfg = wavad::NetworkConfig::from_json(buf.str());
  if (corpus_fs != 0 && cfg.fs != corpus_fs)
    throw UsageError("config fs " + std::to_string(cfg.fs) + " does not match corpus fs " +
                     std::to_string(corpus_fs));
  return cfg;
}

int corpus_sample_rate(const wavad::LoadedCorpus& corpus) {
  return corpus.files.empty() ? 0 : corpus.files.front().fs;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out_dir = "wavad_out";
  wavad::CorpusParams params;
  std::string noise_kinds_csv = "white,pink,hum,speech_shaped";
  std::string train_snrs_csv = "20,15,10,5";
  std::string eval_snrs_csv = "20,15,10,5,0,-5";
};

int run_synth(const SynthArgs& args) {
  wavad::CorpusParams params = args.params;
  params.noise_kinds.clear();
  std::stringstream ss(args.noise_kinds_csv);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) params.noise_kinds.push_back(tok);
  params.train_snrs = parse_grid(args.train_snrs_csv);
  params.eval_snrs = parse_grid(args.eval_snrs_csv);

  fs::create_directories(args.out_dir);
  wavad::synth_corpus(params, args.out_dir);

  ordered_json echo;
  echo["fs"] = params.fs;
  echo["files_per_train_cell"] = params.files_per_train_cell;
  echo["files_per_eval_cell"] = params.files_per_eval_cell;
  echo["noise_kinds"] = params.noise_kinds;
  echo["train_snrs"] = params.train_snrs;
  echo["eval_snrs"] = params.eval_snrs;
  echo["speech_fraction"] = params.speech_fraction;
  echo["min_duration_s"] = params.min_duration_s;
  echo["max_duration_s"] = params.max_duration_s;
  echo["seed"] = params.seed;
  write_echo(args.out_dir, "synth-corpus", echo);
  std::cout << "corpus written to " << args.out_dir << "\n";
  return 0;
}

struct TrainArgs {
  std::string corpus_dir;
  std::string out_dir = "wavad_out";
  std::string config_path;
  std::string resume_path;
  int from_epoch = 0;
  wavad::TrainSchedule schedule;
  double alpha = -1.0;  // negative: keep the config's value
  bool no_val = false;
  bool no_dn = false;
};

int run_train(const TrainArgs& args) {
  require_exists(args.corpus_dir, "corpus directory");
  require_exists(fs::path(args.corpus_dir) / "manifest_train.csv", "training manifest");
  const wavad::LoadedCorpus train =
      wavad::LoadedCorpus::load(fs::path(args.corpus_dir) / "manifest_train.csv");
  if (train.files.empty()) throw wavad::DataError("training manifest is empty");

  std::optional<wavad::LoadedCorpus> val;
  const fs::path val_manifest = fs::path(args.corpus_dir) / "manifest_val.csv";
  if (!args.no_val && fs::exists(val_manifest)) val = wavad::LoadedCorpus::load(val_manifest);

  wavad::TrainSchedule schedule = args.schedule;
  schedule.train_dn = !args.no_dn;

  fs::create_directories(args.out_dir);

  std::optional<wavad::Trainer> trainer;
  if (!args.resume_path.empty()) {
    require_exists(args.resume_path, "resume checkpoint");
    if (args.alpha >= 0.0) schedule.alpha = args.alpha;
    trainer.emplace(wavad::Trainer::restore(args.resume_path, schedule));
  } else {
    wavad::NetworkConfig cfg = load_network_config(args.config_path, corpus_sample_rate(train));
    cfg.n_noise_types = std::max(1, static_cast<int>(train.noise_kind_names.size()) - 1);
    if (args.alpha >= 0.0) cfg.alpha = args.alpha;
    schedule.alpha = cfg.alpha;
    wavad::VadNetwork net = wavad::VadNetwork::build(cfg);
    net.initialize(schedule.seed);
    trainer.emplace(std::move(net), schedule);
  }

  const wavad::TrainReport report =
      trainer->run(train, val ? &*val : nullptr, args.from_epoch, fs::path(args.out_dir));

  trainer->save(fs::path(args.out_dir) / "checkpoint.ckpt");
  write_text(fs::path(args.out_dir) / "train_report.csv", report.csv());
  write_text(fs::path(args.out_dir) / "val_auc.csv", report.val_auc_csv());
  write_text(fs::path(args.out_dir) / "summary.txt", report.summary());
  write_text(fs::path(args.out_dir) / "config_echo.json", report.config_echo + "\n");
  std::cout << report.summary();
  return 0;
}

struct SweepArgs {
  std::string corpus_dir;
  std::string out_dir = "wavad_out";
  std::string config_path;
  std::string grid_csv = "0,0.01,0.1,1,10,100";
  wavad::TrainSchedule schedule;
};

int run_sweep(const SweepArgs& args) {
  require_exists(args.corpus_dir, "corpus directory");
  require_exists(fs::path(args.corpus_dir) / "manifest_train.csv", "training manifest");
  require_exists(fs::path(args.corpus_dir) / "manifest_val.csv", "validation manifest");
  const wavad::LoadedCorpus train =
      wavad::LoadedCorpus::load(fs::path(args.corpus_dir) / "manifest_train.csv");
  const wavad::LoadedCorpus val =
      wavad::LoadedCorpus::load(fs::path(args.corpus_dir) / "manifest_val.csv");

  wavad::NetworkConfig cfg = load_network_config(args.config_path, corpus_sample_rate(train));
  cfg.n_noise_types = std::max(1, static_cast<int>(train.noise_kind_names.size()) - 1);
  const std::vector<double> grid = parse_grid(args.grid_csv);

  fs::create_directories(args.out_dir);
  const auto rows =
      wavad::alpha_sweep(cfg, args.schedule, train, val, grid, fs::path(args.out_dir));
  const std::string csv = wavad::alpha_sweep_csv(rows);
  write_text(fs::path(args.out_dir) / "alpha_sweep.csv", csv);

  ordered_json echo;
  echo["grid"] = grid;
  echo["network"] = ordered_json::parse(cfg.to_json());
  echo["seed"] = args.schedule.seed;
  echo["epochs"] = args.schedule.epochs;
  write_echo(args.out_dir, "sweep-alpha", echo);
  std::cout << csv;
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string manifest;
  std::string out_dir = "wavad_out";
  wavad::EvalOptions options;
};

int run_eval(const EvalArgs& args) {
  require_exists(args.checkpoint, "checkpoint");
  require_exists(args.manifest, "manifest");
  wavad::RestoredCheckpoint restored = wavad::load_checkpoint(args.checkpoint);
  const wavad::LoadedCorpus corpus = wavad::LoadedCorpus::load(args.manifest);
  const wavad::ConditionReport report =
      wavad::condition_report(restored.net, corpus, args.options);

  fs::create_directories(args.out_dir);
  write_text(fs::path(args.out_dir) / "report.csv", report.summary_csv());
  write_text(fs::path(args.out_dir) / "cells.csv", report.cells_csv());

  ordered_json echo;
  echo["checkpoint"] = args.checkpoint;
  echo["manifest"] = args.manifest;
  echo["files_per_concat"] = args.options.files_per_concat;
  echo["pool_noise_types"] = args.options.pool_noise_types;
  echo["per_file_auc"] = args.options.per_file_auc;
  echo["network"] = ordered_json::parse(restored.net.config.to_json());
  write_echo(args.out_dir, "eval", echo);
  std::cout << report.summary_csv();
  return 0;
}

struct DelayTableArgs {
  std::string out_dir = "wavad_out";
  int fs = 8000;
  std::string mode = "window";
  std::vector<int> eb = {30, 30, 80, 153};
  std::vector<std::string> db_triples;  // "a,b,c" each; empty -> studied grid
};

int run_delay_table(const DelayTableArgs& args) {
  wavad::DelaySpec spec;
  spec.fs = args.fs;
  spec.mode = wavad::delay_mode_from_string(args.mode);
  if (args.eb.size() != 4) throw UsageError("--eb needs exactly 4 kernel sizes");
  for (int i = 0; i < 4; ++i) spec.eb_kernels[i] = args.eb[i];

  std::vector<std::array<int, 3>> grid;
  if (args.db_triples.empty()) {
    const auto d = wavad::default_db_kernel_grid();
    grid.assign(d.begin(), d.end());
  } else {
    for (const std::string& triple : args.db_triples) {
      std::stringstream ss(triple);
      std::array<int, 3> db{};
      char sep = 0;
      if (!(ss >> db[0] >> sep >> db[1] >> sep >> db[2]))
        throw UsageError("bad --db triple: " + triple);
      grid.push_back(db);
    }
  }

  const std::string csv = wavad::delay_table_csv(spec, grid);
  std::cout << csv;
  fs::create_directories(args.out_dir);
  write_text(fs::path(args.out_dir) / "delay_table.csv", csv);

  ordered_json echo;
  echo["fs"] = args.fs;
  echo["mode"] = args.mode;
  echo["eb_kernels"] = args.eb;
  echo["rows"] = grid.size();
  write_echo(args.out_dir, "delay-table", echo);
  return 0;
}

struct RocPlotArgs {
  std::string checkpoint;
  std::string manifest;
  std::string out_dir = "wavad_out";
  std::string delay_curve_list;  // optional: "db1,db2,db3,checkpoint" lines
  int files_per_concat = 10;
};

int run_roc_plot(const RocPlotArgs& args) {
  require_exists(args.manifest, "manifest");
  const wavad::LoadedCorpus corpus = wavad::LoadedCorpus::load(args.manifest);
  fs::create_directories(args.out_dir);

  ordered_json echo;
  echo["manifest"] = args.manifest;

  if (!args.checkpoint.empty()) {
    require_exists(args.checkpoint, "checkpoint");
    wavad::RestoredCheckpoint restored = wavad::load_checkpoint(args.checkpoint);
    const auto cells = wavad::score_corpus(restored.net, corpus, args.files_per_concat);

    // one pooled ROC curve per SNR column, clean first
    std::vector<std::optional<double>> snrs;
    for (const auto& c : cells)
      if (std::find(snrs.begin(), snrs.end(), c.key.snr_db) == snrs.end())
        snrs.push_back(c.key.snr_db);
    std::sort(snrs.begin(), snrs.end(),
              [](const std::optional<double>& a, const std::optional<double>& b) {
                if (a.has_value() != b.has_value()) return !a.has_value();
                if (!a.has_value()) return false;
                return *a > *b;
              });

    std::vector<wavad::PlotSeries> series;
    for (const auto& snr : snrs) {
      std::vector<double> scores;
      std::vector<int> labels;
      for (const auto& c : cells) {
        if (c.key.snr_db != snr) continue;
        scores.insert(scores.end(), c.scores.begin(), c.scores.end());
        labels.insert(labels.end(), c.labels.begin(), c.labels.end());
      }
      if (scores.empty()) continue;
      const wavad::RocCurve curve = wavad::roc(scores, labels);
      std::ostringstream name;
      if (snr.has_value())
        name << *snr << " dB";
      else
        name << "clean";
      name << " (auc " << std::fixed << std::setprecision(3) << curve.auc << ")";
      wavad::PlotSeries s;
      s.name = name.str();
      for (std::size_t i = 0; i < curve.fpr.size(); ++i)
        s.points.emplace_back(curve.fpr[i], curve.tpr[i]);
      series.push_back(std::move(s));
    }
    wavad::PlotOptions options;
    options.title = "ROC per SNR";
    options.x_label = "false positive rate";
    options.y_label = "true positive rate";
    wavad::write_svg_plot(fs::path(args.out_dir) / "roc.svg", series, options);
    echo["checkpoint"] = args.checkpoint;
  }

  if (!args.delay_curve_list.empty()) {
    require_exists(args.delay_curve_list, "delay curve list");
    std::ifstream is(args.delay_curve_list);
    std::vector<wavad::DelayCurveEntry> entries;
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      wavad::DelayCurveEntry e;
      char sep = 0;
      std::string ckpt;
      if (!(ss >> e.db_kernels[0] >> sep >> e.db_kernels[1] >> sep >> e.db_kernels[2] >> sep) ||
          !std::getline(ss, ckpt))
        throw UsageError("bad delay-curve line: " + line);
      e.checkpoint = ckpt;
      entries.push_back(std::move(e));
    }
    wavad::DelaySpec base;
    base.fs = corpus_sample_rate(corpus);
    const auto rows = wavad::delay_performance_curve(entries, corpus, base);
    write_text(fs::path(args.out_dir) / "delay_curve.csv", wavad::delay_curve_csv(rows));
    wavad::PlotSeries s;
    s.name = "mean AUC";
    for (const auto& row : rows)
      if (row.mean_auc.has_value()) s.points.emplace_back(row.delay_ms, *row.mean_auc);
    if (!s.points.empty()) {
      wavad::PlotOptions options;
      options.title = "AUC vs algorithmic delay";
      options.x_label = "algorithmic delay [ms]";
      options.y_label = "mean AUC";
      wavad::write_svg_plot(fs::path(args.out_dir) / "auc_vs_delay.svg", {s}, options);
    }
    echo["delay_curve_list"] = args.delay_curve_list;
  }

  if (args.checkpoint.empty() && args.delay_curve_list.empty())
    throw UsageError("roc-plot needs --checkpoint and/or --delay-curve-list");
  write_echo(args.out_dir, "roc-plot", echo);
  return 0;
}

void add_schedule_flags(CLI::App* cmd, wavad::TrainSchedule& s) {
  cmd->add_option("--epochs", s.epochs, "training epochs");
  cmd->add_option("--lr0", s.lr0, "initial learning rate");
  cmd->add_option("--lr-decay", s.lr_decay, "per-epoch learning-rate factor");
  cmd->add_option("--forwards-per-backward", s.forwards_per_backward,
                  "forward passes accumulated per optimizer step");
  cmd->add_option("--files-per-forward", s.files_per_forward,
                  "files concatenated per forward pass");
  cmd->add_option("--seed", s.seed, "random seed");
  cmd->add_option("--rmsprop-rho", s.rmsprop_rho, "squared-gradient decay");
  cmd->add_option("--rmsprop-eps", s.rmsprop_eps, "denominator epsilon");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"waveform voice activity detector with adversarial multi-task training"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth-corpus", "generate a synthetic corpus");
  synth_cmd->add_option("--out-dir", synth.out_dir, "output directory");
  synth_cmd->add_option("--fs", synth.params.fs, "sampling rate (multiple of 100)");
  synth_cmd->add_option("--files", synth.params.files_per_train_cell,
                        "files per training (noise, snr) cell");
  synth_cmd->add_option("--eval-files", synth.params.files_per_eval_cell,
                        "files per val/test cell");
  synth_cmd->add_option("--noise-kinds", synth.noise_kinds_csv, "comma-separated noise kinds");
  synth_cmd->add_option("--train-snrs", synth.train_snrs_csv, "training SNRs in dB");
  synth_cmd->add_option("--eval-snrs", synth.eval_snrs_csv, "val/test SNRs in dB");
  synth_cmd->add_option("--speech-fraction", synth.params.speech_fraction,
                        "target fraction of speech frames");
  synth_cmd->add_option("--min-duration", synth.params.min_duration_s,
                        "file duration lower bound [s]");
  synth_cmd->add_option("--max-duration", synth.params.max_duration_s,
                        "file duration upper bound [s]");
  synth_cmd->add_option("--seed", synth.params.seed, "random seed");

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train a detector on a corpus");
  train_cmd->add_option("--corpus", train.corpus_dir, "corpus directory with manifests")
      ->required();
  train_cmd->add_option("--out-dir", train.out_dir, "output directory");
  train_cmd->add_option("--config", train.config_path, "network config JSON");
  train_cmd->add_option("--alpha", train.alpha, "adversarial gradient scale");
  train_cmd->add_option("--resume", train.resume_path, "checkpoint to resume from");
  train_cmd->add_option("--from-epoch", train.from_epoch, "first epoch to run (with --resume)");
  train_cmd->add_flag("--no-val", train.no_val, "skip per-epoch validation AUC");
  train_cmd->add_flag("--no-dn", train.no_dn, "train without the discriminator");
  add_schedule_flags(train_cmd, train.schedule);

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep-alpha", "train one model per alpha value");
  sweep_cmd->add_option("--corpus", sweep.corpus_dir, "corpus directory")->required();
  sweep_cmd->add_option("--out-dir", sweep.out_dir, "output directory");
  sweep_cmd->add_option("--config", sweep.config_path, "network config JSON");
  sweep_cmd->add_option("--grid", sweep.grid_csv, "comma-separated alpha values");
  add_schedule_flags(sweep_cmd, sweep.schedule);

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "per-condition AUC report");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "trained checkpoint")->required();
  eval_cmd->add_option("--manifest", eval.manifest, "corpus manifest CSV")->required();
  eval_cmd->add_option("--out-dir", eval.out_dir, "output directory");
  eval_cmd->add_option("--files-per-concat", eval.options.files_per_concat,
                       "files concatenated per forward pass");
  eval_cmd->add_flag("--pool-noise", eval.options.pool_noise_types,
                     "pool frames across noise types per SNR");
  eval_cmd->add_flag("--per-file", eval.options.per_file_auc,
                     "average per-file AUCs instead of pooling frames");

  DelayTableArgs delay;
  CLI::App* delay_cmd = app.add_subcommand("delay-table", "algorithmic delay per kernel config");
  delay_cmd->add_option("--out-dir", delay.out_dir, "output directory");
  delay_cmd->add_option("--fs", delay.fs, "sampling rate");
  delay_cmd->add_option("--mode", delay.mode, "delay convention: window or shrink");
  delay_cmd->add_option("--eb", delay.eb, "four encoder kernel sizes")->expected(4);
  delay_cmd->add_option("--db", delay.db_triples,
                        "decoder kernel triple 'a,b,c' (repeatable; default: studied grid)");

  RocPlotArgs plot;
  CLI::App* plot_cmd = app.add_subcommand("roc-plot", "ROC curves and AUC-vs-delay plots");
  plot_cmd->add_option("--checkpoint", plot.checkpoint, "trained checkpoint");
  plot_cmd->add_option("--manifest", plot.manifest, "corpus manifest CSV")->required();
  plot_cmd->add_option("--out-dir", plot.out_dir, "output directory");
  plot_cmd->add_option("--files-per-concat", plot.files_per_concat, "files per forward pass");
  plot_cmd->add_option("--delay-curve-list", plot.delay_curve_list,
                       "file of 'db1,db2,db3,checkpoint' rows for the delay curve");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth);
    if (train_cmd->parsed()) return run_train(train);
    if (sweep_cmd->parsed()) return run_sweep(sweep);
    if (eval_cmd->parsed()) return run_eval(eval);
    if (delay_cmd->parsed()) return run_delay_table(delay);
    if (plot_cmd->parsed()) return run_roc_plot(plot);
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
