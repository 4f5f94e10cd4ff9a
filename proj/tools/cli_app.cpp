#include "cli_app.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dikf/baselines.hpp"
#include "dikf/data_io.hpp"
#include "dikf/errors.hpp"
#include "dikf/feature_maps.hpp"
#include "dikf/objectives.hpp"
#include "dikf/predictors.hpp"
#include "dikf/serialize.hpp"
#include "dikf/training.hpp"
#include "json.hpp"

namespace dikf::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct DataSpec {
  std::string kind = "blobs";  // blobs | libsvm | csv
  std::string path;
  std::string test_path;
  Index label_column = 0;
  bool header = false;
  // Synthetic-generator keys (blobs only).
  Index dim = 2;
  Index classes = 2;
  Index n_samples = 2000;
  Index test_samples = 500;
  double separation = 3.0;
};

struct ExperimentConfig {
  DataSpec data;
  std::string map_kind = "nystrom";  // nystrom | fourier
  Index size = 32;                   // representative points n or features J
  double gamma = 1.0;
  double rho = 1e-4;
  std::string objective = "di";  // di | ls | ce
  bool scale = true;
  Index batch_size = 1000;
  double lr0 = 1e-3;
  double lr_decay = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double saturation_rel_tol = 1e-3;
  Index max_epochs = 100;  // 0 = write the initialized map untouched
  std::uint64_t seed = 0;
  std::string out_dir;  // empty = $DIKF_OUT or ./runs

  TrainConfig train_config() const {
    TrainConfig tc;
    tc.batch_size = batch_size;
    tc.lr0 = lr0;
    tc.lr_decay = lr_decay;
    tc.adam_beta1 = adam_beta1;
    tc.adam_beta2 = adam_beta2;
    tc.adam_eps = adam_eps;
    tc.saturation_rel_tol = saturation_rel_tol;
    tc.max_epochs = max_epochs;
    tc.seed = seed;
    return tc;
  }
};

json to_json(const ExperimentConfig& cfg) {
  return json{{"dataset",
               {{"kind", cfg.data.kind},
                {"path", cfg.data.path},
                {"test_path", cfg.data.test_path},
                {"label_column", cfg.data.label_column},
                {"header", cfg.data.header},
                {"dim", cfg.data.dim},
                {"classes", cfg.data.classes},
                {"n_samples", cfg.data.n_samples},
                {"test_samples", cfg.data.test_samples},
                {"separation", cfg.data.separation}}},
              {"map", cfg.map_kind},
              {"size", cfg.size},
              {"gamma", cfg.gamma},
              {"rho", cfg.rho},
              {"objective", cfg.objective},
              {"scale", cfg.scale},
              {"batch_size", cfg.batch_size},
              {"lr0", cfg.lr0},
              {"lr_decay", cfg.lr_decay},
              {"adam_beta1", cfg.adam_beta1},
              {"adam_beta2", cfg.adam_beta2},
              {"adam_eps", cfg.adam_eps},
              {"saturation_rel_tol", cfg.saturation_rel_tol},
              {"max_epochs", cfg.max_epochs},
              {"seed", cfg.seed},
              {"out_dir", cfg.out_dir}};
}

template <typename T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + key + "'");
  }
}

void parse_dataset_json(const json& obj, DataSpec& data) {
  for (const auto& [key, v] : obj.items()) {
    if (key == "kind") data.kind = get_as<std::string>(v, key);
    else if (key == "path") data.path = get_as<std::string>(v, key);
    else if (key == "test_path") data.test_path = get_as<std::string>(v, key);
    else if (key == "label_column") data.label_column = get_as<Index>(v, key);
    else if (key == "header") data.header = get_as<bool>(v, key);
    else if (key == "dim") data.dim = get_as<Index>(v, key);
    else if (key == "classes") data.classes = get_as<Index>(v, key);
    else if (key == "n_samples") data.n_samples = get_as<Index>(v, key);
    else if (key == "test_samples") data.test_samples = get_as<Index>(v, key);
    else if (key == "separation") data.separation = get_as<double>(v, key);
    else throw ConfigError("config: unknown dataset key '" + key + "'");
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ConfigError("config: " + path + " is not a JSON object");
  }
  ExperimentConfig cfg;
  for (const auto& [key, v] : j.items()) {
    if (key == "dataset") parse_dataset_json(v, cfg.data);
    else if (key == "map") cfg.map_kind = get_as<std::string>(v, key);
    else if (key == "size") cfg.size = get_as<Index>(v, key);
    else if (key == "gamma") cfg.gamma = get_as<double>(v, key);
    else if (key == "rho") cfg.rho = get_as<double>(v, key);
    else if (key == "objective") cfg.objective = get_as<std::string>(v, key);
    else if (key == "scale") cfg.scale = get_as<bool>(v, key);
    else if (key == "batch_size") cfg.batch_size = get_as<Index>(v, key);
    else if (key == "lr0") cfg.lr0 = get_as<double>(v, key);
    else if (key == "lr_decay") cfg.lr_decay = get_as<double>(v, key);
    else if (key == "adam_beta1") cfg.adam_beta1 = get_as<double>(v, key);
    else if (key == "adam_beta2") cfg.adam_beta2 = get_as<double>(v, key);
    else if (key == "adam_eps") cfg.adam_eps = get_as<double>(v, key);
    else if (key == "saturation_rel_tol")
      cfg.saturation_rel_tol = get_as<double>(v, key);
    else if (key == "max_epochs") cfg.max_epochs = get_as<Index>(v, key);
    else if (key == "seed") cfg.seed = get_as<std::uint64_t>(v, key);
    else if (key == "out_dir") cfg.out_dir = get_as<std::string>(v, key);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.map_kind != "nystrom" && cfg.map_kind != "fourier") {
    throw ConfigError("config: map must be 'nystrom' or 'fourier'");
  }
  if (cfg.objective != "di" && cfg.objective != "ls" && cfg.objective != "ce") {
    throw ConfigError("config: objective must be 'di', 'ls', or 'ce'");
  }
  if (cfg.size < 1) throw ConfigError("config: size must be positive");
  if (cfg.max_epochs < 0) throw ConfigError("config: max_epochs must be >= 0");
  const auto& d = cfg.data;
  if (d.kind == "blobs") {
    if (d.dim < 1 || d.classes < 1 || d.n_samples < 1 || d.test_samples < 0) {
      throw ConfigError("config: blobs sizes must be positive");
    }
  } else if (d.kind == "libsvm" || d.kind == "csv") {
    if (d.path.empty()) throw ConfigError("config: dataset path is required");
  } else {
    throw ConfigError("config: dataset kind must be 'blobs', 'libsvm', or 'csv'");
  }
  validate(KernelConfig{KernelFamily::gaussian, cfg.gamma});
  validate(DIConfig{cfg.rho});
}

// -- Flag plumbing: every subcommand exposes the same config surface, and
// -- flags override whatever the --config file resolved.

struct Flags {
  CLI::App* cmd = nullptr;
  std::string config;
  std::string out_dir;
  std::string map_kind;
  long long size = 0;
  double gamma = 0.0, rho = 0.0;
  std::string objective;
  bool scale = true;
  long long batch_size = 0;
  double lr0 = 0.0, lr_decay = 0.0;
  double adam_beta1 = 0.0, adam_beta2 = 0.0, adam_eps = 0.0;
  double saturation_rel_tol = 0.0;
  long long max_epochs = 0;
  std::uint64_t seed = 0;
  std::string data_kind, data_path, test_path;
  long long label_column = 0;
  bool header = false;
  long long dim = 0, classes = 0, samples = 0, test_samples = 0;
  double separation = 0.0;
};

void register_common(CLI::App* cmd, Flags& f) {
  f.cmd = cmd;
  // A repeated flag overrides its earlier value, so callers can append
  // case-specific settings to a shared base argument list.
  cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  cmd->add_option("--config", f.config, "JSON config file; flags override it");
  cmd->add_option("--out", f.out_dir, "output directory (default $DIKF_OUT or ./runs)");
  cmd->add_option("--map", f.map_kind, "feature map kind: nystrom | fourier");
  cmd->add_option("--size", f.size, "representative points n / Fourier features J");
  cmd->add_option("--gamma", f.gamma, "Gaussian kernel parameter");
  cmd->add_option("--rho", f.rho, "ridge regularizer");
  cmd->add_option("--objective", f.objective, "training objective: di | ls | ce");
  cmd->add_flag("--scale,!--no-scale", f.scale, "min-max scale features to [0,1]");
  cmd->add_option("--batch-size", f.batch_size, "mini-batch size");
  cmd->add_option("--lr0", f.lr0, "initial learning rate");
  cmd->add_option("--lr-decay", f.lr_decay, "learning-rate decay factor");
  cmd->add_option("--adam-beta1", f.adam_beta1, "Adam beta1");
  cmd->add_option("--adam-beta2", f.adam_beta2, "Adam beta2");
  cmd->add_option("--adam-eps", f.adam_eps, "Adam epsilon");
  cmd->add_option("--saturation-rel-tol", f.saturation_rel_tol,
                  "relative improvement below which the epoch mean saturates");
  cmd->add_option("--max-epochs", f.max_epochs, "epoch cap; 0 writes the initialization");
  cmd->add_option("--seed", f.seed, "seed for init, shuffling, and synthesis");
  cmd->add_option("--data-kind", f.data_kind, "dataset kind: blobs | libsvm | csv");
  cmd->add_option("--data", f.data_path, "dataset file (libsvm/csv kinds)");
  cmd->add_option("--test-data", f.test_path, "test split file");
  cmd->add_option("--label-column", f.label_column, "csv label column (0-based)");
  cmd->add_flag("--header", f.header, "csv file starts with a header line");
  cmd->add_option("--dim", f.dim, "blobs: feature dimension");
  cmd->add_option("--classes", f.classes, "blobs: class count");
  cmd->add_option("--samples", f.samples, "blobs: training sample count");
  cmd->add_option("--test-samples", f.test_samples, "blobs: test sample count");
  cmd->add_option("--separation", f.separation, "blobs: class-mean spread");
}

void apply_flags(const Flags& f, ExperimentConfig& cfg) {
  const CLI::App* c = f.cmd;
  if (c->count("--out")) cfg.out_dir = f.out_dir;
  if (c->count("--map")) cfg.map_kind = f.map_kind;
  if (c->count("--size")) cfg.size = static_cast<Index>(f.size);
  if (c->count("--gamma")) cfg.gamma = f.gamma;
  if (c->count("--rho")) cfg.rho = f.rho;
  if (c->count("--objective")) cfg.objective = f.objective;
  if (c->count("--scale")) cfg.scale = f.scale;
  if (c->count("--batch-size")) cfg.batch_size = static_cast<Index>(f.batch_size);
  if (c->count("--lr0")) cfg.lr0 = f.lr0;
  if (c->count("--lr-decay")) cfg.lr_decay = f.lr_decay;
  if (c->count("--adam-beta1")) cfg.adam_beta1 = f.adam_beta1;
  if (c->count("--adam-beta2")) cfg.adam_beta2 = f.adam_beta2;
  if (c->count("--adam-eps")) cfg.adam_eps = f.adam_eps;
  if (c->count("--saturation-rel-tol"))
    cfg.saturation_rel_tol = f.saturation_rel_tol;
  if (c->count("--max-epochs")) cfg.max_epochs = static_cast<Index>(f.max_epochs);
  if (c->count("--seed")) cfg.seed = f.seed;
  if (c->count("--data-kind")) cfg.data.kind = f.data_kind;
  if (c->count("--data")) cfg.data.path = f.data_path;
  if (c->count("--test-data")) cfg.data.test_path = f.test_path;
  if (c->count("--label-column"))
    cfg.data.label_column = static_cast<Index>(f.label_column);
  if (c->count("--header")) cfg.data.header = f.header;
  if (c->count("--dim")) cfg.data.dim = static_cast<Index>(f.dim);
  if (c->count("--classes")) cfg.data.classes = static_cast<Index>(f.classes);
  if (c->count("--samples")) cfg.data.n_samples = static_cast<Index>(f.samples);
  if (c->count("--test-samples"))
    cfg.data.test_samples = static_cast<Index>(f.test_samples);
  if (c->count("--separation")) cfg.data.separation = f.separation;
  // A file path given without an explicit kind implies a file dataset.
  if (c->count("--data") && !c->count("--data-kind") && cfg.data.kind == "blobs") {
    cfg.data.kind = f.data_path.size() > 4 &&
                            f.data_path.substr(f.data_path.size() - 4) == ".csv"
                        ? "csv"
                        : "libsvm";
  }
}

// -- Run directories and manifests.

std::string resolve_out_dir(const ExperimentConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("DIKF_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "runs";
}

fs::path claim_run_dir(const std::string& base) {
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec) throw IoError("cannot create output directory " + base);
  for (int i = 0;; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "run-%04d", i);
    const fs::path dir = fs::path(base) / name;
    if (!fs::exists(dir)) {
      if (!fs::create_directory(dir, ec) || ec) {
        throw IoError("cannot create run directory " + dir.string());
      }
      return dir;
    }
  }
}

void write_manifest(const fs::path& run_dir, const std::string& command,
                    const ExperimentConfig& cfg, const json& extra = {}) {
  json manifest = {{"command", command}, {"config", to_json(cfg)}};
  if (!extra.is_null() && !extra.empty()) manifest["arguments"] = extra;
  std::ofstream out(run_dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + run_dir.string());
  out << manifest.dump(2) << '\n';
}

// -- Dataset assembly.

struct Splits {
  Dataset train;
  std::optional<Dataset> test;
};

// Test labels must mean the same classes as the train labels; files intern
// labels independently, so remap by name.
void align_labels(const Dataset& train, Dataset& test) {
  std::vector<int> remap(test.label_names.size(), -1);
  for (std::size_t t = 0; t < test.label_names.size(); ++t) {
    for (std::size_t c = 0; c < train.label_names.size(); ++c) {
      if (test.label_names[t] == train.label_names[c]) {
        remap[t] = static_cast<int>(c);
        break;
      }
    }
    if (remap[t] < 0) {
      throw ConfigError("test split has label '" + test.label_names[t] +
                        "' never seen in training");
    }
  }
  for (int& label : test.labels) label = remap[static_cast<std::size_t>(label)];
  test.label_names = train.label_names;
  test.class_count = train.class_count;
}

Splits load_splits(const ExperimentConfig& cfg) {
  const DataSpec& d = cfg.data;
  Splits splits;
  if (d.kind == "blobs") {
    // One draw for train+test so both share the class means.
    BlobsConfig bc{d.dim, d.classes, d.n_samples + d.test_samples,
                   d.separation, cfg.seed};
    Dataset all = make_blobs(bc);
    std::vector<Index> train_idx, test_idx;
    for (Index i = 0; i < d.n_samples; ++i) train_idx.push_back(i);
    for (Index i = d.n_samples; i < bc.n_samples; ++i) test_idx.push_back(i);
    auto take = [&](const std::vector<Index>& idx) {
      Dataset out;
      out.x = gather_cols(all.x, idx);
      for (Index i : idx) out.labels.push_back(all.labels[static_cast<std::size_t>(i)]);
      out.label_names = all.label_names;
      out.class_count = all.class_count;
      out.encoding = all.encoding;
      return out;
    };
    splits.train = take(train_idx);
    if (!test_idx.empty()) splits.test = take(test_idx);
  } else if (d.kind == "libsvm") {
    splits.train = load_libsvm(d.path);
    if (!d.test_path.empty()) {
      splits.test = load_libsvm(d.test_path, splits.train.dim());
      align_labels(splits.train, *splits.test);
    }
  } else {
    splits.train = load_csv(d.path, d.label_column, d.header);
    if (!d.test_path.empty()) {
      Dataset test = load_csv(d.test_path, d.label_column, d.header);
      if (test.dim() != splits.train.dim()) {
        throw ConfigError("test split dimension differs from training split");
      }
      align_labels(splits.train, test);
      splits.test = std::move(test);
    }
  }
  if (cfg.scale) {
    std::vector<Dataset*> others;
    if (splits.test) others.push_back(&*splits.test);
    minmax_scale(splits.train, others);
  }
  return splits;
}

// -- Training orchestration shared by train and sweep.

struct TrainOutcome {
  AnyMap map;
  TrainReport report;
  std::optional<LinearHead> head;
};

TrainOutcome run_training(const ExperimentConfig& cfg, const Dataset& train) {
  const KernelConfig kcfg{KernelFamily::gaussian, cfg.gamma};
  const DIConfig dicfg{cfg.rho};

  if (cfg.map_kind == "nystrom") {
    NystromMap init = init_nystrom(train, cfg.size, kcfg, cfg.seed);
    if (cfg.max_epochs == 0) return {std::move(init), {}, std::nullopt};
    const TrainConfig tc = cfg.train_config();
    if (cfg.objective == "di") {
      auto [map, report] = train_nystrom(train, init, tc, dicfg);
      return {std::move(map), std::move(report), std::nullopt};
    }
    if (cfg.objective == "ls") {
      auto [map, head, report] = train_ls(train, init, tc, dicfg);
      return {std::move(map), std::move(report), std::move(head)};
    }
    auto [map, head, report] = train_ce(train, init, tc);
    return {std::move(map), std::move(report), std::move(head)};
  }

  FourierMap init = init_fourier(kcfg, train.dim(), cfg.size, cfg.seed);
  if (cfg.max_epochs == 0) return {std::move(init), {}, std::nullopt};
  const TrainConfig tc = cfg.train_config();
  if (cfg.objective == "di") {
    auto [map, report] = train_fourier(train, init, tc, dicfg);
    return {std::move(map), std::move(report), std::nullopt};
  }
  if (cfg.objective == "ls") {
    auto [map, head, report] = train_ls(train, init, tc, dicfg);
    return {std::move(map), std::move(report), std::move(head)};
  }
  auto [map, head, report] = train_ce(train, init, tc);
  return {std::move(map), std::move(report), std::move(head)};
}

void save_any_map(const AnyMap& map, const std::string& path) {
  if (std::holds_alternative<NystromMap>(map)) {
    save_map(std::get<NystromMap>(map), path);
  } else {
    save_map(std::get<FourierMap>(map), path);
  }
}

json summary_json(const TrainOutcome& outcome) {
  json summary = {{"epochs", outcome.report.epochs.size()},
                  {"stop_reason", to_string(outcome.report.stop_reason)},
                  {"wall_seconds", outcome.report.wall_seconds},
                  {"peak_step_floats", outcome.report.peak_step_floats}};
  if (outcome.report.epochs.empty()) {
    summary["final_mu"] = nullptr;
  } else {
    summary["final_mu"] = outcome.report.epochs.back().mu;
  }
  json decays = json::array();
  for (const LrChange& ch : outcome.report.lr_changes) {
    decays.push_back({{"epoch", ch.epoch}, {"lr", ch.lr}});
  }
  summary["lr_changes"] = decays;
  return summary;
}

int train_into(const ExperimentConfig& cfg, const fs::path& dir) {
  const Splits splits = load_splits(cfg);
  const TrainOutcome outcome = run_training(cfg, splits.train);

  save_any_map(outcome.map, (dir / "map.dikf").string());
  write_report_csv(outcome.report, (dir / "report.csv").string());
  if (outcome.head) {
    save_krr(KRRModel{outcome.head->w, outcome.head->b,
                      cfg.objective == "ls" ? cfg.rho : 0.0},
             (dir / "head.dikf").string());
  }
  const json summary = summary_json(outcome);
  std::ofstream out(dir / "summary.json");
  if (!out) throw IoError("cannot write summary in " + dir.string());
  out << summary.dump(2) << '\n';

  std::cout << "trained " << cfg.map_kind << " map (size " << cfg.size
            << ", objective " << cfg.objective << ") -> " << dir.string()
            << "\n  epochs " << outcome.report.epochs.size() << ", stop "
            << to_string(outcome.report.stop_reason);
  if (!outcome.report.epochs.empty()) {
    std::cout << ", final mu " << outcome.report.epochs.back().mu;
  }
  std::cout << ", wall " << outcome.report.wall_seconds << " s\n";
  return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
  const fs::path dir = claim_run_dir(resolve_out_dir(cfg));
  write_manifest(dir, "train", cfg);
  return train_into(cfg, dir);
}

// -- eval

struct EvalMetrics {
  double train_mse = 0.0, test_mse = 0.0;
  double train_acc = 0.0, test_acc = 0.0;
};

Matrix features_of(const AnyMap& map, const Matrix& x) {
  if (std::holds_alternative<NystromMap>(map)) {
    return nystrom_features(x, std::get<NystromMap>(map));
  }
  return rf_features(x, std::get<FourierMap>(map));
}

Index map_input_dim(const AnyMap& map) {
  return std::holds_alternative<NystromMap>(map)
             ? std::get<NystromMap>(map).input_dim()
             : std::get<FourierMap>(map).input_dim();
}

EvalMetrics eval_map(const AnyMap& map, const Splits& splits, double rho) {
  if (map_input_dim(map) != splits.train.dim()) {
    throw ConfigError("map artifact expects dimension " +
                      std::to_string(map_input_dim(map)) +
                      " but the dataset has " +
                      std::to_string(splits.train.dim()));
  }
  if (!splits.test) {
    throw ConfigError("eval needs a test split (test_path or test_samples)");
  }
  std::vector<Index> all_train(static_cast<std::size_t>(splits.train.n_samples()));
  for (Index i = 0; i < splits.train.n_samples(); ++i) {
    all_train[static_cast<std::size_t>(i)] = i;
  }
  std::vector<Index> all_test(static_cast<std::size_t>(splits.test->n_samples()));
  for (Index i = 0; i < splits.test->n_samples(); ++i) {
    all_test[static_cast<std::size_t>(i)] = i;
  }

  const Matrix ftr = features_of(map, splits.train.x);
  const Matrix fte = features_of(map, splits.test->x);
  const Targets ytr = targets_for(splits.train, all_train);
  const Targets yte = targets_for(*splits.test, all_test);

  const KRRModel model = krr_fit(ftr, ytr, DIConfig{rho});
  const Matrix str = krr_predict(model, ftr);
  const Matrix ste = krr_predict(model, fte);

  EvalMetrics m;
  m.train_mse = mse(str, ytr.y);
  m.test_mse = mse(ste, yte.y);
  m.train_acc = accuracy(classify(str), splits.train.labels);
  m.test_acc = accuracy(classify(ste), splits.test->labels);
  return m;
}

void write_metrics_csv(const EvalMetrics& m, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17)
      << "split,mse,accuracy\n"
      << "train," << m.train_mse << ',' << m.train_acc << '\n'
      << "test," << m.test_mse << ',' << m.test_acc << '\n';
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& map_file) {
  if (map_file.empty()) {
    throw ConfigError("eval: --map-file is required");
  }
  const AnyMap map = load_map(map_file);
  const Splits splits = load_splits(cfg);
  const EvalMetrics m = eval_map(map, splits, cfg.rho);

  const fs::path dir = claim_run_dir(resolve_out_dir(cfg));
  write_manifest(dir, "eval", cfg, json{{"map_file", map_file}});
  write_metrics_csv(m, dir / "metrics.csv");

  std::cout << "eval " << map_file << " -> " << dir.string() << '\n'
            << "  split   mse          accuracy\n"
            << "  train   " << m.train_mse << "   " << m.train_acc << '\n'
            << "  test    " << m.test_mse << "   " << m.test_acc << '\n';
  return 0;
}

// -- gradcheck

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

int cmd_gradcheck(const ExperimentConfig& cfg, bool corrupt) {
  // Fixed desk-size instance; the config contributes seed, gamma, rho, and
  // the map kind under test.
  const Index d = 5, nb = 20, m = 4;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix x(d, nb);
  for (Index c = 0; c < nb; ++c) {
    for (Index r = 0; r < d; ++r) x(r, c) = normal(rng);
  }
  std::vector<int> labels;
  for (Index i = 0; i < nb; ++i) labels.push_back(static_cast<int>(i % 2));
  const Targets targets = one_hot(labels, 2, TargetEncoding::one_hot);
  const KernelConfig kcfg{KernelFamily::gaussian, cfg.gamma};
  const DIConfig dicfg{cfg.rho};
  const double h = 1e-5;

  double analytic_max = 0.0, deviation = 0.0;
  if (cfg.map_kind == "nystrom") {
    Matrix points(d, m);
    for (Index c = 0; c < m; ++c) {
      for (Index r = 0; r < d; ++r) points(r, c) = normal(rng);
    }
    const NystromMap map(points, kcfg);
    NysDiGrad grad = grad_nys_di(x, targets, map, dicfg);
    if (corrupt) grad.dpoints(0, 0) += 1e-2;
    Matrix fd(d, m);
    for (Index c = 0; c < m; ++c) {
      for (Index r = 0; r < d; ++r) {
        Matrix hi = points, lo = points;
        hi(r, c) += h;
        lo(r, c) -= h;
        fd(r, c) = (nys_di(x, targets, map.with_points(hi), dicfg) -
                    nys_di(x, targets, map.with_points(lo), dicfg)) /
                   (2.0 * h);
      }
    }
    analytic_max = std::max(max_abs(fd), 1e-10);
    deviation = max_abs(grad.dpoints - fd) / analytic_max;
  } else {
    const FourierMap map = init_fourier(kcfg, d, m, cfg.seed);
    RfDiGrad grad = grad_rf_di(x, targets, map, dicfg);
    if (corrupt) grad.dw(0, 0) += 1e-2;
    Matrix fd_w(d, m);
    for (Index c = 0; c < m; ++c) {
      for (Index r = 0; r < d; ++r) {
        FourierMap hi = map, lo = map;
        hi.w(r, c) += h;
        lo.w(r, c) -= h;
        fd_w(r, c) =
            (rf_di(x, targets, hi, dicfg) - rf_di(x, targets, lo, dicfg)) /
            (2.0 * h);
      }
    }
    Vector fd_p(m);
    for (Index r = 0; r < m; ++r) {
      FourierMap hi = map, lo = map;
      hi.phase(r) += h;
      lo.phase(r) -= h;
      fd_p(r) =
          (rf_di(x, targets, hi, dicfg) - rf_di(x, targets, lo, dicfg)) /
          (2.0 * h);
    }
    analytic_max = std::max({max_abs(fd_w), fd_p.cwiseAbs().maxCoeff(), 1e-10});
    deviation = std::max(max_abs(grad.dw - fd_w),
                         (grad.dphase - fd_p).cwiseAbs().maxCoeff()) /
                analytic_max;
  }

  const fs::path dir = claim_run_dir(resolve_out_dir(cfg));
  write_manifest(dir, "gradcheck", cfg, json{{"corrupt", corrupt}});
  const bool pass = deviation < 1e-4;
  std::ofstream rec(dir / "gradcheck.txt");
  rec << cfg.map_kind << " max relative deviation " << deviation << ' '
      << (pass ? "pass" : "FAIL") << '\n';
  std::cout << cfg.map_kind
            << " gradient check: max relative deviation " << deviation << " -> "
            << (pass ? "pass" : "FAIL") << '\n';
  return pass ? 0 : 1;
}

// -- sweep

int cmd_sweep(const ExperimentConfig& cfg, std::vector<long long> sizes) {
  if (sizes.empty()) throw ConfigError("sweep: --sizes must be nonempty");
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  for (long long s : sizes) {
    if (s < 1) throw ConfigError("sweep: sizes must be positive");
  }

  const fs::path dir = claim_run_dir(resolve_out_dir(cfg));
  write_manifest(dir, "sweep", cfg, json{{"sizes", sizes}});
  std::ofstream table(dir / "sweep.csv");
  if (!table) throw IoError("cannot write sweep table in " + dir.string());
  table << "j,objective,final_mu,train_mse,test_mse,train_accuracy,"
           "test_accuracy\n"
        << std::setprecision(17);
  std::cout << "sweep -> " << dir.string() << '\n'
            << "  j    objective  final_mu      test_mse      test_acc\n";

  for (long long s : sizes) {
    ExperimentConfig sub = cfg;
    sub.size = static_cast<Index>(s);
    const fs::path sub_dir = dir / ("j-" + std::to_string(s));
    std::error_code ec;
    fs::create_directory(sub_dir, ec);
    if (ec) throw IoError("cannot create " + sub_dir.string());

    const Splits splits = load_splits(sub);
    const TrainOutcome outcome = run_training(sub, splits.train);
    save_any_map(outcome.map, (sub_dir / "map.dikf").string());
    write_report_csv(outcome.report, (sub_dir / "report.csv").string());
    const EvalMetrics m = eval_map(outcome.map, splits, sub.rho);
    write_metrics_csv(m, sub_dir / "metrics.csv");

    const double final_mu = outcome.report.epochs.empty()
                                ? std::numeric_limits<double>::quiet_NaN()
                                : outcome.report.epochs.back().mu;
    table << s << ',' << sub.objective << ',' << final_mu << ',' << m.train_mse
          << ',' << m.test_mse << ',' << m.train_acc << ',' << m.test_acc
          << '\n';
    table.flush();  // partial results survive a later sub-run failure
    std::cout << "  " << s << "  " << sub.objective << "  " << final_mu << "  "
              << m.test_mse << "  " << m.test_acc << '\n';
  }
  return 0;
}

// -- synth

int cmd_synth(const ExperimentConfig& cfg) {
  if (cfg.data.kind != "blobs") {
    throw ConfigError("synth: dataset kind must be 'blobs'");
  }
  const fs::path dir = claim_run_dir(resolve_out_dir(cfg));
  write_manifest(dir, "synth", cfg);

  ExperimentConfig raw = cfg;
  raw.scale = false;  // emit raw coordinates; scaling is a training concern
  const Splits splits = load_splits(raw);
  const fs::path train_path = dir / "train.libsvm";
  save_libsvm(splits.train, train_path.string());
  std::cout << "wrote " << train_path.string() << " (" << splits.train.n_samples()
            << " samples, " << splits.train.dim() << " features, "
            << splits.train.class_count << " classes)\n";
  if (splits.test) {
    const fs::path test_path = dir / "test.libsvm";
    save_libsvm(*splits.test, test_path.string());
    std::cout << "wrote " << test_path.string() << " (" << splits.test->n_samples()
              << " samples)\n";
  }
  return 0;
}

int run_parsed(int argc, char** argv) {
  CLI::App app{"Supervised kernel-feature learning via discriminant information"};
  app.require_subcommand(1);

  Flags tf, ef, gf, sf, yf;
  CLI::App* train = app.add_subcommand("train", "train a feature map");
  register_common(train, tf);
  CLI::App* eval = app.add_subcommand(
      "eval", "fit ridge regression on a saved map and report metrics");
  register_common(eval, ef);
  std::string map_file;
  eval->add_option("--map-file", map_file, "trained map artifact");
  CLI::App* grad = app.add_subcommand(
      "gradcheck", "compare analytic gradients against finite differences");
  register_common(grad, gf);
  bool corrupt = false;
  grad->add_flag("--corrupt", corrupt, "test hook: bias the analytic gradient");
  CLI::App* sweep = app.add_subcommand(
      "sweep", "train+eval across feature dimensionalities");
  register_common(sweep, sf);
  std::vector<long long> sizes;
  sweep->add_option("--sizes", sizes, "dimensionalities, e.g. 8,16,32")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic dataset");
  register_common(synth, yf);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  const Flags* flags = nullptr;
  if (train->parsed()) flags = &tf;
  else if (eval->parsed()) flags = &ef;
  else if (grad->parsed()) flags = &gf;
  else if (sweep->parsed()) flags = &sf;
  else flags = &yf;

  ExperimentConfig cfg;
  if (!flags->config.empty()) cfg = load_config_file(flags->config);
  apply_flags(*flags, cfg);
  validate(cfg);

  if (train->parsed()) return cmd_train(cfg);
  if (eval->parsed()) return cmd_eval(cfg, map_file);
  if (grad->parsed()) return cmd_gradcheck(cfg, corrupt);
  if (sweep->parsed()) return cmd_sweep(cfg, sizes);
  return cmd_synth(cfg);
}

}  // namespace

int run(int argc, char** argv) {
  try {
    return run_parsed(argc, argv);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace dikf::cli
