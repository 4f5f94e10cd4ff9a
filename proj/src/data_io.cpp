#include "dikf/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "dikf/errors.hpp"

namespace dikf {

namespace {

struct LabelInterner {
  std::unordered_map<std::string, int> ids;
  std::vector<std::string> names;

  int intern(const std::string& token) {
    auto it = ids.find(token);
    if (it != ids.end()) return it->second;
    const int id = static_cast<int>(names.size());
    ids.emplace(token, id);
    names.push_back(token);
    return id;
  }
};

double parse_double(const std::string& token, const std::string& path,
                    std::size_t line_no) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &pos);
  } catch (const std::exception&) {
    throw IoError(path + ":" + std::to_string(line_no) +
                  ": expected a number, got '" + token + "'");
  }
  if (pos != token.size()) {
    throw IoError(path + ":" + std::to_string(line_no) +
                  ": trailing characters in number '" + token + "'");
  }
  return value;
}

}  // namespace

Dataset load_libsvm(const std::string& path, std::optional<Index> force_dim) {
  std::ifstream in(path);
  if (!in) throw IoError("load_libsvm: cannot open " + path);

  struct Entry {
    Index index;
    double value;
  };
  std::vector<std::vector<Entry>> rows;
  LabelInterner labels;
  std::vector<int> label_ids;
  Index max_index = 0;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;  // blank line

    parse_double(token, path, line_no);  // labels must be numeric
    label_ids.push_back(labels.intern(token));
    rows.emplace_back();

    while (ls >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon + 1 == token.size()) {
        throw IoError(path + ":" + std::to_string(line_no) +
                      ": malformed feature '" + token + "'");
      }
      const double idx_raw =
          parse_double(token.substr(0, colon), path, line_no);
      const Index idx = static_cast<Index>(idx_raw);
      if (idx < 1 || static_cast<double>(idx) != idx_raw) {
        throw IoError(path + ":" + std::to_string(line_no) +
                      ": feature indices are 1-based integers");
      }
      if (force_dim && idx > *force_dim) {
        throw IoError(path + ":" + std::to_string(line_no) +
                      ": feature index " + std::to_string(idx) +
                      " exceeds the declared dimension " +
                      std::to_string(*force_dim));
      }
      const double value = parse_double(token.substr(colon + 1), path, line_no);
      rows.back().push_back({idx, value});
      max_index = std::max(max_index, idx);
    }
  }
  if (rows.empty()) throw IoError("load_libsvm: no samples in " + path);

  const Index dim = force_dim ? *force_dim : max_index;
  if (dim < 1) throw IoError("load_libsvm: no features in " + path);

  Dataset data;
  data.x = Matrix::Zero(dim, static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const Entry& e : rows[i]) {
      data.x(e.index - 1, static_cast<Index>(i)) = e.value;
    }
  }
  data.labels = std::move(label_ids);
  data.label_names = std::move(labels.names);
  data.class_count = static_cast<Index>(data.label_names.size());
  return data;
}

void save_libsvm(const Dataset& data, const std::string& path) {
  if (!data.classification()) {
    throw ContractError("save_libsvm: only classification datasets");
  }
  if (data.labels.size() != static_cast<std::size_t>(data.n_samples())) {
    throw ContractError("save_libsvm: label count mismatch");
  }
  std::ofstream out(path);
  if (!out) throw IoError("save_libsvm: cannot open " + path);

  char buf[64];
  for (Index i = 0; i < data.n_samples(); ++i) {
    out << data.label_names[static_cast<std::size_t>(
        data.labels[static_cast<std::size_t>(i)])];
    // Every index is written, so the reader recovers the dimension even
    // when trailing features are zero; %.17g round-trips doubles exactly.
    for (Index f = 0; f < data.dim(); ++f) {
      std::snprintf(buf, sizeof(buf), " %lld:%.17g",
                    static_cast<long long>(f + 1), data.x(f, i));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("save_libsvm: write failed for " + path);
}

Dataset load_csv(const std::string& path, Index label_column, bool header) {
  std::ifstream in(path);
  if (!in) throw IoError("load_csv: cannot open " + path);

  std::vector<std::vector<double>> feature_rows;
  LabelInterner labels;
  std::vector<int> label_ids;
  std::size_t n_cols = 0;

  std::string line;
  std::size_t line_no = 0;
  bool skipped_header = !header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }

    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");

    if (n_cols == 0) {
      n_cols = cells.size();
      if (label_column < 0 || static_cast<std::size_t>(label_column) >= n_cols) {
        throw IoError("load_csv: label column " + std::to_string(label_column) +
                      " out of range for " + std::to_string(n_cols) +
                      " columns");
      }
    } else if (cells.size() != n_cols) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": expected " + std::to_string(n_cols) + " columns, got " +
                    std::to_string(cells.size()));
    }

    std::vector<double> features;
    features.reserve(n_cols - 1);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (static_cast<Index>(c) == label_column) {
        label_ids.push_back(labels.intern(cells[c]));
      } else {
        features.push_back(parse_double(cells[c], path, line_no));
      }
    }
    feature_rows.push_back(std::move(features));
  }
  if (feature_rows.empty()) throw IoError("load_csv: no samples in " + path);
  if (n_cols < 2) throw IoError("load_csv: need at least one feature column");

  Dataset data;
  data.x.resize(static_cast<Index>(n_cols - 1),
                static_cast<Index>(feature_rows.size()));
  for (std::size_t i = 0; i < feature_rows.size(); ++i) {
    for (std::size_t f = 0; f < feature_rows[i].size(); ++f) {
      data.x(static_cast<Index>(f), static_cast<Index>(i)) =
          feature_rows[i][f];
    }
  }
  data.labels = std::move(label_ids);
  data.label_names = std::move(labels.names);
  data.class_count = static_cast<Index>(data.label_names.size());
  return data;
}

ScaleParams fit_minmax(const Dataset& train) {
  if (train.n_samples() < 1) throw ContractError("fit_minmax: empty dataset");
  ScaleParams p;
  p.min = train.x.rowwise().minCoeff();
  p.max = train.x.rowwise().maxCoeff();
  return p;
}

void apply_minmax(Dataset& data, const ScaleParams& params) {
  if (params.min.size() != data.dim()) {
    throw DimensionError("apply_minmax: dimension mismatch");
  }
  for (Index f = 0; f < data.dim(); ++f) {
    const double span = params.max(f) - params.min(f);
    if (span > 0.0) {
      data.x.row(f) = (data.x.row(f).array() - params.min(f)) / span;
    } else {
      data.x.row(f).setZero();  // constant feature carries no information
    }
  }
  data.scale = params;
}

void minmax_scale(Dataset& train, std::vector<Dataset*> others) {
  const ScaleParams params = fit_minmax(train);
  apply_minmax(train, params);
  for (Dataset* other : others) {
    if (other != nullptr) apply_minmax(*other, params);
  }
}

Targets one_hot(const std::vector<int>& labels, Index class_count,
                TargetEncoding mode) {
  if (mode == TargetEncoding::raw) {
    throw ContractError("one_hot: raw is not an indicator encoding");
  }
  if (class_count < 1) throw ContractError("one_hot: class_count must be >= 1");
  const Index n = static_cast<Index>(labels.size());
  if (n < 1) throw ContractError("one_hot: empty label set");

  Targets t;
  t.encoding = mode;
  t.y = Matrix::Zero(n, class_count);
  std::vector<Index> counts(static_cast<std::size_t>(class_count), 0);
  for (Index i = 0; i < n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= class_count) {
      throw ContractError("one_hot: label " + std::to_string(c) +
                          " outside [0, " + std::to_string(class_count) + ")");
    }
    t.y(i, c) = 1.0;
    ++counts[static_cast<std::size_t>(c)];
  }
  if (mode == TargetEncoding::one_hot_unit_norm) {
    for (Index c = 0; c < class_count; ++c) {
      const Index cnt = counts[static_cast<std::size_t>(c)];
      if (cnt > 0) t.y.col(c) /= std::sqrt(static_cast<double>(cnt));
    }
  }
  return t;
}

Targets targets_for(const Dataset& data, const std::vector<Index>& idx) {
  if (data.classification()) {
    std::vector<int> sub;
    sub.reserve(idx.size());
    for (Index i : idx) {
      if (i < 0 || i >= data.n_samples()) {
        throw ContractError("targets_for: index out of range");
      }
      sub.push_back(data.labels[static_cast<std::size_t>(i)]);
    }
    return one_hot(sub, data.class_count, data.encoding);
  }
  Targets t;
  t.encoding = TargetEncoding::raw;
  t.y.resize(static_cast<Index>(idx.size()), data.y_raw.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= data.y_raw.rows()) {
      throw ContractError("targets_for: index out of range");
    }
    t.y.row(static_cast<Index>(r)) = data.y_raw.row(idx[r]);
  }
  return t;
}

Matrix gather_cols(const Matrix& x, const std::vector<Index>& idx) {
  Matrix out(x.rows(), static_cast<Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    if (idx[c] < 0 || idx[c] >= x.cols()) {
      throw ContractError("gather_cols: index out of range");
    }
    out.col(static_cast<Index>(c)) = x.col(idx[c]);
  }
  return out;
}

std::vector<std::vector<Index>> epoch_batches(Index n_samples, Index batch_size,
                                              std::uint64_t seed, Index epoch) {
  if (n_samples < 1) throw ContractError("epoch_batches: need samples");
  if (batch_size < 1 || batch_size > n_samples) {
    throw ContractError("epoch_batches: batch size must lie in [1, N]");
  }
  if (epoch < 0) throw ContractError("epoch_batches: epoch must be >= 0");

  std::vector<Index> order(static_cast<std::size_t>(n_samples));
  std::iota(order.begin(), order.end(), Index{0});
  // Distinct, reproducible stream per (seed, epoch).
  const std::uint64_t mixed =
      seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(epoch) + 1);
  std::mt19937_64 rng(mixed);
  std::shuffle(order.begin(), order.end(), rng);

  const Index n_batches = n_samples / batch_size;  // leftovers sit out
  std::vector<std::vector<Index>> batches(
      static_cast<std::size_t>(n_batches));
  for (Index b = 0; b < n_batches; ++b) {
    auto& batch = batches[static_cast<std::size_t>(b)];
    batch.assign(order.begin() + b * batch_size,
                 order.begin() + (b + 1) * batch_size);
  }
  return batches;
}

Dataset make_blobs(const BlobsConfig& cfg) {
  if (cfg.dim < 1 || cfg.classes < 1 || cfg.n_samples < 1) {
    throw ConfigError("make_blobs: dim, classes, n_samples must be positive");
  }
  if (cfg.separation < 0.0 || !std::isfinite(cfg.separation)) {
    throw ConfigError("make_blobs: separation must be finite and >= 0");
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix means(cfg.dim, cfg.classes);
  for (Index c = 0; c < cfg.classes; ++c) {
    for (Index r = 0; r < cfg.dim; ++r) {
      means(r, c) = cfg.separation * normal(rng);
    }
  }

  Dataset data;
  data.x.resize(cfg.dim, cfg.n_samples);
  data.labels.resize(static_cast<std::size_t>(cfg.n_samples));
  for (Index i = 0; i < cfg.n_samples; ++i) {
    const Index c = i % cfg.classes;
    data.labels[static_cast<std::size_t>(i)] = static_cast<int>(c);
    for (Index r = 0; r < cfg.dim; ++r) {
      data.x(r, i) = means(r, c) + normal(rng);
    }
  }
  data.class_count = cfg.classes;
  data.label_names.reserve(static_cast<std::size_t>(cfg.classes));
  for (Index c = 0; c < cfg.classes; ++c) {
    data.label_names.push_back(std::to_string(c));
  }
  return data;
}

}  // namespace dikf
