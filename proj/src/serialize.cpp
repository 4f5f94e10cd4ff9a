#include "dikf/serialize.hpp"

#include <fstream>
#include <iomanip>
#include <string>

#include "dikf/errors.hpp"
#include "json.hpp"

namespace dikf {

namespace {

using nlohmann::json;

constexpr const char* kMagic = "DIKF1";

// Payload blocks are raw float64 in row-major order. The host is assumed
// little-endian (checked nowhere cheaper than here).
void write_block(std::ostream& out, const Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
}

Matrix read_block(std::istream& in, Index rows, Index cols,
                  const std::string& path) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (!in) throw IoError("load: truncated payload in " + path);
      m(r, c) = v;
    }
  }
  return m;
}

void write_artifact(const std::string& path, const json& header,
                    const std::vector<const Matrix*>& blocks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save: cannot open " + path);
  out << kMagic << '\n' << header.dump() << '\n';
  for (const Matrix* block : blocks) write_block(out, *block);
  if (!out) throw IoError("save: write failed for " + path);
}

json read_header(std::istream& in, const std::string& path) {
  std::string magic;
  if (!std::getline(in, magic) || magic != kMagic) {
    throw IoError("load: " + path + " is not a recognized artifact");
  }
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw IoError("load: missing header in " + path);
  }
  json header = json::parse(header_line, nullptr, false);
  if (header.is_discarded() || !header.is_object()) {
    throw IoError("load: malformed header in " + path);
  }
  return header;
}

Index require_dim(const json& header, const char* key,
                  const std::string& path) {
  if (!header.contains(key) || !header[key].is_number_integer()) {
    throw IoError("load: header of " + path + " lacks integer '" + key + "'");
  }
  const auto v = header[key].get<long long>();
  if (v < 1) throw IoError("load: non-positive '" + std::string(key) +
                           "' in " + path);
  return static_cast<Index>(v);
}

double require_number(const json& header, const char* key,
                      const std::string& path) {
  if (!header.contains(key) || !header[key].is_number()) {
    throw IoError("load: header of " + path + " lacks number '" + key + "'");
  }
  return header[key].get<double>();
}

}  // namespace

void save_map(const NystromMap& map, const std::string& path) {
  json header = {{"kind", "nystrom_map"},
                 {"dim", map.input_dim()},
                 {"points", map.size()},
                 {"gamma", map.kernel().gamma},
                 {"rank_tol", map.rank_tol()}};
  const Matrix& pts = map.points();
  write_artifact(path, header, {&pts});
}

void save_map(const FourierMap& map, const std::string& path) {
  json header = {{"kind", "fourier_map"},
                 {"dim", map.input_dim()},
                 {"features", map.feature_dim()},
                 {"gamma", map.gamma}};
  const Matrix phase = map.phase;
  write_artifact(path, header, {&map.w, &phase});
}

AnyMap load_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_map: cannot open " + path);
  const json header = read_header(in, path);
  const std::string kind = header.value("kind", "");

  if (kind == "nystrom_map") {
    const Index dim = require_dim(header, "dim", path);
    const Index n = require_dim(header, "points", path);
    KernelConfig kcfg;
    kcfg.gamma = require_number(header, "gamma", path);
    const double rank_tol = require_number(header, "rank_tol", path);
    Matrix pts = read_block(in, dim, n, path);
    return NystromMap(std::move(pts), kcfg, rank_tol);
  }
  if (kind == "fourier_map") {
    const Index dim = require_dim(header, "dim", path);
    const Index j = require_dim(header, "features", path);
    FourierMap map;
    map.gamma = require_number(header, "gamma", path);
    map.w = read_block(in, dim, j, path);
    map.phase = read_block(in, j, 1, path).col(0);
    return map;
  }
  throw IoError("load_map: unknown artifact kind '" + kind + "' in " + path);
}

void save_krr(const KRRModel& model, const std::string& path) {
  json header = {{"kind", "krr_model"},
                 {"features", model.w.rows()},
                 {"outputs", model.w.cols()},
                 {"rho", model.rho_used}};
  const Matrix b = model.b;
  write_artifact(path, header, {&model.w, &b});
}

KRRModel load_krr(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_krr: cannot open " + path);
  const json header = read_header(in, path);
  if (header.value("kind", "") != "krr_model") {
    throw IoError("load_krr: " + path + " is not a predictor artifact");
  }
  const Index j = require_dim(header, "features", path);
  const Index l = require_dim(header, "outputs", path);
  KRRModel model;
  model.rho_used = require_number(header, "rho", path);
  model.w = read_block(in, j, l, path);
  model.b = read_block(in, l, 1, path).col(0);
  return model;
}

void write_report_csv(const TrainReport& report, std::ostream& out) {
  out << "epoch,mu,lr\n" << std::setprecision(17);
  for (const EpochRecord& rec : report.epochs) {
    out << rec.epoch << ',' << rec.mu << ',' << rec.lr << '\n';
  }
}

void write_report_csv(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("write_report_csv: cannot open " + path);
  write_report_csv(report, out);
  if (!out) throw IoError("write_report_csv: write failed for " + path);
}

}  // namespace dikf
