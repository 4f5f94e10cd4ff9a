#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dikf/errors.hpp"
#include "dikf/serialize.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dikf;
namespace fs = std::filesystem;

namespace {

fs::path scratch_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "dikf_serialize_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("landmark maps round-trip bitwise through the artifact format") {
  std::mt19937_64 rng(3);
  const Matrix points = testutil::randn(4, 6, rng);
  const NystromMap map(points, KernelConfig{KernelFamily::gaussian, 0.37},
                       1e-10);

  const fs::path path = scratch_file("map_nys.dikf");
  save_map(map, path.string());
  const AnyMap loaded = load_map(path.string());
  REQUIRE(std::holds_alternative<NystromMap>(loaded));
  const NystromMap& back = std::get<NystromMap>(loaded);

  CHECK((back.points() - map.points()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.kernel().gamma == map.kernel().gamma);
  CHECK(back.rank_tol() == map.rank_tol());
  CHECK(back.feature_dim() == map.feature_dim());

  // The rebuilt map produces identical features: the spectral pieces are
  // recomputed deterministically from the stored points.
  const Matrix x = testutil::randn(4, 9, rng);
  CHECK((nystrom_features(x, back) - nystrom_features(x, map))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("fourier maps round-trip bitwise through the artifact format") {
  std::mt19937_64 rng(4);
  FourierMap map = init_fourier(KernelConfig{KernelFamily::gaussian, 1.3},
                                5, 7, 11);
  map.w(2, 3) = -1.25e-300;  // subnormal-adjacent values must survive

  const fs::path path = scratch_file("map_rf.dikf");
  save_map(map, path.string());
  const AnyMap loaded = load_map(path.string());
  REQUIRE(std::holds_alternative<FourierMap>(loaded));
  const FourierMap& back = std::get<FourierMap>(loaded);

  CHECK((back.w - map.w).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.phase - map.phase).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.gamma == map.gamma);

  const Matrix x = testutil::randn(5, 6, rng);
  CHECK((rf_features(x, back) - rf_features(x, map)).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("ridge models round-trip bitwise through the artifact format") {
  std::mt19937_64 rng(5);
  KRRModel model;
  model.w = testutil::randn(6, 3, rng);
  model.b = testutil::randn(3, 1, rng).col(0);
  model.rho_used = 1e-4;

  const fs::path path = scratch_file("model.dikf");
  save_krr(model, path.string());
  const KRRModel back = load_krr(path.string());
  CHECK((back.w - model.w).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.b - model.b).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.rho_used == model.rho_used);
}

TEST_CASE("artifact loading rejects corrupted containers") {
  const fs::path missing = scratch_file("nope") / "missing.dikf";
  CHECK_THROWS_AS(load_map(missing.string()), IoError);

  const fs::path magic = scratch_file("magic.dikf");
  {
    std::ofstream out(magic, std::ios::binary);
    out << "NOTME\n{\"kind\":\"fourier\"}\n";
  }
  CHECK_THROWS_AS(load_map(magic.string()), IoError);

  const fs::path badkind = scratch_file("kind.dikf");
  {
    std::ofstream out(badkind, std::ios::binary);
    out << "DIKF1\n{\"kind\":\"mystery\"}\n";
  }
  CHECK_THROWS_AS(load_map(badkind.string()), IoError);

  const fs::path badjson = scratch_file("json.dikf");
  {
    std::ofstream out(badjson, std::ios::binary);
    out << "DIKF1\n{this is not json\n";
  }
  CHECK_THROWS_AS(load_map(badjson.string()), IoError);

  // Truncated payload: drop the tail of a valid artifact.
  std::mt19937_64 rng(6);
  const fs::path whole = scratch_file("whole.dikf");
  const NystromMap map(testutil::randn(3, 4, rng),
                       KernelConfig{KernelFamily::gaussian, 1.0});
  save_map(map, whole.string());
  std::ifstream in(whole, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  const fs::path cut = scratch_file("cut.dikf");
  {
    std::ofstream out(cut, std::ios::binary);
    out.write(bytes.data(),
              static_cast<std::streamsize>(bytes.size() - 9));
  }
  CHECK_THROWS_AS(load_map(cut.string()), IoError);

  // A map artifact is not a model artifact.
  CHECK_THROWS_AS(load_krr(whole.string()), IoError);
}

TEST_CASE("training reports serialize as epoch,mu,lr records") {
  TrainReport report;
  report.epochs.push_back({0, 1.5, 1e-3});
  report.epochs.push_back({1, 2.25, 1e-4});

  std::ostringstream out;
  write_report_csv(report, out);
  CHECK(out.str() ==
        "epoch,mu,lr\n"
        "0,1.5,0.001\n"
        "1,2.25,0.0001\n");

  TrainReport empty;
  std::ostringstream header_only;
  write_report_csv(empty, header_only);
  CHECK(header_only.str() == "epoch,mu,lr\n");

  const fs::path path = scratch_file("report.csv");
  write_report_csv(report, path.string());
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == out.str());
}
