#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cmsense/channels.hpp"
#include "cmsense/io.hpp"
#include "cmsense/rng.hpp"

using namespace cmsense;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag)
      : path(std::filesystem::temp_directory_path() / ("cmsense_io_" + tag)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("doubles survive the text round trip", "[io]") {
  const double values[] = {0.0,   1.0 / 3.0,       -2.5e-300, 6.02214076e23,
                           -0.0,  0.1 + 0.2,       1e-17,     123456789.123456789};
  for (const double v : values) {
    const double back = detail::parse_double(detail::format_double(v));
    CHECK(back == v);
  }
  CHECK(std::isnan(detail::parse_double(detail::format_double(std::nan("")))));
  CHECK(std::isinf(detail::parse_double("inf")));
  CHECK_THROWS_AS(detail::parse_double("1.5x"), std::runtime_error);
  CHECK_THROWS_AS(detail::parse_double("abc"), std::runtime_error);
}

TEST_CASE("channel sets round trip bit-exactly", "[io]") {
  const TempDir dir("channels");
  const ChannelModelSpec spec{ChannelModel::Multipath, 12, 3, 24};
  const ChannelSet set =
      normalize_per_sample(generate_channels(spec, 17, SeededRng(111, "io")));
  const std::string path = dir.file("set.bin");
  save_channel_set(set, path);
  const ChannelSet back = load_channel_set(path);
  CHECK(back.model.model == set.model.model);
  CHECK(back.model.n == set.model.n);
  CHECK(back.model.p == set.model.p);
  CHECK(back.model.L == set.model.L);
  CHECK(back.normalization == set.normalization);
  REQUIRE(back.count() == set.count());
  CHECK((back.samples - set.samples).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("channel set loader rejects foreign and truncated files", "[io]") {
  const TempDir dir("badchannels");
  const std::string garbage = dir.file("garbage.bin");
  {
    std::ofstream out(garbage, std::ios::binary);
    out << "this is not a channel set";
  }
  CHECK_THROWS_AS(load_channel_set(garbage), std::runtime_error);

  const ChannelSet set = generate_channels({ChannelModel::CanonicalSparse, 4, 1, 0}, 5,
                                           SeededRng(113, "trunc"));
  const std::string full = dir.file("full.bin");
  save_channel_set(set, full);
  const auto size = std::filesystem::file_size(full);
  const std::string cut = dir.file("cut.bin");
  {
    std::ifstream in(full, std::ios::binary);
    std::ofstream out(cut, std::ios::binary);
    std::vector<char> buf(size / 2);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  CHECK_THROWS_AS(load_channel_set(cut), std::runtime_error);
  CHECK_THROWS_AS(load_channel_set(dir.file("missing.bin")), std::runtime_error);
}

TEST_CASE("matrix files round trip", "[io]") {
  const TempDir dir("matrices");
  SeededRng rng(115, "mat");
  Eigen::MatrixXd phases(3, 5);
  for (Eigen::Index c = 0; c < 5; ++c)
    for (Eigen::Index r = 0; r < 3; ++r) phases(r, c) = rng.uniform(0.0, 6.2831853071795865);
  const std::string phase_path = dir.file("phi.txt");
  save_phase_matrix(PhaseMatrix(phases), phase_path);
  const StoredMatrix phase_back = load_matrix(phase_path);
  REQUIRE(phase_back.is_phase);
  CHECK((phase_back.phases.phases - phases).cwiseAbs().maxCoeff() == 0.0);
  CHECK((phase_back.as_complex() - phases_to_matrix(PhaseMatrix(phases))).cwiseAbs().maxCoeff() ==
        0.0);

  Eigen::MatrixXcd entries(2, 4);
  for (Eigen::Index c = 0; c < 4; ++c)
    for (Eigen::Index r = 0; r < 2; ++r) entries(r, c) = rng.cgauss(1.0);
  const std::string complex_path = dir.file("a.txt");
  save_complex_matrix(entries, complex_path);
  const StoredMatrix complex_back = load_matrix(complex_path);
  REQUIRE(!complex_back.is_phase);
  CHECK((complex_back.entries - entries).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix loader errors on malformed content", "[io]") {
  const TempDir dir("badmatrices");
  const auto write_text = [&dir](const std::string& name, const std::string& text) {
    const std::string path = dir.file(name);
    std::ofstream out(path);
    out << text;
    return path;
  };
  CHECK_THROWS_AS(load_matrix(write_text("kind.txt", "diagonal 2 2\n1 2\n3 4\n")),
                  std::runtime_error);
  CHECK_THROWS_AS(load_matrix(write_text("header.txt", "phase 0 2\n")), std::runtime_error);
  CHECK_THROWS_AS(load_matrix(write_text("short.txt", "phase 2 2\n1 2\n3\n")), std::runtime_error);
  CHECK_THROWS_AS(load_matrix(write_text("token.txt", "phase 1 1\nbogus\n")), std::runtime_error);
  CHECK_THROWS_AS(load_matrix(dir.file("missing.txt")), std::runtime_error);
}

TEST_CASE("training reports round trip including the NaN placeholder", "[io]") {
  const TempDir dir("report");
  TrainReport report;
  report.best_validation = 0.012345678901234567;
  report.iterations_run = 225;
  report.config.batch_size = 120;
  report.config.learning_rate = 3.3e-4;
  report.config.decay = 0.97;
  report.config.max_iterations = 500;
  report.config.validation_interval = 25;
  report.config.patience = 4;
  report.config.normalization = Normalization::PerSample;
  report.config.sphere_mode = SphereMode::Paired;
  report.config.seed = 987654321;
  report.phases = PhaseMatrix((Eigen::MatrixXd(2, 3) << 0.1, 1.2, 2.3, 3.4, 4.5, 5.6).finished());
  report.trace.push_back({0, std::nan(""), 0.5});
  report.trace.push_back({25, 0.4, 0.45});
  report.trace.push_back({50, 0.3, 0.041});

  const std::string path = dir.file("report.txt");
  save_train_report(report, path);
  const TrainReport back = load_train_report(path);
  CHECK(back.best_validation == report.best_validation);
  CHECK(back.iterations_run == report.iterations_run);
  CHECK(back.config.batch_size == report.config.batch_size);
  CHECK(back.config.learning_rate == report.config.learning_rate);
  CHECK(back.config.decay == report.config.decay);
  CHECK(back.config.normalization == Normalization::PerSample);
  CHECK(back.config.sphere_mode == SphereMode::Paired);
  CHECK(back.config.seed == report.config.seed);
  CHECK((back.phases.phases - report.phases.phases).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(back.trace.size() == 3);
  CHECK(back.trace[0].iteration == 0);
  CHECK(std::isnan(back.trace[0].train_objective));
  CHECK(back.trace[0].validation_objective == 0.5);
  CHECK(back.trace[2].train_objective == 0.3);
  CHECK(back.trace[2].validation_objective == 0.041);
}

TEST_CASE("csv writer unions auxiliary columns in first-seen order", "[io]") {
  const TempDir dir("csv");
  std::vector<EvalRecord> records(3);
  records[0].algorithm = "learned";
  records[0].snr_db = -5.0;
  records[0].relative_mse = 0.25;
  records[0].aux = {{"delta", "0.125"}};
  records[1].algorithm = "random";
  records[1].snr_db = 10.0;
  records[1].relative_mse = 1.0 / 3.0;
  records[1].aux = {{"matrices", "100"}};
  records[2].algorithm = "mc-lbcs";
  records[2].snr_db = 10.0;
  records[2].relative_mse = 0.125;

  const std::string path = dir.file("results.csv");
  write_csv(records, path);

  std::ifstream raw(path, std::ios::binary);
  std::string first_line;
  std::getline(raw, first_line);
  CHECK(first_line == "algorithm,snr,mean,delta,matrices");
  std::string rest((std::istreambuf_iterator<char>(raw)), std::istreambuf_iterator<char>());
  CHECK(rest.find('\r') == std::string::npos);

  const std::vector<EvalRecord> back = read_csv(path);
  REQUIRE(back.size() == 3);
  CHECK(back[0].algorithm == "learned");
  CHECK(back[0].snr_db == -5.0);
  CHECK(back[0].relative_mse == 0.25);
  REQUIRE(back[0].aux.size() == 1);
  CHECK(back[0].aux[0].first == "delta");
  CHECK(back[0].aux[0].second == "0.125");
  CHECK(back[1].relative_mse == records[1].relative_mse);
  REQUIRE(back[1].aux.size() == 1);
  CHECK(back[1].aux[0].first == "matrices");
  CHECK(back[2].aux.empty());

  CHECK_THROWS_AS(read_csv(dir.file("missing.csv")), std::runtime_error);
  const std::string bad = dir.file("bad.csv");
  {
    std::ofstream out(bad);
    out << "rows,of,nonsense\n";
  }
  CHECK_THROWS_AS(read_csv(bad), std::runtime_error);
}
