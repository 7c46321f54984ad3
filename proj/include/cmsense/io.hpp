#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmsense/channels.hpp"
#include "cmsense/evaluation.hpp"
#include "cmsense/phase_matrix.hpp"
#include "cmsense/train.hpp"

namespace cmsense {

namespace detail {

// 17 significant digits: doubles survive the text round trip exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("failed to parse number: '" + s + "'");
  }
}

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("unexpected end of file");
}

}  // namespace detail

inline constexpr char kChannelSetMagic[4] = {'C', 'M', 'C', 'H'};
inline constexpr std::uint32_t kChannelSetVersion = 1;

// Binary channel set: header (magic, version, model, normalization, n, p, L,
// count) followed by interleaved re/im doubles in column order. The raw
// doubles make the round trip bit-exact.
inline void save_channel_set(const ChannelSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.write(kChannelSetMagic, 4);
  detail::write_raw(out, kChannelSetVersion);
  detail::write_raw(out, static_cast<std::uint8_t>(set.model.model));
  detail::write_raw(out, static_cast<std::uint8_t>(set.normalization));
  detail::write_raw(out, static_cast<std::uint32_t>(set.model.n));
  detail::write_raw(out, static_cast<std::uint32_t>(set.model.p));
  detail::write_raw(out, static_cast<std::uint32_t>(set.model.L));
  detail::write_raw(out, static_cast<std::uint64_t>(set.count()));
  for (Eigen::Index j = 0; j < set.count(); ++j)
    for (Eigen::Index i = 0; i < set.dim(); ++i) {
      detail::write_raw(out, set.samples(i, j).real());
      detail::write_raw(out, set.samples(i, j).imag());
    }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline ChannelSet load_channel_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kChannelSetMagic, 4) != 0)
    throw std::runtime_error("not a channel set file: " + path);
  std::uint32_t version = 0;
  detail::read_raw(in, version);
  if (version != kChannelSetVersion)
    throw std::runtime_error("unsupported channel set version in " + path);
  std::uint8_t model = 0, normalization = 0;
  std::uint32_t n = 0, p = 0, l = 0;
  std::uint64_t count = 0;
  detail::read_raw(in, model);
  detail::read_raw(in, normalization);
  detail::read_raw(in, n);
  detail::read_raw(in, p);
  detail::read_raw(in, l);
  detail::read_raw(in, count);
  if (model > 2 || normalization > 2 || n == 0)
    throw std::runtime_error("corrupt channel set header in " + path);
  ChannelSet set;
  set.model.model = static_cast<ChannelModel>(model);
  set.model.n = static_cast<int>(n);
  set.model.p = static_cast<int>(p);
  set.model.L = static_cast<int>(l);
  set.normalization = static_cast<Normalization>(normalization);
  set.samples.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
  for (Eigen::Index j = 0; j < set.count(); ++j)
    for (Eigen::Index i = 0; i < set.dim(); ++i) {
      double re = 0.0, im = 0.0;
      detail::read_raw(in, re);
      detail::read_raw(in, im);
      set.samples(i, j) = {re, im};
    }
  return set;
}

// Text matrix files. First line: "<kind> <rows> <cols>" with kind "phase"
// (one value per entry) or "complex" (re im per entry); then one line per row.
inline void save_phase_matrix(const PhaseMatrix& phi, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "phase " << phi.phases.rows() << ' ' << phi.phases.cols() << '\n';
  for (Eigen::Index r = 0; r < phi.phases.rows(); ++r) {
    for (Eigen::Index c = 0; c < phi.phases.cols(); ++c) {
      if (c) out << ' ';
      out << detail::format_double(phi.phases(r, c));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void save_complex_matrix(const Eigen::MatrixXcd& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "complex " << a.rows() << ' ' << a.cols() << '\n';
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      if (c) out << ' ';
      out << detail::format_double(a(r, c).real()) << ' ' << detail::format_double(a(r, c).imag());
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct StoredMatrix {
  bool is_phase = false;
  PhaseMatrix phases;        // when is_phase
  Eigen::MatrixXcd entries;  // otherwise

  Eigen::MatrixXcd as_complex() const { return is_phase ? phases_to_matrix(phases) : entries; }
};

inline StoredMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string kind;
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> kind >> rows >> cols) || rows < 1 || cols < 1)
    throw std::runtime_error("corrupt matrix header in " + path);
  StoredMatrix stored;
  const auto next_value = [&in, &path] {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("truncated matrix file: " + path);
    return detail::parse_double(tok);
  };
  if (kind == "phase") {
    stored.is_phase = true;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = next_value();
    stored.phases = PhaseMatrix(std::move(m));
  } else if (kind == "complex") {
    stored.entries.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) {
        const double re = next_value();
        const double im = next_value();
        stored.entries(r, c) = {re, im};
      }
  } else {
    throw std::runtime_error("unknown matrix kind '" + kind + "' in " + path);
  }
  return stored;
}

// Text training report: scalar fields, the phase table, and the objective
// trace, all round-trippable.
inline void save_train_report(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "best_validation " << detail::format_double(report.best_validation) << '\n';
  out << "iterations_run " << report.iterations_run << '\n';
  out << "batch_size " << report.config.batch_size << '\n';
  out << "learning_rate " << detail::format_double(report.config.learning_rate) << '\n';
  out << "decay " << detail::format_double(report.config.decay) << '\n';
  out << "max_iterations " << report.config.max_iterations << '\n';
  out << "validation_interval " << report.config.validation_interval << '\n';
  out << "patience " << report.config.patience << '\n';
  out << "normalization " << to_string(report.config.normalization) << '\n';
  out << "sphere_mode "
      << (report.config.sphere_mode == SphereMode::Fresh ? "fresh" : "paired") << '\n';
  out << "seed " << report.config.seed << '\n';
  out << "phases " << report.phases.phases.rows() << ' ' << report.phases.phases.cols() << '\n';
  for (Eigen::Index r = 0; r < report.phases.phases.rows(); ++r) {
    for (Eigen::Index c = 0; c < report.phases.phases.cols(); ++c) {
      if (c) out << ' ';
      out << detail::format_double(report.phases.phases(r, c));
    }
    out << '\n';
  }
  out << "trace " << report.trace.size() << '\n';
  for (const TraceEntry& e : report.trace)
    out << e.iteration << ' ' << detail::format_double(e.train_objective) << ' '
        << detail::format_double(e.validation_objective) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline TrainReport load_train_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  TrainReport report;
  std::string key, value;
  const auto expect_key = [&](const char* want) {
    if (!(in >> key) || key != want)
      throw std::runtime_error(std::string("train report: expected '") + want + "' in " + path);
  };
  expect_key("best_validation");
  in >> value;
  report.best_validation = detail::parse_double(value);
  expect_key("iterations_run");
  in >> report.iterations_run;
  expect_key("batch_size");
  in >> report.config.batch_size;
  expect_key("learning_rate");
  in >> value;
  report.config.learning_rate = detail::parse_double(value);
  expect_key("decay");
  in >> value;
  report.config.decay = detail::parse_double(value);
  expect_key("max_iterations");
  in >> report.config.max_iterations;
  expect_key("validation_interval");
  in >> report.config.validation_interval;
  expect_key("patience");
  in >> report.config.patience;
  expect_key("normalization");
  in >> value;
  report.config.normalization = normalization_from_string(value);
  expect_key("sphere_mode");
  in >> value;
  report.config.sphere_mode = value == "paired" ? SphereMode::Paired : SphereMode::Fresh;
  expect_key("seed");
  in >> report.config.seed;
  expect_key("phases");
  Eigen::Index rows = 0, cols = 0;
  in >> rows >> cols;
  if (!in || rows < 1 || cols < 1) throw std::runtime_error("train report: bad phase table");
  Eigen::MatrixXd phases(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      in >> value;
      phases(r, c) = detail::parse_double(value);
    }
  report.phases = PhaseMatrix(std::move(phases));
  expect_key("trace");
  std::size_t entries = 0;
  in >> entries;
  report.trace.resize(entries);
  for (TraceEntry& e : report.trace) {
    in >> e.iteration >> key >> value;
    if (!in) throw std::runtime_error("train report: truncated trace");
    e.train_objective = detail::parse_double(key);
    e.validation_objective = detail::parse_double(value);
  }
  return report;
}

// CSV with header "algorithm,snr,mean" plus the union of auxiliary columns
// in first-seen order; rows without a value leave the cell empty.
inline void write_csv(const std::vector<EvalRecord>& records, const std::string& path) {
  std::vector<std::string> aux_keys;
  for (const EvalRecord& rec : records)
    for (const auto& [key, unused] : rec.aux) {
      bool seen = false;
      for (const std::string& k : aux_keys) seen = seen || k == key;
      if (!seen) aux_keys.push_back(key);
    }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "algorithm,snr,mean";
  for (const std::string& k : aux_keys) out << ',' << k;
  out << '\n';
  for (const EvalRecord& rec : records) {
    out << rec.algorithm << ',' << detail::format_double(rec.snr_db) << ','
        << detail::format_double(rec.relative_mse);
    for (const std::string& k : aux_keys) {
      out << ',';
      for (const auto& [key, val] : rec.aux)
        if (key == k) {
          out << val;
          break;
        }
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<EvalRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
  const auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    if (!s.empty() && s.back() == ',') parts.emplace_back();
    return parts;
  };
  const std::vector<std::string> header = split(line);
  if (header.size() < 3 || header[0] != "algorithm" || header[1] != "snr" || header[2] != "mean")
    throw std::runtime_error("unexpected CSV header in " + path);
  std::vector<EvalRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> parts = split(line);
    if (parts.size() < 3) throw std::runtime_error("short CSV row in " + path);
    EvalRecord rec;
    rec.algorithm = parts[0];
    rec.snr_db = detail::parse_double(parts[1]);
    rec.relative_mse = detail::parse_double(parts[2]);
    for (std::size_t k = 3; k < parts.size() && k < header.size(); ++k)
      if (!parts[k].empty()) rec.aux.emplace_back(header[k], parts[k]);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace cmsense
