#include "sfsda/dataset.hpp"

#include <Eigen/Eigenvalues>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sfsda/errors.hpp"
#include "sfsda/rng.hpp"

namespace sfsda {

Eigen::VectorXd TwoDomainDataset::stacked_response() const {
  Eigen::VectorXd y(n_total());
  y.head(n_source()) = source_response;
  y.tail(n_target()) = target_response;
  return y;
}

Eigen::MatrixXd TwoDomainDataset::stacked_features() const {
  Eigen::MatrixXd x(n_total(), n_features());
  x.topRows(n_source()) = source_features;
  x.bottomRows(n_target()) = target_features;
  return x;
}

namespace {

void check_psd(const Eigen::MatrixXd& cov, const char* name) {
  if (cov.rows() != cov.cols()) {
    throw InputError(std::string(name) + " covariance is not square");
  }
  if (cov != cov.transpose()) {
    throw InputError(std::string(name) + " covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov,
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8) {
    throw InputError(std::string(name) +
                     " covariance has eigenvalue below -1e-8");
  }
}

}  // namespace

void TwoDomainDataset::validate() const {
  if (n_source() < 1 || n_target() < 1 || n_features() < 1) {
    throw InputError("dataset dimensions must satisfy n_s,n_t,p >= 1");
  }
  if (target_features.cols() != n_features()) {
    throw InputError("source and target feature counts differ");
  }
  if (source_response.size() != n_source() ||
      target_response.size() != n_target()) {
    throw InputError("response length does not match feature rows");
  }
  if (source_cov.rows() != n_source() || target_cov.rows() != n_target()) {
    throw InputError("covariance dimension does not match sample count");
  }
  check_psd(source_cov, "source");
  check_psd(target_cov, "target");
}

void SyntheticConfig::validate() const {
  if (n_source < 1 || n_target < 1 || n_features < 1) {
    throw InputError("synthetic config requires n_s,n_t,p >= 1");
  }
  if (!(noise_sd > 0.0)) {
    throw InputError("noise_sd must be positive");
  }
  if (beta_source.size() != n_features || beta_target.size() != n_features) {
    throw InputError("beta vectors must have length p");
  }
}

TwoDomainDataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  CounterRng rng(config.seed);

  auto draw_domain = [&](Eigen::Index n, const Eigen::VectorXd& beta,
                         Eigen::MatrixXd& x, Eigen::VectorXd& y) {
    x.resize(n, config.n_features);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < config.n_features; ++j) {
        x(i, j) = rng.normal();
      }
    }
    y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i) = x.row(i).dot(beta) + config.noise_sd * rng.normal();
    }
  };

  TwoDomainDataset ds;
  draw_domain(config.n_source, config.beta_source, ds.source_features,
              ds.source_response);
  draw_domain(config.n_target, config.beta_target, ds.target_features,
              ds.target_response);
  double var = config.noise_sd * config.noise_sd;
  ds.source_cov =
      var * Eigen::MatrixXd::Identity(config.n_source, config.n_source);
  ds.target_cov =
      var * Eigen::MatrixXd::Identity(config.n_target, config.n_target);
  return ds;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

struct CsvTable {
  Eigen::MatrixXd features;
  Eigen::VectorXd response;
  Eigen::Index n_features = 0;
};

double parse_cell(const std::string& cell, const std::string& path, int line_no,
                  const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    throw InputError(path + ": parse error at line " +
                     std::to_string(line_no) + ", column " + column);
  }
  return value;
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError(path + ": cannot open file");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw InputError(path + ": empty file (missing header)");
  }
  auto header = split_line(line);
  if (header.size() < 2 || header.back() != "y") {
    throw InputError(path + ": malformed header at line 1 (expected x1,...,xp,y)");
  }
  Eigen::Index p = static_cast<Eigen::Index>(header.size()) - 1;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (header[static_cast<std::size_t>(j)] != "x" + std::to_string(j + 1)) {
      throw InputError(path + ": malformed header at line 1 (expected x" +
                       std::to_string(j + 1) + ", got " +
                       header[static_cast<std::size_t>(j)] + ")");
    }
  }

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.eof()) break;
    auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw InputError(path + ": ragged row at line " +
                       std::to_string(line_no) + " (expected " +
                       std::to_string(header.size()) + " cells, got " +
                       std::to_string(cells.size()) + ")");
    }
    std::vector<double> row(header.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
      row[k] = parse_cell(cells[k], path, line_no, header[k]);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw InputError(path + ": no data rows");
  }

  CsvTable table;
  table.n_features = p;
  table.features.resize(static_cast<Eigen::Index>(rows.size()), p);
  table.response.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      table.features(static_cast<Eigen::Index>(i), j) =
          rows[i][static_cast<std::size_t>(j)];
    }
    table.response(static_cast<Eigen::Index>(i)) = rows[i].back();
  }
  return table;
}

}  // namespace

TwoDomainDataset load_csv(const std::string& source_path,
                          const std::string& target_path, double noise_sd) {
  if (!(noise_sd > 0.0)) {
    throw InputError("noise_sd must be positive");
  }
  CsvTable src = read_csv_table(source_path);
  CsvTable tgt = read_csv_table(target_path);
  if (src.n_features != tgt.n_features) {
    throw InputError("feature count mismatch: " + source_path + " has p=" +
                     std::to_string(src.n_features) + ", " + target_path +
                     " has p=" + std::to_string(tgt.n_features));
  }
  TwoDomainDataset ds;
  ds.source_features = std::move(src.features);
  ds.source_response = std::move(src.response);
  ds.target_features = std::move(tgt.features);
  ds.target_response = std::move(tgt.response);
  double var = noise_sd * noise_sd;
  ds.source_cov =
      var * Eigen::MatrixXd::Identity(ds.n_source(), ds.n_source());
  ds.target_cov =
      var * Eigen::MatrixXd::Identity(ds.n_target(), ds.n_target());
  ds.validate();
  return ds;
}

void write_csv(const std::string& path, const Eigen::MatrixXd& features,
               const Eigen::VectorXd& response) {
  if (features.rows() != response.size()) {
    throw InputError("write_csv: row count mismatch");
  }
  std::ofstream out(path);
  if (!out) {
    throw InputError(path + ": cannot open file for writing");
  }
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    out << "x" << (j + 1) << ",";
  }
  out << "y\n";
  char buf[64];
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", features(i, j));
      out << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", response(i));
    out << buf << "\n";
  }
}

}  // namespace sfsda
