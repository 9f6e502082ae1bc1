#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace sfsda {

/// Source/target regression data with known noise covariances. All members
/// are immutable after construction; every operation on a dataset is pure.
struct TwoDomainDataset {
  Eigen::MatrixXd source_features;  // n_s x p
  Eigen::VectorXd source_response;  // n_s
  Eigen::MatrixXd target_features;  // n_t x p
  Eigen::VectorXd target_response;  // n_t
  Eigen::MatrixXd source_cov;       // n_s x n_s, symmetric PSD
  Eigen::MatrixXd target_cov;       // n_t x n_t, symmetric PSD

  Eigen::Index n_source() const { return source_features.rows(); }
  Eigen::Index n_target() const { return target_features.rows(); }
  Eigen::Index n_features() const { return source_features.cols(); }
  Eigen::Index n_total() const { return n_source() + n_target(); }

  /// (Y^s; Y^t) stacked.
  Eigen::VectorXd stacked_response() const;
  /// (X^s; X^t) stacked, (n_s + n_t) x p.
  Eigen::MatrixXd stacked_features() const;

  /// Throws InputError if dimensions are inconsistent or a covariance is
  /// not symmetric PSD (symmetry exact, smallest eigenvalue >= -1e-8).
  void validate() const;
};

struct SyntheticConfig {
  Eigen::Index n_source = 100;
  Eigen::Index n_target = 10;
  Eigen::Index n_features = 5;
  Eigen::VectorXd beta_source;  // length p
  Eigen::VectorXd beta_target;  // length p
  double noise_sd = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Draws features i.i.d. standard normal and responses Y_i = X_i' beta + eps
/// with eps i.i.d. N(0, noise_sd^2); both covariances are noise_sd^2 * I.
/// Pure function of the config, including the seed.
TwoDomainDataset generate_synthetic(const SyntheticConfig& config);

/// Reads two CSV files with header x1,...,xp,y (case-sensitive, identical p)
/// into a dataset; covariances are noise_sd^2 * I. Parse failures report the
/// file, line, and column.
TwoDomainDataset load_csv(const std::string& source_path,
                          const std::string& target_path, double noise_sd);

/// Writes one domain as CSV with the x1,...,xp,y header, 17 significant
/// digits, so that load_csv round-trips values exactly.
void write_csv(const std::string& path, const Eigen::MatrixXd& features,
               const Eigen::VectorXd& response);

}  // namespace sfsda
