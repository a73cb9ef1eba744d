#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "situate/geometry.hpp"
#include "situate/rng.hpp"

namespace situate {

/// Relative size of the ridge added to fitted covariances: eps = 1e-8 * trace / d.
inline constexpr double kRidgeFactor = 1e-8;
/// Ridge used when the trace is zero (all samples identical).
inline constexpr double kRidgeFloor = 1e-12;

struct UnivariateNormal {
  std::string label;
  double mean = 0;
  double std = 1;

  double sample(Rng& rng) const;
  double density(double x) const;
  bool operator==(const UnivariateNormal&) const = default;
};

/// Multivariate normal whose dimensions are addressed by label.
///
/// Immutable after construction. The constructor validates shape, symmetry
/// and positive semi-definiteness, and caches a square-root factor used for
/// sampling so that singular (e.g. zero) covariances sample without failing.
class MultivariateGaussian {
 public:
  MultivariateGaussian(std::vector<std::string> dims, Eigen::VectorXd mean, Eigen::MatrixXd cov,
                       double epsilon = 0.0);

  /// Maximum-likelihood fit (1/N covariance) plus the ridge eps*I.
  static MultivariateGaussian fit(std::span<const Eigen::VectorXd> samples,
                                  std::vector<std::string> dims);

  const std::vector<std::string>& dims() const { return dims_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  /// Ridge that was added to the covariance when fitting (0 if constructed directly).
  double epsilon() const { return epsilon_; }
  std::size_t size() const { return dims_.size(); }

  std::size_t index_of(const std::string& label) const;
  bool has(const std::string& label) const;

  Eigen::VectorXd sample(Rng& rng) const;

  /// Gaussian over the remaining labels given observed values.
  MultivariateGaussian condition(const std::map<std::string, double>& observed) const;

  MultivariateGaussian marginal(const std::vector<std::string>& keep) const;

  double log_density(const Eigen::VectorXd& x) const;
  double density(const Eigen::VectorXd& x) const;

  bool operator==(const MultivariateGaussian& other) const;

 private:
  std::vector<std::string> dims_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  double epsilon_ = 0;
  Eigen::MatrixXd sqrt_cov_;
};

/// Probability grid tiling an image frame; row-major, row 0 at the top edge.
///
/// The grid has floor(norm_width / cell_size) columns, so each cell is
/// slightly wider than the nominal cell_size and the cells tile the frame exactly.
class LocationMap {
 public:
  LocationMap(const ImageFrame& frame, double cell_size, std::vector<double> cells);

  static LocationMap uniform(const ImageFrame& frame, double cell_size);

  const ImageFrame& frame() const { return frame_; }
  double cell_size() const { return cell_size_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double cell_width() const { return frame_.norm_width / cols_; }
  double cell_height() const { return frame_.norm_height / rows_; }
  std::size_t num_cells() const { return cells_.size(); }
  const std::vector<double>& cells() const { return cells_; }
  double at(int row, int col) const { return cells_[static_cast<std::size_t>(row) * cols_ + col]; }

  double cell_center_x(int col) const { return frame_.min_x() + (col + 0.5) * cell_width(); }
  double cell_center_y(int row) const { return frame_.min_y() + (row + 0.5) * cell_height(); }

  /// Draws a cell proportionally to its mass, then a point uniformly inside it.
  std::pair<double, double> sample_point(Rng& rng) const;

  /// Grid dimensions implied by a frame and nominal cell size.
  static std::pair<int, int> grid_shape(const ImageFrame& frame, double cell_size);

 private:
  ImageFrame frame_;
  double cell_size_;
  int rows_;
  int cols_;
  std::vector<double> cells_;
  std::vector<double> cdf_;
};

/// Density of a two-label Gaussian evaluated at each cell center, truncated
/// to the frame and renormalized to sum to one.
LocationMap rasterize_2d(const MultivariateGaussian& dist, const ImageFrame& frame,
                         double cell_size = 1.0);

double log_normal_sample(const UnivariateNormal& dist, Rng& rng);
/// exp() of each coordinate of a Gaussian draw over log-space labels.
Eigen::VectorXd log_normal_sample(const MultivariateGaussian& dist, Rng& rng);

}  // namespace situate
