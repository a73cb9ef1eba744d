#include "situate/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "situate/error.hpp"

namespace situate {

namespace {

double ridge_for(const Eigen::MatrixXd& cov) {
  const double d = static_cast<double>(cov.rows());
  const double trace = cov.trace();
  return std::max(kRidgeFactor * trace / d, kRidgeFloor);
}

// Cholesky of a symmetric PSD block; adds a ridge when the block is singular.
Eigen::LLT<Eigen::MatrixXd> robust_llt(const Eigen::MatrixXd& block) {
  Eigen::LLT<Eigen::MatrixXd> llt(block);
  if (llt.info() == Eigen::Success) {
    const double min_pivot = llt.matrixL().toDenseMatrix().diagonal().minCoeff();
    if (min_pivot > 0 && min_pivot * min_pivot > 1e-15 * std::abs(block.trace())) return llt;
  }
  Eigen::MatrixXd ridged = block;
  ridged.diagonal().array() += ridge_for(block);
  llt.compute(ridged);
  if (llt.info() != Eigen::Success) throw InvalidInput("covariance block is not positive semi-definite");
  return llt;
}

}  // namespace

double UnivariateNormal::sample(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  return mean + std * normal(rng);
}

double UnivariateNormal::density(double x) const {
  const double z = (x - mean) / std;
  return std::exp(-0.5 * z * z) / (std * std::sqrt(2 * std::numbers::pi));
}

MultivariateGaussian::MultivariateGaussian(std::vector<std::string> dims, Eigen::VectorXd mean,
                                           Eigen::MatrixXd cov, double epsilon)
    : dims_(std::move(dims)), mean_(std::move(mean)), cov_(std::move(cov)), epsilon_(epsilon) {
  const auto d = static_cast<Eigen::Index>(dims_.size());
  if (d == 0) throw InvalidInput("gaussian needs at least one dimension");
  if (mean_.size() != d || cov_.rows() != d || cov_.cols() != d) {
    throw InvalidInput("gaussian shape mismatch between dims, mean and covariance");
  }
  if (std::set<std::string>(dims_.begin(), dims_.end()).size() != dims_.size()) {
    throw InvalidInput("gaussian dimension labels must be unique");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) throw InvalidInput("gaussian parameters must be finite");
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidInput("covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_);
  const double trace = cov_.trace();
  if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(trace, 1e-300)) {
    throw InvalidInput("covariance must be positive semi-definite");
  }
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  sqrt_cov_ = eig.eigenvectors() * roots.asDiagonal();
}

MultivariateGaussian MultivariateGaussian::fit(std::span<const Eigen::VectorXd> samples,
                                               std::vector<std::string> dims) {
  const auto d = static_cast<Eigen::Index>(dims.size());
  if (samples.size() < dims.size() + 1) {
    throw InsufficientData("fitting a " + std::to_string(d) + "-d gaussian needs at least " +
                           std::to_string(d + 1) + " samples, got " +
                           std::to_string(samples.size()));
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& s : samples) {
    if (s.size() != d) throw InvalidInput("sample length does not match dimension count");
    if (!s.allFinite()) throw InvalidInput("sample contains non-finite values");
    mean += s;
  }
  const double n = static_cast<double>(samples.size());
  mean /= n;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& s : samples) {
    const Eigen::VectorXd c = s - mean;
    cov.noalias() += c * c.transpose();
  }
  cov /= n;
  cov = 0.5 * (cov + cov.transpose()).eval();
  const double eps = ridge_for(cov);
  cov.diagonal().array() += eps;
  return MultivariateGaussian(std::move(dims), std::move(mean), std::move(cov), eps);
}

std::size_t MultivariateGaussian::index_of(const std::string& label) const {
  auto it = std::find(dims_.begin(), dims_.end(), label);
  if (it == dims_.end()) throw InvalidInput("unknown dimension label '" + label + "'");
  return static_cast<std::size_t>(it - dims_.begin());
}

bool MultivariateGaussian::has(const std::string& label) const {
  return std::find(dims_.begin(), dims_.end(), label) != dims_.end();
}

Eigen::VectorXd MultivariateGaussian::sample(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(mean_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return mean_ + sqrt_cov_ * z;
}

MultivariateGaussian MultivariateGaussian::condition(
    const std::map<std::string, double>& observed) const {
  if (observed.empty() || observed.size() >= dims_.size()) {
    throw InvalidInput("conditioning needs between 1 and d-1 observed labels");
  }
  std::vector<Eigen::Index> keep;
  std::vector<Eigen::Index> obs;
  Eigen::VectorXd values(static_cast<Eigen::Index>(observed.size()));
  for (const auto& [label, value] : observed) {
    index_of(label);
    if (!std::isfinite(value)) throw InvalidInput("observed value for '" + label + "' is not finite");
  }
  std::vector<std::string> kept_dims;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    auto it = observed.find(dims_[i]);
    if (it == observed.end()) {
      keep.push_back(static_cast<Eigen::Index>(i));
      kept_dims.push_back(dims_[i]);
    } else {
      values[static_cast<Eigen::Index>(obs.size())] = it->second;
      obs.push_back(static_cast<Eigen::Index>(i));
    }
  }
  const Eigen::VectorXd mu_a = mean_(keep);
  const Eigen::VectorXd mu_b = mean_(obs);
  const Eigen::MatrixXd s_aa = cov_(keep, keep);
  const Eigen::MatrixXd s_ab = cov_(keep, obs);
  const Eigen::MatrixXd s_bb = cov_(obs, obs);

  const auto llt = robust_llt(s_bb);
  // gain = s_ab * s_bb^{-1}
  const Eigen::MatrixXd gain = llt.solve(s_ab.transpose()).transpose();
  Eigen::VectorXd mu = mu_a + gain * (values - mu_b);
  Eigen::MatrixXd sigma = s_aa - gain * s_ab.transpose();
  sigma = 0.5 * (sigma + sigma.transpose()).eval();
  // Rounding can leave tiny negative variances when the observed block explains everything.
  for (Eigen::Index i = 0; i < sigma.rows(); ++i) sigma(i, i) = std::max(sigma(i, i), 0.0);
  return MultivariateGaussian(std::move(kept_dims), std::move(mu), std::move(sigma), epsilon_);
}

MultivariateGaussian MultivariateGaussian::marginal(const std::vector<std::string>& keep) const {
  if (keep.empty()) throw InvalidInput("marginal needs at least one label");
  std::vector<Eigen::Index> idx;
  idx.reserve(keep.size());
  for (const auto& label : keep) idx.push_back(static_cast<Eigen::Index>(index_of(label)));
  return MultivariateGaussian(keep, mean_(idx), cov_(idx, idx), epsilon_);
}

double MultivariateGaussian::log_density(const Eigen::VectorXd& x) const {
  if (x.size() != mean_.size()) throw InvalidInput("point length does not match dimension count");
  const auto llt = robust_llt(cov_);
  const Eigen::VectorXd diff = x - mean_;
  const Eigen::VectorXd z = llt.matrixL().solve(diff);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double d = static_cast<double>(mean_.size());
  return -0.5 * (z.squaredNorm() + log_det + d * std::log(2 * std::numbers::pi));
}

double MultivariateGaussian::density(const Eigen::VectorXd& x) const {
  return std::exp(log_density(x));
}

bool MultivariateGaussian::operator==(const MultivariateGaussian& other) const {
  return dims_ == other.dims_ && mean_ == other.mean_ && cov_ == other.cov_ &&
         epsilon_ == other.epsilon_;
}

std::pair<int, int> LocationMap::grid_shape(const ImageFrame& frame, double cell_size) {
  if (!(cell_size > 0)) throw InvalidInput("cell size must be positive");
  const double cols = std::floor(frame.norm_width / cell_size);
  const double rows = std::floor(frame.norm_height / cell_size);
  if (cols < 1 || rows < 1) throw InvalidInput("frame is smaller than one grid cell");
  return {static_cast<int>(rows), static_cast<int>(cols)};
}

LocationMap::LocationMap(const ImageFrame& frame, double cell_size, std::vector<double> cells)
    : frame_(frame), cell_size_(cell_size), cells_(std::move(cells)) {
  std::tie(rows_, cols_) = grid_shape(frame, cell_size);
  if (cells_.size() != static_cast<std::size_t>(rows_) * cols_) {
    throw InvalidInput("location map has " + std::to_string(cells_.size()) + " cells, expected " +
                       std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  double total = 0;
  for (double v : cells_) {
    if (!(v >= 0) || !std::isfinite(v)) throw InvalidInput("location map cells must be finite and >= 0");
    total += v;
  }
  if (!(total > 0)) throw InvalidInput("location map has no mass");
  for (double& v : cells_) v /= total;
  cdf_.resize(cells_.size());
  std::partial_sum(cells_.begin(), cells_.end(), cdf_.begin());
}

LocationMap LocationMap::uniform(const ImageFrame& frame, double cell_size) {
  const auto [rows, cols] = grid_shape(frame, cell_size);
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  // Unit weights normalize to exactly 1/n per cell.
  return LocationMap(frame, cell_size, std::vector<double>(n, 1.0));
}

std::pair<double, double> LocationMap::sample_point(Rng& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng) * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  auto index = static_cast<std::size_t>(it - cdf_.begin());
  // Skip over empty cells that share the same cumulative value.
  while (cells_[index] <= 0 && index + 1 < cells_.size()) ++index;
  const int row = static_cast<int>(index / static_cast<std::size_t>(cols_));
  const int col = static_cast<int>(index % static_cast<std::size_t>(cols_));
  const double x = frame_.min_x() + (col + unit(rng)) * cell_width();
  const double y = frame_.min_y() + (row + unit(rng)) * cell_height();
  return {x, y};
}

LocationMap rasterize_2d(const MultivariateGaussian& dist, const ImageFrame& frame,
                         double cell_size) {
  if (dist.size() != 2) throw InvalidInput("rasterize_2d needs a two-dimensional gaussian");
  if (cell_size < 1) throw InvalidInput("cell size must be at least 1");
  const auto [rows, cols] = LocationMap::grid_shape(frame, cell_size);
  const auto llt = robust_llt(dist.cov());
  const Eigen::Matrix2d precision = llt.solve(Eigen::MatrixXd::Identity(2, 2));
  const double pxx = precision(0, 0), pxy = precision(0, 1), pyy = precision(1, 1);
  const double mx = dist.mean()[0], my = dist.mean()[1];
  const double cw = frame.norm_width / cols, ch = frame.norm_height / rows;

  std::vector<double> cells(static_cast<std::size_t>(rows) * cols);
  double max_log = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < rows; ++r) {
    const double dy = frame.min_y() + (r + 0.5) * ch - my;
    double* row = cells.data() + static_cast<std::size_t>(r) * cols;
    for (int c = 0; c < cols; ++c) {
      const double dx = frame.min_x() + (c + 0.5) * cw - mx;
      const double v = -0.5 * (pxx * dx * dx + 2 * pxy * dx * dy + pyy * dy * dy);
      row[c] = v;
      max_log = std::max(max_log, v);
    }
  }
  for (double& v : cells) v = std::exp(v - max_log);
  return LocationMap(frame, cell_size, std::move(cells));
}

double log_normal_sample(const UnivariateNormal& dist, Rng& rng) {
  return std::exp(dist.sample(rng));
}

Eigen::VectorXd log_normal_sample(const MultivariateGaussian& dist, Rng& rng) {
  return dist.sample(rng).array().exp();
}

}  // namespace situate
