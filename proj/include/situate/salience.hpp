#pragma once

#include <filesystem>
#include <vector>

#include "situate/gaussian.hpp"
#include "situate/image.hpp"

namespace situate {

/// Category-independent location prior over the same grid a LocationMap uses.
class SalienceMap {
 public:
  explicit SalienceMap(LocationMap distribution) : distribution_(std::move(distribution)) {}

  const LocationMap& distribution() const { return distribution_; }
  const ImageFrame& frame() const { return distribution_.frame(); }
  int rows() const { return distribution_.rows(); }
  int cols() const { return distribution_.cols(); }

 private:
  LocationMap distribution_;
};

struct SalienceParams {
  /// Center blur widths, in working-grid cells.
  std::vector<double> center_sigmas{2.0, 4.0, 8.0};
  /// Surround sigma = ratio * center sigma.
  double surround_ratio = 4.0;
  /// Final smoothing sigma as a fraction of the image width.
  double smoothing_fraction = 0.10;
  /// Features are computed on a grid whose long side is at most this many cells.
  int working_size = 128;
};

/// Separable Gaussian blur with a normalized kernel and reflected borders.
/// Preserves the total sum of the plane.
std::vector<double> gaussian_blur(const std::vector<double>& plane, int width, int height,
                                  double sigma);

/// Simplified center-surround salience: intensity contrast at three scales,
/// red/green and blue/yellow opponency for color images, and gradient
/// orientation energy at 0/45/90/135 degrees. Each feature map is scaled to a
/// max of 1, channels are summed with equal weight, the sum is smoothed with
/// sigma = 10% of the width and normalized to a probability distribution.
SalienceMap compute_salience(const Image& image, const ImageFrame& frame, double cell_size = 1.0,
                             const SalienceParams& params = {});

/// Reads the "SALIENCE v1" text format; the grid must match the frame.
SalienceMap load_salience(const std::filesystem::path& path, const ImageFrame& frame,
                          double cell_size = 1.0);
void save_salience(const SalienceMap& map, const std::filesystem::path& path);

/// Default epsilon for combine(): 1e-6 / number of cells.
double default_combine_epsilon(const LocationMap& location);

/// Cellwise product of the two maps (normalized), plus epsilon in every
/// cell, renormalized.
LocationMap combine(const LocationMap& location, const SalienceMap& salience, double epsilon);
LocationMap combine(const LocationMap& location, const SalienceMap& salience);

}  // namespace situate
