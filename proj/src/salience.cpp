#include "situate/salience.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "situate/error.hpp"
#include "situate/serialize.hpp"

namespace situate {

namespace {

// Index into [0, n) for an arbitrary integer using half-sample symmetric
// reflection (... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...).
int reflect(int p, int n) {
  const int period = 2 * n;
  p %= period;
  if (p < 0) p += period;
  return p < n ? p : period - 1 - p;
}

std::vector<double> kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * static_cast<std::size_t>(radius) + 1);
  double total = 0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : k) v /= total;
  return k;
}

struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> v;
};

// Box-filter resample of a full-resolution plane onto a coarser grid.
Plane area_resample(const std::vector<double>& src, int sw, int sh, int dw, int dh) {
  Plane out{dw, dh, std::vector<double>(static_cast<std::size_t>(dw) * dh, 0.0)};
  std::vector<double> weight(out.v.size(), 0.0);
  for (int y = 0; y < sh; ++y) {
    const int ty = std::min(dh - 1, static_cast<int>(static_cast<long>(y) * dh / sh));
    for (int x = 0; x < sw; ++x) {
      const int tx = std::min(dw - 1, static_cast<int>(static_cast<long>(x) * dw / sw));
      const auto t = static_cast<std::size_t>(ty) * dw + tx;
      out.v[t] += src[static_cast<std::size_t>(y) * sw + x];
      weight[t] += 1.0;
    }
  }
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    if (weight[i] > 0) out.v[i] /= weight[i];
  }
  return out;
}

void scale_to_unit_max(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (m > 0) {
    for (double& x : v) x /= m;
  }
}

// Sum over scales of |center - surround|, each scale normalized to max 1.
std::vector<double> center_surround(const Plane& p, const SalienceParams& params) {
  std::vector<double> acc(p.v.size(), 0.0);
  for (double sc : params.center_sigmas) {
    const auto center = gaussian_blur(p.v, p.width, p.height, sc);
    const auto surround = gaussian_blur(p.v, p.width, p.height, sc * params.surround_ratio);
    std::vector<double> diff(p.v.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(center[i] - surround[i]);
    scale_to_unit_max(diff);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += diff[i];
  }
  scale_to_unit_max(acc);
  return acc;
}

double bilinear(const Plane& p, double fx, double fy) {
  fx = std::clamp(fx, 0.0, static_cast<double>(p.width - 1));
  fy = std::clamp(fy, 0.0, static_cast<double>(p.height - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, p.width - 1);
  const int y1 = std::min(y0 + 1, p.height - 1);
  const double ax = fx - x0, ay = fy - y0;
  auto at = [&](int x, int y) { return p.v[static_cast<std::size_t>(y) * p.width + x]; };
  return (1 - ay) * ((1 - ax) * at(x0, y0) + ax * at(x1, y0)) +
         ay * ((1 - ax) * at(x0, y1) + ax * at(x1, y1));
}

// Flooring keeps every cell positive so a featureless image becomes uniform.
std::vector<double> floor_and_normalize(std::vector<double> v) {
  double max = 0;
  for (double& x : v) {
    x = std::max(x, 0.0);
    max = std::max(max, x);
  }
  const double floor = max > 0 ? 1e-6 * max : 1.0;
  double total = 0;
  for (double& x : v) {
    x += floor;
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

}  // namespace

std::vector<double> gaussian_blur(const std::vector<double>& plane, int width, int height,
                                  double sigma) {
  if (plane.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidInput("plane size does not match dimensions");
  }
  if (!(sigma > 0)) return plane;
  const auto k = kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  std::vector<double> tmp(plane.size()), out(plane.size());
  for (int y = 0; y < height; ++y) {
    const double* row = plane.data() + static_cast<std::size_t>(y) * width;
    double* dst = tmp.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) {
      double s = 0;
      for (int i = -radius; i <= radius; ++i) s += k[static_cast<std::size_t>(i + radius)] * row[reflect(x + i, width)];
      dst[x] = s;
    }
  }
  for (int y = 0; y < height; ++y) {
    double* dst = out.data() + static_cast<std::size_t>(y) * width;
    for (int x = 0; x < width; ++x) dst[x] = 0;
    for (int i = -radius; i <= radius; ++i) {
      const double w = k[static_cast<std::size_t>(i + radius)];
      const double* src = tmp.data() + static_cast<std::size_t>(reflect(y + i, height)) * width;
      for (int x = 0; x < width; ++x) dst[x] += w * src[x];
    }
  }
  return out;
}

SalienceMap compute_salience(const Image& image, const ImageFrame& frame, double cell_size,
                             const SalienceParams& params) {
  if (image.empty()) throw InvalidInput("cannot compute salience of an empty image");
  if (image.width != static_cast<int>(std::lround(frame.orig_width)) ||
      image.height != static_cast<int>(std::lround(frame.orig_height))) {
    throw InvalidInput("image is " + std::to_string(image.width) + "x" +
                       std::to_string(image.height) + " but the frame expects " +
                       std::to_string(frame.orig_width) + "x" + std::to_string(frame.orig_height));
  }
  const auto [rows, cols] = LocationMap::grid_shape(frame, cell_size);

  const double shrink = std::min(1.0, static_cast<double>(params.working_size) /
                                          std::max(image.width, image.height));
  const int ww = std::max(1, static_cast<int>(std::lround(image.width * shrink)));
  const int wh = std::max(1, static_cast<int>(std::lround(image.height * shrink)));
  auto working = [&](const std::vector<double>& src) {
    return area_resample(src, image.width, image.height, ww, wh);
  };

  const Plane intensity = working(image.gray);
  std::vector<double> total = center_surround(intensity, params);

  if (image.has_color()) {
    const Plane r = working(image.red), g = working(image.green), b = working(image.blue);
    Plane rg{ww, wh, std::vector<double>(r.v.size())};
    Plane by{ww, wh, std::vector<double>(r.v.size())};
    for (std::size_t i = 0; i < r.v.size(); ++i) {
      rg.v[i] = r.v[i] - g.v[i];
      by.v[i] = b.v[i] - 0.5 * (r.v[i] + g.v[i]);
    }
    const auto crg = center_surround(rg, params);
    const auto cby = center_surround(by, params);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += crg[i] + cby[i];
  }

  // Orientation energy from central differences of a lightly blurred intensity.
  const auto smooth = gaussian_blur(intensity.v, ww, wh, 1.0);
  std::vector<double> gx(smooth.size()), gy(smooth.size());
  for (int y = 0; y < wh; ++y) {
    for (int x = 0; x < ww; ++x) {
      auto at = [&](int xx, int yy) {
        return smooth[static_cast<std::size_t>(reflect(yy, wh)) * ww + reflect(xx, ww)];
      };
      const auto i = static_cast<std::size_t>(y) * ww + x;
      gx[i] = 0.5 * (at(x + 1, y) - at(x - 1, y));
      gy[i] = 0.5 * (at(x, y + 1) - at(x, y - 1));
    }
  }
  std::vector<double> orientation(smooth.size(), 0.0);
  for (int k = 0; k < 4; ++k) {
    const double theta = k * std::numbers::pi / 4;
    Plane energy{ww, wh, std::vector<double>(smooth.size())};
    for (std::size_t i = 0; i < smooth.size(); ++i) {
      energy.v[i] = std::abs(gx[i] * std::cos(theta) + gy[i] * std::sin(theta));
    }
    const auto cs = center_surround(energy, params);
    for (std::size_t i = 0; i < orientation.size(); ++i) orientation[i] += cs[i];
  }
  scale_to_unit_max(orientation);
  for (std::size_t i = 0; i < total.size(); ++i) total[i] += orientation[i];

  Plane smoothed{ww, wh, gaussian_blur(total, ww, wh, params.smoothing_fraction * ww)};

  std::vector<double> cells(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    const double fy = (r + 0.5) * wh / rows - 0.5;
    for (int c = 0; c < cols; ++c) {
      const double fx = (c + 0.5) * ww / cols - 0.5;
      cells[static_cast<std::size_t>(r) * cols + c] = bilinear(smoothed, fx, fy);
    }
  }
  return SalienceMap(LocationMap(frame, cell_size, floor_and_normalize(std::move(cells))));
}

SalienceMap load_salience(const std::filesystem::path& path, const ImageFrame& frame,
                          double cell_size) {
  std::istringstream in(read_file(path));
  std::string tag, version;
  in >> tag >> version;
  if (tag != "SALIENCE" || version != "v1") {
    throw ParseError(path.string() + ": expected 'SALIENCE v1' header");
  }
  long rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0) {
    throw ParseError(path.string() + ": bad grid dimensions");
  }
  const auto [want_rows, want_cols] = LocationMap::grid_shape(frame, cell_size);
  if (rows != want_rows || cols != want_cols) {
    throw InvalidInput(path.string() + ": salience grid is " + std::to_string(rows) + "x" +
                       std::to_string(cols) + " but the frame needs " + std::to_string(want_rows) +
                       "x" + std::to_string(want_cols));
  }
  std::vector<double> cells(static_cast<std::size_t>(rows * cols));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!(in >> cells[i])) {
      throw ParseError(path.string() + ": expected " + std::to_string(cells.size()) +
                       " values, got " + std::to_string(i));
    }
    if (!(cells[i] >= 0) || !std::isfinite(cells[i])) {
      throw InvalidInput(path.string() + ": salience values must be finite and non-negative");
    }
  }
  std::string extra;
  if (in >> extra) throw ParseError(path.string() + ": trailing data after salience grid");
  double total = 0;
  for (double v : cells) total += v;
  if (!(total > 0)) std::fill(cells.begin(), cells.end(), 1.0);
  return SalienceMap(LocationMap(frame, cell_size, std::move(cells)));
}

void save_salience(const SalienceMap& map, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(17);
  out << "SALIENCE v1\n" << map.rows() << " " << map.cols() << "\n";
  const auto& cells = map.distribution().cells();
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      out << (c ? " " : "") << cells[static_cast<std::size_t>(r) * map.cols() + c];
    }
    out << "\n";
  }
  write_file(path, out.str());
}

double default_combine_epsilon(const LocationMap& location) {
  return 1e-6 / static_cast<double>(location.num_cells());
}

LocationMap combine(const LocationMap& location, const SalienceMap& salience, double epsilon) {
  const LocationMap& s = salience.distribution();
  if (location.rows() != s.rows() || location.cols() != s.cols()) {
    throw InvalidInput("location and salience grids differ in shape");
  }
  if (!(epsilon >= 0)) throw InvalidInput("epsilon must be non-negative");
  const auto& a = location.cells();
  const auto& b = s.cells();
  std::vector<double> out(a.size());
  double total = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a[i] * b[i];
    total += out[i];
  }
  if (total > 0) {
    for (double& v : out) v /= total;
  }
  for (double& v : out) v += epsilon;
  if (total <= 0 && epsilon <= 0) std::fill(out.begin(), out.end(), 1.0);
  return LocationMap(location.frame(), location.cell_size(), std::move(out));
}

LocationMap combine(const LocationMap& location, const SalienceMap& salience) {
  return combine(location, salience, default_combine_epsilon(location));
}

}  // namespace situate
