#pragma once

#include <filesystem>
#include <vector>

namespace situate {

/// Row-major image with intensities in [0, 1]. Color planes are empty for
/// grayscale images.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> gray;
  std::vector<double> red;
  std::vector<double> green;
  std::vector<double> blue;

  bool empty() const { return width <= 0 || height <= 0 || gray.empty(); }
  bool has_color() const { return !red.empty(); }

  static Image grayscale(int width, int height, std::vector<double> values);
  static Image rgb(int width, int height, std::vector<double> r, std::vector<double> g,
                   std::vector<double> b);
};

/// Reads binary or ASCII PGM/PPM (P2, P3, P5, P6).
Image load_pnm(const std::filesystem::path& path);
/// Writes P6 for color images and P5 otherwise, 8 bits per sample.
void save_pnm(const Image& image, const std::filesystem::path& path);

}  // namespace situate
