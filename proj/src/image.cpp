#include "situate/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "situate/error.hpp"
#include "situate/serialize.hpp"

namespace situate {

Image Image::grayscale(int width, int height, std::vector<double> values) {
  if (width <= 0 || height <= 0) throw InvalidInput("image dimensions must be positive");
  if (values.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidInput("image plane size does not match dimensions");
  }
  Image img;
  img.width = width;
  img.height = height;
  img.gray = std::move(values);
  return img;
}

Image Image::rgb(int width, int height, std::vector<double> r, std::vector<double> g,
                 std::vector<double> b) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (width <= 0 || height <= 0) throw InvalidInput("image dimensions must be positive");
  if (r.size() != n || g.size() != n || b.size() != n) {
    throw InvalidInput("image plane size does not match dimensions");
  }
  std::vector<double> gray(n);
  for (std::size_t i = 0; i < n; ++i) gray[i] = (r[i] + g[i] + b[i]) / 3.0;
  Image img = grayscale(width, height, std::move(gray));
  img.red = std::move(r);
  img.green = std::move(g);
  img.blue = std::move(b);
  return img;
}

namespace {

class PnmReader {
 public:
  PnmReader(std::string data, std::string name) : data_(std::move(data)), name_(std::move(name)) {}

  int next_int() {
    skip_space();
    if (pos_ >= data_.size() || !std::isdigit(static_cast<unsigned char>(data_[pos_]))) {
      throw ParseError(name_ + ": expected integer at byte " + std::to_string(pos_));
    }
    long v = 0;
    while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) {
      v = v * 10 + (data_[pos_++] - '0');
      if (v > 1'000'000'000) throw ParseError(name_ + ": integer too large");
    }
    return static_cast<int>(v);
  }

  int next_byte() {
    if (pos_ >= data_.size()) throw ParseError(name_ + ": truncated pixel data");
    return static_cast<unsigned char>(data_[pos_++]);
  }

  // Exactly one whitespace byte separates the header from binary data.
  void skip_single_space() { ++pos_; }

  std::string magic() {
    if (data_.size() < 2) throw ParseError(name_ + ": not a PNM file");
    pos_ = 2;
    return data_.substr(0, 2);
  }

 private:
  void skip_space() {
    while (pos_ < data_.size()) {
      if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string data_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace

Image load_pnm(const std::filesystem::path& path) {
  PnmReader in(read_file(path), path.string());
  const std::string magic = in.magic();
  const bool color = magic == "P3" || magic == "P6";
  const bool binary = magic == "P5" || magic == "P6";
  if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6") {
    throw ParseError(path.string() + ": unsupported image format '" + magic + "'");
  }
  const int width = in.next_int();
  const int height = in.next_int();
  const int maxval = in.next_int();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw ParseError(path.string() + ": bad image header");
  }
  if (binary) in.skip_single_space();
  auto sample = [&] {
    int v;
    if (!binary) {
      v = in.next_int();
    } else if (maxval < 256) {
      v = in.next_byte();
    } else {
      v = in.next_byte() << 8;
      v |= in.next_byte();
    }
    return std::min(1.0, static_cast<double>(v) / maxval);
  };
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (!color) {
    std::vector<double> g(n);
    for (auto& v : g) v = sample();
    return Image::grayscale(width, height, std::move(g));
  }
  std::vector<double> r(n), g(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = sample();
    g[i] = sample();
    b[i] = sample();
  }
  return Image::rgb(width, height, std::move(r), std::move(g), std::move(b));
}

void save_pnm(const Image& image, const std::filesystem::path& path) {
  if (image.empty()) throw InvalidInput("cannot save an empty image");
  std::string out = std::string(image.has_color() ? "P6" : "P5") + "\n" +
                    std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  auto byte = [](double v) {
    return static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255)));
  };
  const std::size_t n = image.gray.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (image.has_color()) {
      out += byte(image.red[i]);
      out += byte(image.green[i]);
      out += byte(image.blue[i]);
    } else {
      out += byte(image.gray[i]);
    }
  }
  write_file(path, out);
}

}  // namespace situate
