#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the library code they are checking.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdint>
#include <string>
#include <random>
#include <vector>

namespace oracle {

struct IntBox {
  int x0, y0, x1, y1;  // half-open [x0, x1) x [y0, y1)
};

/// IOU by counting unit cells of an integer grid.
inline double pixel_count_iou(const IntBox& a, const IntBox& b) {
  const int lo_x = std::min(a.x0, b.x0), hi_x = std::max(a.x1, b.x1);
  const int lo_y = std::min(a.y0, b.y0), hi_y = std::max(a.y1, b.y1);
  long inter = 0, uni = 0;
  for (int y = lo_y; y < hi_y; ++y) {
    for (int x = lo_x; x < hi_x; ++x) {
      const bool in_a = x >= a.x0 && x < a.x1 && y >= a.y0 && y < a.y1;
      const bool in_b = x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Random symmetric positive definite matrix A A^T + floor I.
inline Eigen::MatrixXd random_spd(int d, std::mt19937_64& rng, double floor = 0.5) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = n(rng);
  Eigen::MatrixXd s = a * a.transpose() + floor * Eigen::MatrixXd::Identity(d, d);
  return 0.5 * (s + s.transpose());
}

/// E[x_target | x_observed = values] by integrating the (unnormalized) joint
/// density of (x_target, x_observed) along x_target with the trapezoid rule.
/// The joint over {target} U observed is read directly from mu / sigma.
inline double conditional_mean_by_integration(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                              int target, const std::vector<int>& observed,
                                              const std::vector<double>& values) {
  const int k = static_cast<int>(observed.size()) + 1;
  std::vector<int> idx{target};
  idx.insert(idx.end(), observed.begin(), observed.end());
  Eigen::VectorXd m(k);
  Eigen::MatrixXd s(k, k);
  for (int i = 0; i < k; ++i) {
    m(i) = mu(idx[i]);
    for (int j = 0; j < k; ++j) s(i, j) = sigma(idx[i], idx[j]);
  }
  const Eigen::MatrixXd precision = s.fullPivLu().inverse();
  Eigen::VectorXd z(k);
  for (int i = 1; i < k; ++i) z(i) = values[static_cast<std::size_t>(i - 1)] - m(i);
  auto log_density = [&](double t) {
    z(0) = t - m(0);
    return -0.5 * z.dot(precision * z);
  };
  // Integrate the first moment over [lo, hi] on n points.
  auto moments = [&](double lo, double hi, int n, double& mean, double& sd) {
    std::vector<double> ts(n), ls(n);
    double peak = -INFINITY;
    for (int i = 0; i < n; ++i) {
      ts[i] = lo + (hi - lo) * i / (n - 1);
      ls[i] = log_density(ts[i]);
      peak = std::max(peak, ls[i]);
    }
    double w0 = 0, w1 = 0, w2 = 0;
    for (int i = 0; i < n; ++i) {
      const double w = std::exp(ls[i] - peak) * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
      w0 += w;
      w1 += w * ts[i];
      w2 += w * ts[i] * ts[i];
    }
    mean = w1 / w0;
    sd = std::sqrt(std::max(w2 / w0 - mean * mean, 0.0));
  };
  const double spread = std::sqrt(s(0, 0));
  double mean = 0, sd = 0;
  moments(m(0) - 30 * spread, m(0) + 30 * spread, 20001, mean, sd);
  for (int pass = 0; pass < 2; ++pass) moments(mean - 14 * sd, mean + 14 * sd, 8001, mean, sd);
  return mean;
}

/// Mass of a 2-d Gaussian in each grid cell, by sub-sampling every cell on an
/// s x s lattice of its points and renormalizing over the whole grid.
inline std::vector<double> integrate_cells(const Eigen::Vector2d& mu, const Eigen::Matrix2d& sigma,
                                           double x0, double y0, double cw, double ch, int rows,
                                           int cols, int s) {
  const Eigen::Matrix2d precision = sigma.inverse();
  std::vector<double> cells(static_cast<std::size_t>(rows) * cols, 0.0);
  double total = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      double acc = 0;
      for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) {
          Eigen::Vector2d p(x0 + (c + (j + 0.5) / s) * cw, y0 + (r + (i + 0.5) / s) * ch);
          const Eigen::Vector2d d = p - mu;
          acc += std::exp(-0.5 * d.dot(precision * d));
        }
      }
      cells[static_cast<std::size_t>(r) * cols + c] = acc;
      total += acc;
    }
  }
  for (double& v : cells) v /= total;
  return cells;
}

/// Direct 2-d convolution with a mirrored border (c b a | a b c | c b a) and
/// a Gaussian kernel truncated at 3 sigma, summing over the full square
/// support instead of running two 1-d passes.
inline std::vector<double> convolve_2d(const std::vector<double>& plane, int w, int h, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3 * sigma)));
  std::vector<double> k1(2 * radius + 1);
  double ksum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k1[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    ksum += k1[i + radius];
  }
  for (double& v : k1) v /= ksum;
  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
  };
  std::vector<double> out(plane.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          acc += k1[dy + radius] * k1[dx + radius] *
                 plane[static_cast<std::size_t>(reflect(y + dy, h)) * w + reflect(x + dx, w)];
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

/// Replays a partial Fisher-Yates shuffle: step i swaps slot i with a uniform
/// pick from [i, n).
inline std::vector<std::size_t> replay_shuffle(std::size_t n, std::size_t steps, std::mt19937_64& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = 0; i < std::min(n, steps); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(p[i], p[pick(rng)]);
  }
  p.resize(std::min(n, steps));
  return p;
}

}  // namespace oracle

namespace oracle {

/// Minimal XML well-formedness check: balanced and properly nested tags,
/// quoted attributes, and only the predefined entities in text.
inline bool well_formed_xml(const std::string& s, std::string* why = nullptr) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool root_seen = false;
  while (i < s.size()) {
    if (s[i] == '<') {
      const std::size_t end = s.find('>', i);
      if (end == std::string::npos) return fail("unterminated tag");
      std::string tag = s.substr(i + 1, end - i - 1);
      i = end + 1;
      if (tag.starts_with("?")) {
        if (!tag.ends_with("?")) return fail("bad declaration");
        continue;
      }
      if (tag.starts_with("/")) {
        const std::string name = tag.substr(1);
        if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
        stack.pop_back();
        continue;
      }
      const bool self_closing = tag.ends_with("/");
      if (self_closing) tag.pop_back();
      const std::size_t sp = tag.find_first_of(" \t\n");
      const std::string name = tag.substr(0, sp);
      if (name.empty()) return fail("empty tag name");
      // Attributes: name="value" pairs.
      std::size_t p = sp == std::string::npos ? tag.size() : sp;
      while (p < tag.size()) {
        while (p < tag.size() && std::isspace(static_cast<unsigned char>(tag[p]))) ++p;
        if (p >= tag.size()) break;
        const std::size_t eq = tag.find('=', p);
        if (eq == std::string::npos || eq + 1 >= tag.size() || tag[eq + 1] != '"') return fail("bad attribute in <" + name + ">");
        const std::size_t close = tag.find('"', eq + 2);
        if (close == std::string::npos) return fail("unterminated attribute");
        if (tag.substr(eq + 2, close - eq - 2).find('<') != std::string::npos) return fail("'<' in attribute");
        p = close + 1;
      }
      if (stack.empty()) {
        if (root_seen) return fail("second root element");
        root_seen = true;
      }
      if (!self_closing) stack.push_back(name);
    } else if (s[i] == '&') {
      const std::size_t semi = s.find(';', i);
      if (semi == std::string::npos) return fail("bare '&'");
      const std::string ent = s.substr(i, semi - i + 1);
      if (ent != "&amp;" && ent != "&lt;" && ent != "&gt;" && ent != "&quot;" && ent != "&apos;") {
        return fail("unknown entity " + ent);
      }
      i = semi + 1;
    } else {
      if (stack.empty() && !std::isspace(static_cast<unsigned char>(s[i]))) return fail("text outside root");
      ++i;
    }
  }
  if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
  if (!root_seen) return fail("no root element");
  return true;
}

}  // namespace oracle
