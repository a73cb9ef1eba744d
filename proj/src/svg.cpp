#include "situate/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace situate {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string header(double width, double height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect x=\"0\" y=\"0\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "start") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\">" +
         xml_escape(s) + "</text>\n";
}

std::string rect(double x, double y, double w, double h, const std::string& fill,
                 const std::string& extra = "") {
  return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(std::max(w, 0.0)) +
         "\" height=\"" + num(std::max(h, 0.0)) + "\" fill=\"" + fill + "\"" + extra + "/>\n";
}

const char* hatch_defs =
    "<defs><pattern id=\"fail\" width=\"8\" height=\"8\" patternUnits=\"userSpaceOnUse\" "
    "patternTransform=\"rotate(45)\"><rect width=\"8\" height=\"8\" fill=\"#eeeeee\"/>"
    "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"8\" stroke=\"#999999\" stroke-width=\"3\"/></pattern></defs>\n";

// One horizontal bar scaled to max_iterations; failures fill the axis with a hatch.
std::string bar(double x0, double y, double axis, double h, const IterCount& c, int max_iterations,
                const std::string& color) {
  if (c.failed()) return rect(x0, y, axis, h, "url(#fail)") + text(x0 + axis - 4, y + h - 3, "Failure", "end");
  const double w = axis * std::min(1.0, static_cast<double>(c.value()) / max_iterations);
  return rect(x0, y, w, h, color) + text(x0 + w + 4, y + h - 3, std::to_string(c.value()));
}

}  // namespace

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string median_chart_svg(const ExperimentReport& report) {
  const double left = 260, axis = 400, row = 28;
  const double height = 70 + row * static_cast<double>(report.methods.size());
  std::string s = header(left + axis + 80, height);
  s += hatch_defs;
  s += text(10, 20, "Median iterations per image to complete detection");
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    const auto& m = report.methods[i];
    const double y = 40 + row * static_cast<double>(i);
    s += text(left - 8, y + 15, m.label, "end");
    s += bar(left, y, axis, row - 8, m.median, std::max(1, report.max_iterations), kPalette[i % 8]);
  }
  s += text(left, height - 10, "0");
  s += text(left + axis, height - 10, std::to_string(report.max_iterations), "end");
  return s + "</svg>\n";
}

std::string cumulative_chart_svg(const ExperimentReport& report) {
  const double left = 60, top = 30, w = 520, h = 320;
  std::string s = header(left + w + 250, top + h + 50);
  s += text(10, 18, "Completed situation detections within n iterations");
  std::size_t runs = 1;
  for (const auto& m : report.methods) runs = std::max(runs, m.runs.size());
  const double max_n = std::max(1, report.max_iterations);
  s += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + h) + "\" x2=\"" + num(left + w) + "\" y2=\"" +
       num(top + h) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" +
       num(top + h) + "\" stroke=\"black\"/>\n";
  s += text(left, top + h + 16, "0", "middle");
  s += text(left + w, top + h + 16, std::to_string(report.max_iterations), "middle");
  s += text(left + w / 2, top + h + 36, "iterations", "middle");
  s += text(left - 6, top + 10, std::to_string(runs), "end");
  s += text(left - 6, top + h, "0", "end");
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    const auto& curve = report.methods[i].cumulative;
    std::string points = num(left) + "," + num(top + h);
    for (std::size_t n = 0; n < curve.size(); ++n) {
      // Keep the file small: emit only points where the curve changes, plus the end.
      if (n + 1 < curve.size() && n > 0 && curve[n] == curve[n - 1] && curve[n + 1] == curve[n]) continue;
      const double x = left + w * static_cast<double>(n + 1) / max_n;
      const double y = top + h - h * curve[n] / static_cast<double>(runs);
      points += " " + num(x) + "," + num(y);
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[i % 8]) +
         "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(i);
    s += rect(left + w + 16, ly - 9, 12, 10, kPalette[i % 8]);
    s += text(left + w + 34, ly, report.methods[i].label);
  }
  return s + "</svg>\n";
}

std::string interval_chart_svg(const ExperimentReport& report) {
  const double left = 260, axis = 400, bar_h = 12, group = 3 * bar_h + 14;
  const double height = 80 + group * static_cast<double>(report.methods.size());
  std::string s = header(left + axis + 80, height);
  s += hatch_defs;
  s += text(10, 20, "Median iterations between final detections (t01, t12, t23)");
  const char* shades[] = {"#1f77b4", "#6baed6", "#c6dbef"};
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    const auto& m = report.methods[i];
    const double y = 40 + group * static_cast<double>(i);
    s += text(left - 8, y + 1.5 * bar_h + 4, m.label, "end");
    const IterCount* counts[] = {&m.intervals.t01, &m.intervals.t12, &m.intervals.t23};
    for (int k = 0; k < 3; ++k) {
      s += bar(left, y + k * bar_h, axis, bar_h - 1, *counts[k], std::max(1, report.max_iterations), shades[k]);
    }
  }
  const double ly = height - 20;
  const char* names[] = {"t01", "t12", "t23"};
  for (int k = 0; k < 3; ++k) {
    s += rect(left + 80.0 * k, ly - 9, 12, 10, shades[k]);
    s += text(left + 80.0 * k + 16, ly, names[k]);
  }
  return s + "</svg>\n";
}

std::string workspace_snapshot_svg(const ImageFrame& frame, const Workspace& workspace,
                                   const std::vector<CategorySearchDist>& dists, int iteration) {
  const double view_w = 400;
  const double k = view_w / frame.norm_width;
  const double view_h = frame.norm_height * k;
  const double panel_x = view_w + 40, row_h = std::max(130.0, view_h / 3);
  const double height = std::max(view_h + 60, 40 + row_h * static_cast<double>(dists.size()));
  std::string s = header(panel_x + 520, height);
  s += text(10, 20, "Workspace after iteration " + std::to_string(iteration));
  const double ox = 10, oy = 30;
  s += rect(ox, oy, view_w, view_h, "#f4f4f4", " stroke=\"black\"");
  for (std::size_t i = 0; i < workspace.categories().names.size(); ++i) {
    const auto& c = workspace.categories().names[i];
    const ObjectProposal* d = workspace.detection(c);
    if (!d) continue;
    const bool final = workspace.state(c) == SlotState::kFinal;
    const double x = ox + (d->box.left() - frame.min_x()) * k;
    const double y = oy + (d->box.top() - frame.min_y()) * k;
    s += rect(x, y, d->box.w * k, d->box.h * k, "none",
              " stroke=\"red\" stroke-width=\"2\"" +
                  std::string(final ? "" : " stroke-dasharray=\"6,4\""));
    s += text(x + 2, y + 12, c + " " + num(d->score));
  }

  for (std::size_t i = 0; i < dists.size(); ++i) {
    const auto& dist = dists[i];
    const double y0 = 30 + row_h * static_cast<double>(i);
    s += text(panel_x, y0 + 12, dist.category);
    // Location heat map, downsampled to at most 60 columns; white is high.
    const LocationMap& map = dist.location;
    const int step = std::max(1, (map.cols() + 59) / 60);
    const int hc = (map.cols() + step - 1) / step, hr = (map.rows() + step - 1) / step;
    std::vector<double> heat(static_cast<std::size_t>(hc) * hr, 0.0);
    for (int r = 0; r < map.rows(); ++r) {
      for (int c = 0; c < map.cols(); ++c) heat[static_cast<std::size_t>(r / step) * hc + c / step] += map.at(r, c);
    }
    const double peak = std::max(*std::max_element(heat.begin(), heat.end()), 1e-300);
    const double hw = 160, cell = hw / hc;
    for (int r = 0; r < hr; ++r) {
      for (int c = 0; c < hc; ++c) {
        const int g = static_cast<int>(std::lround(255 * heat[static_cast<std::size_t>(r) * hc + c] / peak));
        char color[16];
        std::snprintf(color, sizeof color, "#%02x%02x%02x", g, g, g);
        s += rect(panel_x + c * cell, y0 + 20 + r * cell, cell + 0.05, cell + 0.05, color);
      }
    }
    // alpha and gamma marginal densities.
    for (int which = 0; which < 2; ++which) {
      const double gx = panel_x + 180 + 170.0 * which, gy = y0 + 20, gw = 150, gh = 90;
      s += rect(gx, gy, gw, gh, "none", " stroke=\"#888888\"");
      s += text(gx, gy + gh + 14, which == 0 ? "log area ratio" : "log aspect ratio");
      const double lo = which == 0 ? std::log(0.001) : std::log(0.1);
      const double hi = which == 0 ? 0.0 : std::log(10.0);
      std::vector<double> ys(101);
      for (int t = 0; t <= 100; ++t) {
        const double v = lo + (hi - lo) * t / 100.0;
        if (const auto* g = std::get_if<MultivariateGaussian>(&dist.shape)) {
          const double mean = g->mean()[which];
          const double sd = std::sqrt(std::max(g->cov()(which, which), 1e-12));
          ys[static_cast<std::size_t>(t)] = std::exp(-0.5 * std::pow((v - mean) / sd, 2)) / sd;
        } else {
          const auto& u = std::get<UniformShapePrior>(dist.shape);
          const double a = which == 0 ? u.alpha_min : u.gamma_min, b = which == 0 ? u.alpha_max : u.gamma_max;
          ys[static_cast<std::size_t>(t)] = (v >= a && v <= b) ? 1.0 : 0.0;
        }
      }
      const double top = std::max(*std::max_element(ys.begin(), ys.end()), 1e-300);
      std::string points;
      for (int t = 0; t <= 100; ++t) {
        points += (t ? " " : "") + num(gx + gw * t / 100.0) + "," +
                  num(gy + gh - gh * ys[static_cast<std::size_t>(t)] / top);
      }
      s += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[i % 8]) + "\" points=\"" + points + "\"/>\n";
    }
  }
  return s + "</svg>\n";
}

}  // namespace situate
