#include "situate/datagen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "situate/error.hpp"
#include "situate/serialize.hpp"
#include "situate/situation_model.hpp"

namespace situate {

namespace fs = std::filesystem;

GeneratorConfig GeneratorConfig::dog_walking() {
  const auto cats = CategorySet::dog_walking().names;

  // Centers: walker W, dog D = W + offset + noise, leash L = (W + D)/2 + offset + noise.
  // Rows are x_dw, y_dw, x_dog, y_dog, x_leash, y_leash; columns are unit noises.
  Eigen::VectorXd loc_mean(6);
  loc_mean << -60, -30, 60, 65, 0, 27.5;
  Eigen::MatrixXd loc_mix = Eigen::MatrixXd::Zero(6, 6);
  loc_mix(0, 0) = 100;
  loc_mix(1, 1) = 40;
  loc_mix(2, 0) = 100;
  loc_mix(2, 2) = 20;
  loc_mix(3, 1) = 40;
  loc_mix(3, 3) = 10;
  loc_mix(4, 0) = 100;
  loc_mix(4, 2) = 10;
  loc_mix(4, 4) = 15;
  loc_mix(5, 1) = 40;
  loc_mix(5, 3) = 5;
  loc_mix(5, 5) = 15;

  // Sizes share a common photographic scale; aspect ratios are independent.
  // Noise columns: scale, size_dw, size_dog, size_leash, shape_dw, shape_dog, shape_leash.
  Eigen::VectorXd shape_mean(6);
  shape_mean << std::log(0.10), std::log(0.45), std::log(0.025), std::log(1.3), std::log(0.012),
      std::log(1.0);
  Eigen::MatrixXd shape_mix = Eigen::MatrixXd::Zero(6, 7);
  shape_mix(0, 0) = 0.5;
  shape_mix(0, 1) = 0.12;
  shape_mix(1, 4) = 0.12;
  shape_mix(2, 0) = 0.5;
  shape_mix(2, 2) = 0.2;
  shape_mix(3, 5) = 0.2;
  shape_mix(4, 0) = 0.5;
  shape_mix(4, 3) = 0.45;
  shape_mix(5, 6) = 0.5;

  std::vector<std::string> loc_dims, shape_dims;
  for (const auto& c : cats) {
    loc_dims.push_back(x_label(c));
    loc_dims.push_back(y_label(c));
    shape_dims.push_back(alpha_label(c));
    shape_dims.push_back(gamma_label(c));
  }
  return GeneratorConfig(MultivariateGaussian(loc_dims, loc_mean, loc_mix * loc_mix.transpose()),
                         MultivariateGaussian(shape_dims, shape_mean, shape_mix * shape_mix.transpose()));
}

nlohmann::ordered_json generator_config_to_json(const GeneratorConfig& config) {
  nlohmann::ordered_json j;
  j["width"] = config.width;
  j["height"] = config.height;
  j["categories"] = config.categories.names;
  j["location"] = gaussian_to_json(config.location);
  j["shape"] = gaussian_to_json(config.shape);
  j["clamp"] = config.clamp == ClampPolicy::kTranslate ? "translate" : "reject";
  j["max_rejections"] = config.max_rejections;
  j["seed"] = config.seed;
  return j;
}

GeneratorConfig generator_config_from_json(const nlohmann::ordered_json& j) {
  GeneratorConfig config = GeneratorConfig::dog_walking();
  try {
    if (j.contains("width")) config.width = j.at("width").get<double>();
    if (j.contains("height")) config.height = j.at("height").get<double>();
    if (j.contains("categories")) config.categories.names = j.at("categories").get<std::vector<std::string>>();
    if (j.contains("location")) config.location = gaussian_from_json(j.at("location"));
    if (j.contains("shape")) config.shape = gaussian_from_json(j.at("shape"));
    if (j.contains("clamp")) {
      const auto clamp = j.at("clamp").get<std::string>();
      if (clamp == "translate") {
        config.clamp = ClampPolicy::kTranslate;
      } else if (clamp == "reject") {
        config.clamp = ClampPolicy::kReject;
      } else {
        throw ParseError("clamp must be 'translate' or 'reject'");
      }
    }
    if (j.contains("max_rejections")) config.max_rejections = j.at("max_rejections").get<int>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed generator config: ") + e.what());
  }
  return config;
}

namespace {

// One attempt at turning a joint draw into an in-bounds annotation.
bool place_boxes(const GeneratorConfig& config, const ImageFrame& frame,
                 const Eigen::VectorXd& loc, const Eigen::VectorXd& shape,
                 std::map<std::string, CornerBox>& out) {
  out.clear();
  for (const auto& c : config.categories.names) {
    const double cx = loc[static_cast<Eigen::Index>(config.location.index_of(x_label(c)))];
    const double cy = loc[static_cast<Eigen::Index>(config.location.index_of(y_label(c)))];
    const double alpha = shape[static_cast<Eigen::Index>(config.shape.index_of(alpha_label(c)))];
    const double gamma = shape[static_cast<Eigen::Index>(config.shape.index_of(gamma_label(c)))];
    CornerBox box = to_original(box_from_descriptors(cx, cy, alpha, gamma, frame), frame);
    if (!(box.w > 0) || !(box.h > 0) || box.w > config.width || box.h > config.height) return false;
    const bool inside = box.x >= 0 && box.y >= 0 && box.x + box.w <= config.width &&
                        box.y + box.h <= config.height;
    if (!inside) {
      if (config.clamp == ClampPolicy::kReject) return false;
      box.x = std::clamp(box.x, 0.0, config.width - box.w);
      box.y = std::clamp(box.y, 0.0, config.height - box.h);
    }
    out.emplace(c, box);
  }
  return true;
}

}  // namespace

std::vector<SituationAnnotation> generate_synthetic(const GeneratorConfig& config, int n, Rng& rng) {
  if (n < 1) throw InvalidInput("number of annotations must be at least 1");
  if (config.max_rejections < 1) throw InvalidInput("max_rejections must be at least 1");
  const ImageFrame frame = normalize_frame(config.width, config.height);
  for (const auto& c : config.categories.names) {
    for (const auto& label : {x_label(c), y_label(c)}) {
      if (!config.location.has(label)) throw InvalidInput("generator location joint lacks '" + label + "'");
    }
    for (const auto& label : {alpha_label(c), gamma_label(c)}) {
      if (!config.shape.has(label)) throw InvalidInput("generator shape joint lacks '" + label + "'");
    }
  }
  std::vector<SituationAnnotation> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SituationAnnotation a;
    char id[32];
    std::snprintf(id, sizeof id, "synth_%05d", i);
    a.image_id = id;
    a.width = config.width;
    a.height = config.height;
    int rejections = 0;
    while (true) {
      const Eigen::VectorXd loc = config.location.sample(rng);
      const Eigen::VectorXd shape = config.shape.sample(rng);
      if (place_boxes(config, frame, loc, shape, a.objects)) break;
      if (++rejections > config.max_rejections) {
        throw GenerationError("generator rejected more than " +
                              std::to_string(config.max_rejections) +
                              " consecutive draws; boxes do not fit the frame");
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

Image render_scene(const SituationAnnotation& annotation, std::uint64_t seed) {
  const int w = static_cast<int>(std::lround(annotation.width));
  const int h = static_cast<int>(std::lround(annotation.height));
  if (w < 1 || h < 1) throw InvalidInput("cannot render an empty image");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.03);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> r(n), g(n), b(n);

  const double base = 0.4 + 0.2 * unit(rng);
  const double fx = 2 + 3 * unit(rng), fy = 2 + 3 * unit(rng), phase = 6.28 * unit(rng);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y) * w + x;
      const double wave = 0.06 * std::sin(fx * 6.283 * x / w + phase) * std::cos(fy * 6.283 * y / h);
      r[i] = base + wave;
      g[i] = base + wave + 0.02;
      b[i] = base + wave - 0.02;
    }
  }

  auto paint_ellipse = [&](const CornerBox& box, double cr, double cg, double cb) {
    const double cx = box.x + box.w / 2, cy = box.y + box.h / 2;
    const int x0 = std::max(0, static_cast<int>(box.x)), x1 = std::min(w - 1, static_cast<int>(box.x + box.w));
    const int y0 = std::max(0, static_cast<int>(box.y)), y1 = std::min(h - 1, static_cast<int>(box.y + box.h));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = (x + 0.5 - cx) / (box.w / 2), dy = (y + 0.5 - cy) / (box.h / 2);
        if (dx * dx + dy * dy > 1) continue;
        const auto i = static_cast<std::size_t>(y) * w + x;
        r[i] = cr;
        g[i] = cg;
        b[i] = cb;
      }
    }
  };
  auto paint_line = [&](const CornerBox& box, double cr, double cg, double cb) {
    const int steps = static_cast<int>(std::max(box.w, box.h) * 2) + 1;
    const int half = std::max(1, static_cast<int>(std::min(box.w, box.h) / 12));
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      const int px = static_cast<int>(box.x + t * box.w), py = static_cast<int>(box.y + t * box.h);
      for (int oy = -half; oy <= half; ++oy) {
        for (int ox = -half; ox <= half; ++ox) {
          const int x = px + ox, y = py + oy;
          if (x < 0 || y < 0 || x >= w || y >= h) continue;
          const auto i = static_cast<std::size_t>(y) * w + x;
          r[i] = cr;
          g[i] = cg;
          b[i] = cb;
        }
      }
    }
  };
  auto contrasting = [&] {
    const double lum = base > 0.5 ? 0.1 + 0.15 * unit(rng) : 0.75 + 0.2 * unit(rng);
    return std::array<double, 3>{std::clamp(lum + 0.2 * (unit(rng) - 0.5), 0.0, 1.0),
                                 std::clamp(lum + 0.2 * (unit(rng) - 0.5), 0.0, 1.0),
                                 std::clamp(lum + 0.2 * (unit(rng) - 0.5), 0.0, 1.0)};
  };

  for (int k = 0; k < 3; ++k) {
    const double area = (0.005 + 0.03 * unit(rng)) * w * h;
    const double aspect = std::exp(std::log(0.5) + std::log(4.0) * unit(rng));
    CornerBox d{0, 0, std::sqrt(area * aspect), std::sqrt(area / aspect)};
    d.x = unit(rng) * std::max(0.0, w - d.w);
    d.y = unit(rng) * std::max(0.0, h - d.h);
    const auto c = contrasting();
    paint_ellipse(d, c[0], c[1], c[2]);
  }
  for (const auto& [category, box] : annotation.objects) {
    const auto c = contrasting();
    if (category == "leash") {
      paint_line(box, c[0], c[1], c[2]);
    } else {
      paint_ellipse(box, c[0], c[1], c[2]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = std::clamp(r[i] + noise(rng), 0.0, 1.0);
    g[i] = std::clamp(g[i] + noise(rng), 0.0, 1.0);
    b[i] = std::clamp(b[i] + noise(rng), 0.0, 1.0);
  }
  return Image::rgb(w, h, std::move(r), std::move(g), std::move(b));
}

SituationAnnotation load_annotation(const fs::path& path, const CategorySet& categories) {
  const std::string text = read_file(path);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = text.substr(0, std::min<std::size_t>(e.byte, text.size()));
    const auto line = 1 + std::count(upto.begin(), upto.end(), '\n');
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
  SituationAnnotation a;
  try {
    a = annotation_from_json(j);
    validate(a, categories);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const InvalidDataset& e) {
    throw InvalidDataset(path.string() + ": " + e.what());
  }
  if (a.image_path && fs::path(*a.image_path).is_relative()) {
    a.image_path = (path.parent_path() / *a.image_path).string();
  }
  return a;
}

std::vector<SituationAnnotation> load_dataset(const fs::path& directory,
                                              const CategorySet& categories) {
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) throw IoError("not a directory: '" + directory.string() + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<SituationAnnotation> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_annotation(f, categories));
  return out;
}

void save_dataset(const std::vector<SituationAnnotation>& annotations, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw IoError("cannot create '" + directory.string() + "': " + ec.message());
  for (const auto& a : annotations) {
    if (a.image_id.empty() || a.image_id.find('/') != std::string::npos) {
      throw InvalidInput("image_id '" + a.image_id + "' cannot be used as a file name");
    }
    write_file(directory / (a.image_id + ".json"), annotation_to_json(a).dump(2) + "\n");
  }
}

std::vector<Fold> split_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 1) throw InvalidInput("fold count must be at least 1");
  if (static_cast<std::size_t>(k) > n) {
    throw InvalidInput("cannot split " + std::to_string(n) + " items into " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Fold> folds(static_cast<std::size_t>(k));
  if (k == 1) {
    std::sort(order.begin(), order.end());
    folds[0] = {order, order};
    return folds;
  }
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t start = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    std::vector<bool> in_test(n, false);
    for (std::size_t i = start; i < start + size; ++i) {
      folds[f].test.push_back(order[i]);
      in_test[order[i]] = true;
    }
    std::sort(folds[f].test.begin(), folds[f].test.end());
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_test[i]) folds[f].train.push_back(i);
    }
    start += size;
  }
  return folds;
}

}  // namespace situate
