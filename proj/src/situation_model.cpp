#include "situate/situation_model.hpp"

#include <algorithm>
#include <cmath>

#include "situate/error.hpp"

namespace situate {

std::string x_label(const std::string& category) { return "x_" + category; }
std::string y_label(const std::string& category) { return "y_" + category; }
std::string alpha_label(const std::string& category) { return "alpha_" + category; }
std::string gamma_label(const std::string& category) { return "gamma_" + category; }

std::pair<double, double> shape_descriptors(const BoundingBox& box, const ImageFrame& frame) {
  return {std::log(box.area_ratio(frame)), std::log(box.aspect_ratio())};
}

BoundingBox box_from_descriptors(double cx, double cy, double alpha, double gamma,
                                 const ImageFrame& frame) {
  const double area = std::exp(alpha) * frame.area();
  const double aspect = std::exp(gamma);
  return {cx, cy, std::sqrt(area * aspect), std::sqrt(area / aspect)};
}

namespace {

UnivariateNormal fit_univariate(const std::vector<double>& values, std::string label) {
  const double n = static_cast<double>(values.size());
  double mean = 0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;
  var += std::max(kRidgeFactor * var, kRidgeFloor);
  return {std::move(label), mean, std::sqrt(var)};
}

std::vector<std::string> location_dims(const std::vector<std::string>& cats) {
  std::vector<std::string> dims;
  for (const auto& c : cats) {
    dims.push_back(x_label(c));
    dims.push_back(y_label(c));
  }
  return dims;
}

std::vector<std::string> shape_dims(const std::vector<std::string>& cats) {
  std::vector<std::string> dims;
  for (const auto& c : cats) {
    dims.push_back(alpha_label(c));
    dims.push_back(gamma_label(c));
  }
  return dims;
}

}  // namespace

SituationModel::SituationModel(CategorySet categories, std::map<std::string, BoxPrior> box_priors,
                               std::map<Pair, MultivariateGaussian> loc_pair,
                               MultivariateGaussian loc_triple,
                               std::map<Pair, MultivariateGaussian> box_pair,
                               MultivariateGaussian box_triple)
    : categories_(std::move(categories)),
      box_priors_(std::move(box_priors)),
      loc_pair_(std::move(loc_pair)),
      loc_triple_(std::move(loc_triple)),
      box_pair_(std::move(box_pair)),
      box_triple_(std::move(box_triple)) {
  if (categories_.size() != 3) throw InvalidInput("a situation model has exactly three categories");
  for (const auto& c : categories_.names) {
    if (!box_priors_.contains(c)) throw InvalidInput("missing box prior for '" + c + "'");
  }
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    for (std::size_t j = i + 1; j < categories_.size(); ++j) {
      const Pair k{categories_.names[i], categories_.names[j]};
      if (!loc_pair_.contains(k) || !box_pair_.contains(k)) {
        throw InvalidInput("missing pairwise joint for '" + k.first + "','" + k.second + "'");
      }
    }
  }
}

SituationModel SituationModel::learn(std::span<const SituationAnnotation> training,
                                     const CategorySet& categories) {
  constexpr std::size_t kMinAnnotations = 8;
  if (training.size() < kMinAnnotations) {
    throw InsufficientData("insufficient data: learning needs at least " +
                           std::to_string(kMinAnnotations) + " annotations, got " +
                           std::to_string(training.size()));
  }
  if (categories.size() != 3) throw InvalidInput("a situation model has exactly three categories");
  const auto& cats = categories.names;
  const std::size_t n = training.size();
  // Per annotation: (x, y) and (alpha, gamma) for each category, in category order.
  std::vector<Eigen::VectorXd> locations(n, Eigen::VectorXd(6));
  std::vector<Eigen::VectorXd> shapes(n, Eigen::VectorXd(6));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ann = training[i];
    validate(ann, categories);
    const ImageFrame frame = ann.frame();
    for (std::size_t c = 0; c < cats.size(); ++c) {
      const BoundingBox box = to_normalized(ann.objects.at(cats[c]), frame);
      const auto [alpha, gamma] = shape_descriptors(box, frame);
      const auto k = static_cast<Eigen::Index>(2 * c);
      locations[i][k] = box.cx;
      locations[i][k + 1] = box.cy;
      shapes[i][k] = alpha;
      shapes[i][k + 1] = gamma;
    }
  }

  std::map<std::string, BoxPrior> priors;
  for (std::size_t c = 0; c < cats.size(); ++c) {
    std::vector<double> alphas, gammas;
    for (const auto& s : shapes) {
      alphas.push_back(s[static_cast<Eigen::Index>(2 * c)]);
      gammas.push_back(s[static_cast<Eigen::Index>(2 * c + 1)]);
    }
    priors.emplace(cats[c], BoxPrior{fit_univariate(alphas, alpha_label(cats[c])),
                                     fit_univariate(gammas, gamma_label(cats[c]))});
  }

  auto project = [](const std::vector<Eigen::VectorXd>& rows, std::size_t a, std::size_t b) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
      Eigen::VectorXd v(4);
      v << r[static_cast<Eigen::Index>(2 * a)], r[static_cast<Eigen::Index>(2 * a + 1)],
          r[static_cast<Eigen::Index>(2 * b)], r[static_cast<Eigen::Index>(2 * b + 1)];
      out.push_back(std::move(v));
    }
    return out;
  };

  std::map<Pair, MultivariateGaussian> loc_pair, box_pair;
  for (std::size_t a = 0; a < cats.size(); ++a) {
    for (std::size_t b = a + 1; b < cats.size(); ++b) {
      const std::vector<std::string> both{cats[a], cats[b]};
      loc_pair.emplace(Pair{cats[a], cats[b]},
                       MultivariateGaussian::fit(project(locations, a, b), location_dims(both)));
      box_pair.emplace(Pair{cats[a], cats[b]},
                       MultivariateGaussian::fit(project(shapes, a, b), shape_dims(both)));
    }
  }
  return SituationModel(categories, std::move(priors), std::move(loc_pair),
                        MultivariateGaussian::fit(locations, location_dims(cats)),
                        std::move(box_pair), MultivariateGaussian::fit(shapes, shape_dims(cats)));
}

const BoxPrior& SituationModel::box_prior(const std::string& category) const {
  auto it = box_priors_.find(category);
  if (it == box_priors_.end()) throw InvalidInput("unknown category '" + category + "'");
  return it->second;
}

SituationModel::Pair SituationModel::key(const std::string& a, const std::string& b) const {
  const auto& names = categories_.names;
  const auto ia = std::find(names.begin(), names.end(), a);
  const auto ib = std::find(names.begin(), names.end(), b);
  if (ia == names.end() || ib == names.end() || ia == ib) {
    throw InvalidInput("no pairwise joint for '" + a + "','" + b + "'");
  }
  return ia < ib ? Pair{a, b} : Pair{b, a};
}

const MultivariateGaussian& SituationModel::loc_pair(const std::string& a,
                                                     const std::string& b) const {
  return loc_pair_.at(key(a, b));
}

const MultivariateGaussian& SituationModel::box_pair(const std::string& a,
                                                     const std::string& b) const {
  return box_pair_.at(key(a, b));
}

MultivariateGaussian SituationModel::prior_shape(const std::string& category) const {
  const BoxPrior& p = box_prior(category);
  Eigen::Vector2d mean(p.alpha.mean, p.gamma.mean);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  cov(0, 0) = p.alpha.std * p.alpha.std;
  cov(1, 1) = p.gamma.std * p.gamma.std;
  return MultivariateGaussian({alpha_label(category), gamma_label(category)}, mean, cov);
}

std::vector<CategorySearchDist> SituationModel::initial_distributions(const ImageFrame& frame,
                                                                      double cell_size) const {
  std::vector<CategorySearchDist> out;
  const LocationMap uniform = LocationMap::uniform(frame, cell_size);
  for (const auto& c : categories_.names) out.push_back({c, uniform, prior_shape(c)});
  return out;
}

SituationModel::Conditionals SituationModel::conditionals(const std::string& category,
                                                          const Workspace& workspace,
                                                          const ImageFrame& frame) const {
  const auto others = workspace.detections_except(category);
  if (others.empty()) return {std::nullopt, prior_shape(category)};
  if (others.size() > 2) throw InvalidInput("workspace holds more categories than the model");

  std::map<std::string, double> loc_obs, shape_obs;
  for (const ObjectProposal* d : others) {
    const auto [alpha, gamma] = shape_descriptors(d->box, frame);
    loc_obs[x_label(d->category)] = d->box.cx;
    loc_obs[y_label(d->category)] = d->box.cy;
    shape_obs[alpha_label(d->category)] = alpha;
    shape_obs[gamma_label(d->category)] = gamma;
  }
  if (others.size() == 1) {
    const std::string& b = others.front()->category;
    return {loc_pair(category, b).condition(loc_obs), box_pair(category, b).condition(shape_obs)};
  }
  return {loc_triple_.condition(loc_obs), box_triple_.condition(shape_obs)};
}

CategorySearchDist SituationModel::condition_category(const std::string& category,
                                                      const Workspace& workspace,
                                                      const ImageFrame& frame,
                                                      double cell_size) const {
  auto cond = conditionals(category, workspace, frame);
  if (!cond.location) {
    return {category, LocationMap::uniform(frame, cell_size), std::move(cond.shape)};
  }
  return {category, rasterize_2d(*cond.location, frame, cell_size), std::move(cond.shape)};
}

std::vector<CategorySearchDist> SituationModel::condition_on_workspace(const Workspace& workspace,
                                                                       const ImageFrame& frame,
                                                                       double cell_size) const {
  std::vector<CategorySearchDist> out;
  for (const auto& c : categories_.names) {
    out.push_back(condition_category(c, workspace, frame, cell_size));
  }
  return out;
}

std::pair<double, double> sample_shape(const ShapeDistribution& shape, Rng& rng) {
  if (const auto* g = std::get_if<MultivariateGaussian>(&shape)) {
    const Eigen::VectorXd v = g->sample(rng);
    return {v[0], v[1]};
  }
  const auto& u = std::get<UniformShapePrior>(shape);
  std::uniform_real_distribution<double> alpha(u.alpha_min, u.alpha_max);
  std::uniform_real_distribution<double> gamma(u.gamma_min, u.gamma_max);
  const double a = alpha(rng);
  return {a, gamma(rng)};
}

ObjectProposal sample_proposal(const CategorySearchDist& dist, const ImageFrame& frame, Rng& rng) {
  const auto [cx, cy] = dist.location.sample_point(rng);
  auto [alpha, gamma] = sample_shape(dist.shape, rng);
  // Keeps exp() finite for pathological tails.
  alpha = std::clamp(alpha, -40.0, 40.0);
  gamma = std::clamp(gamma, -40.0, 40.0);
  const BoundingBox box = box_from_descriptors(cx, cy, alpha, gamma, frame);
  return {dist.category, crop_to_frame(box, frame), 0.0};
}

}  // namespace situate
