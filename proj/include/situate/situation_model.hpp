#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "situate/annotation.hpp"
#include "situate/gaussian.hpp"
#include "situate/workspace.hpp"

namespace situate {

/// Dimension labels used by every joint in the model.
std::string x_label(const std::string& category);
std::string y_label(const std::string& category);
std::string alpha_label(const std::string& category);
std::string gamma_label(const std::string& category);

/// Log-normal priors over area ratio (alpha) and aspect ratio (gamma).
struct BoxPrior {
  UnivariateNormal alpha;
  UnivariateNormal gamma;
  bool operator==(const BoxPrior&) const = default;
};

/// Category-independent size/shape prior: log area ratio uniform in
/// [ln .01, ln .5], log aspect ratio uniform in [ln .25, ln 4].
struct UniformShapePrior {
  double alpha_min = std::log(0.01);
  double alpha_max = std::log(0.5);
  double gamma_min = std::log(0.25);
  double gamma_max = std::log(4.0);
};

/// Either a 2-d Gaussian over (alpha_c, gamma_c) or the uniform prior.
using ShapeDistribution = std::variant<MultivariateGaussian, UniformShapePrior>;

struct CategorySearchDist {
  std::string category;
  LocationMap location;
  ShapeDistribution shape;
};

/// Learned situation knowledge: per-category box priors plus pairwise and
/// three-way joints over box centers and over (alpha, gamma).
class SituationModel {
 public:
  using Pair = std::pair<std::string, std::string>;

  SituationModel(CategorySet categories, std::map<std::string, BoxPrior> box_priors,
                 std::map<Pair, MultivariateGaussian> loc_pair, MultivariateGaussian loc_triple,
                 std::map<Pair, MultivariateGaussian> box_pair, MultivariateGaussian box_triple);

  /// Needs at least 8 annotations, each with exactly one box per category.
  static SituationModel learn(std::span<const SituationAnnotation> training,
                              const CategorySet& categories = CategorySet::dog_walking());

  const CategorySet& categories() const { return categories_; }
  const std::map<std::string, BoxPrior>& box_priors() const { return box_priors_; }
  const BoxPrior& box_prior(const std::string& category) const;
  const std::map<Pair, MultivariateGaussian>& loc_pairs() const { return loc_pair_; }
  const std::map<Pair, MultivariateGaussian>& box_pairs() const { return box_pair_; }
  /// Pairwise joint for two categories in either order.
  const MultivariateGaussian& loc_pair(const std::string& a, const std::string& b) const;
  const MultivariateGaussian& box_pair(const std::string& a, const std::string& b) const;
  const MultivariateGaussian& loc_triple() const { return loc_triple_; }
  const MultivariateGaussian& box_triple() const { return box_triple_; }

  /// Independent product of the category's alpha and gamma priors.
  MultivariateGaussian prior_shape(const std::string& category) const;

  /// Uniform location and box-prior shape for every category, in category order.
  std::vector<CategorySearchDist> initial_distributions(const ImageFrame& frame,
                                                        double cell_size = 1.0) const;

  /// Distribution for one category given the other categories' detections.
  /// Uses the pairwise joint with one other detection and the three-way
  /// joint with two; detections of `category` itself are ignored.
  CategorySearchDist condition_category(const std::string& category, const Workspace& workspace,
                                        const ImageFrame& frame, double cell_size = 1.0) const;

  std::vector<CategorySearchDist> condition_on_workspace(const Workspace& workspace,
                                                         const ImageFrame& frame,
                                                         double cell_size = 1.0) const;

  /// Location and shape conditionals as Gaussians; nullopt location when
  /// there is nothing to condition on.
  struct Conditionals {
    std::optional<MultivariateGaussian> location;
    MultivariateGaussian shape;
  };
  Conditionals conditionals(const std::string& category, const Workspace& workspace,
                            const ImageFrame& frame) const;

  bool operator==(const SituationModel&) const = default;

 private:
  Pair key(const std::string& a, const std::string& b) const;

  CategorySet categories_;
  std::map<std::string, BoxPrior> box_priors_;
  std::map<Pair, MultivariateGaussian> loc_pair_;
  MultivariateGaussian loc_triple_;
  std::map<Pair, MultivariateGaussian> box_pair_;
  MultivariateGaussian box_triple_;
};

/// Log area ratio and log aspect ratio of a box in a frame.
std::pair<double, double> shape_descriptors(const BoundingBox& box, const ImageFrame& frame);

/// Box with the given center whose area is e^alpha * frame area and whose
/// width/height is e^gamma.
BoundingBox box_from_descriptors(double cx, double cy, double alpha, double gamma,
                                 const ImageFrame& frame);

std::pair<double, double> sample_shape(const ShapeDistribution& shape, Rng& rng);

/// Draws a center from the location map, (alpha, gamma) from the shape
/// distribution, builds the box and crops it to the frame.
ObjectProposal sample_proposal(const CategorySearchDist& dist, const ImageFrame& frame, Rng& rng);

}  // namespace situate
