#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "json.hpp"
#include "situate/annotation.hpp"
#include "situate/gaussian.hpp"
#include "situate/image.hpp"

namespace situate {

enum class ClampPolicy {
  /// Translate an out-of-frame box inward, keeping its size.
  kTranslate,
  /// Redraw any sample with a box outside the frame.
  kReject,
};

/// Parameters of the synthetic situation generator.
struct GeneratorConfig {
  GeneratorConfig(MultivariateGaussian location_model, MultivariateGaussian shape_model)
      : location(std::move(location_model)), shape(std::move(shape_model)) {}

  double width = 640;
  double height = 480;
  CategorySet categories = CategorySet::dog_walking();
  /// Joint over x_<cat>, y_<cat> (normalized frame, center origin).
  MultivariateGaussian location;
  /// Joint over alpha_<cat>, gamma_<cat> (log area ratio, log aspect ratio).
  MultivariateGaussian shape;
  ClampPolicy clamp = ClampPolicy::kTranslate;
  int max_rejections = 1000;
  std::uint64_t seed = 0;

  /// Dog-walker largest and above-center, dog offset beside and below it,
  /// leash near their midpoint with high size/shape variance.
  static GeneratorConfig dog_walking();
};

nlohmann::ordered_json generator_config_to_json(const GeneratorConfig& config);
GeneratorConfig generator_config_from_json(const nlohmann::ordered_json& j);

/// Draws n annotations; image ids are "synth_00000", "synth_00001", ...
std::vector<SituationAnnotation> generate_synthetic(const GeneratorConfig& config, int n, Rng& rng);

/// Simple rendering of an annotation for salience: a textured background,
/// each object as a contrasting ellipse inside its box, and a few distractors.
Image render_scene(const SituationAnnotation& annotation, std::uint64_t seed);

/// Reads every *.json file in the directory (sorted by name) and validates it.
std::vector<SituationAnnotation> load_dataset(const std::filesystem::path& directory,
                                              const CategorySet& categories = CategorySet::dog_walking());
/// Writes <image_id>.json per annotation, creating the directory if needed.
void save_dataset(const std::vector<SituationAnnotation>& annotations,
                  const std::filesystem::path& directory);
SituationAnnotation load_annotation(const std::filesystem::path& path,
                                    const CategorySet& categories = CategorySet::dog_walking());

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// k contiguous blocks of a seeded shuffle of [0, n); block sizes differ by
/// at most one. With k == 1 the single fold trains and tests on everything.
std::vector<Fold> split_folds(std::size_t n, int k, std::uint64_t seed);

}  // namespace situate
