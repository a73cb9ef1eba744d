#pragma once

#include <string>
#include <vector>

#include "situate/annotation.hpp"
#include "situate/datagen.hpp"

namespace fixtures {

inline situate::SituationAnnotation annotation(const std::string& id, double w, double h,
                                               situate::CornerBox walker, situate::CornerBox dog,
                                               situate::CornerBox leash) {
  situate::SituationAnnotation a;
  a.image_id = id;
  a.width = w;
  a.height = h;
  a.objects = {{"dog_walker", walker}, {"dog", dog}, {"leash", leash}};
  return a;
}

/// A typical 640x480 scene.
inline situate::SituationAnnotation scene(const std::string& id = "scene") {
  return annotation(id, 640, 480, {200, 60, 90, 260}, {330, 250, 90, 70}, {280, 180, 40, 60});
}

inline std::vector<situate::SituationAnnotation> synthetic(int n, std::uint64_t seed) {
  situate::Rng rng(seed);
  return situate::generate_synthetic(situate::GeneratorConfig::dog_walking(), n, rng);
}

}  // namespace fixtures
