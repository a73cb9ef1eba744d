#include "situate/annotation.hpp"

#include <algorithm>
#include <cmath>

#include "situate/error.hpp"

namespace situate {

bool CategorySet::contains(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::map<std::string, BoundingBox> SituationAnnotation::normalized_boxes() const {
  const ImageFrame f = frame();
  std::map<std::string, BoundingBox> out;
  for (const auto& [category, box] : objects) out.emplace(category, to_normalized(box, f));
  return out;
}

void validate(const SituationAnnotation& annotation, const CategorySet& categories) {
  const std::string where = "image '" + annotation.image_id + "'";
  if (annotation.image_id.empty()) throw InvalidDataset("annotation has an empty image_id");
  if (!(annotation.width >= 1) || !(annotation.height >= 1) || !std::isfinite(annotation.width) ||
      !std::isfinite(annotation.height)) {
    throw InvalidDataset(where + ": image dimensions must be >= 1");
  }
  for (const auto& name : categories.names) {
    if (!annotation.objects.contains(name)) {
      throw InvalidDataset(where + ": missing category '" + name + "'");
    }
  }
  constexpr double tol = 1e-6;
  for (const auto& [name, box] : annotation.objects) {
    if (!categories.contains(name)) {
      throw InvalidDataset(where + ": unexpected category '" + name + "'");
    }
    if (!std::isfinite(box.x) || !std::isfinite(box.y) || !(box.w > 0) || !(box.h > 0) ||
        !std::isfinite(box.w) || !std::isfinite(box.h)) {
      throw InvalidDataset(where + ": box for '" + name + "' must have positive finite size");
    }
    if (box.x < -tol || box.y < -tol || box.x + box.w > annotation.width + tol ||
        box.y + box.h > annotation.height + tol) {
      throw InvalidDataset(where + ": box for '" + name + "' lies outside the image bounds");
    }
  }
}

}  // namespace situate
