#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "situate/geometry.hpp"

namespace situate {

/// Ordered list of the object categories that make up a situation.
struct CategorySet {
  std::vector<std::string> names;

  static CategorySet dog_walking() { return {{"dog_walker", "dog", "leash"}}; }
  std::size_t size() const { return names.size(); }
  bool contains(const std::string& name) const;
  bool operator==(const CategorySet&) const = default;
};

/// Ground truth for one image: one box per category in original pixel
/// corner coordinates (top-left origin).
struct SituationAnnotation {
  std::string image_id;
  double width = 0;
  double height = 0;
  std::map<std::string, CornerBox> objects;
  std::optional<std::string> image_path;

  ImageFrame frame() const { return normalize_frame(width, height); }
  /// Ground-truth boxes in the normalized frame.
  std::map<std::string, BoundingBox> normalized_boxes() const;

  bool operator==(const SituationAnnotation&) const = default;
};

/// Throws InvalidDataset naming the offending image and category.
void validate(const SituationAnnotation& annotation, const CategorySet& categories);

}  // namespace situate
