#pragma once

namespace situate {

/// Target pixel count of a normalized image.
inline constexpr double kNormalizedPixels = 250000.0;

/// An image rescaled to ~250k pixels with its origin at the image center.
/// x grows to the right and y grows downward, as in the original pixels.
struct ImageFrame {
  double orig_width = 0;
  double orig_height = 0;
  double scale = 1;
  double norm_width = 0;
  double norm_height = 0;

  double area() const { return norm_width * norm_height; }
  double min_x() const { return -norm_width / 2; }
  double max_x() const { return norm_width / 2; }
  double min_y() const { return -norm_height / 2; }
  double max_y() const { return norm_height / 2; }

  bool operator==(const ImageFrame&) const = default;
};

/// Box in original pixel coordinates: top-left corner plus size.
struct CornerBox {
  double x = 0;
  double y = 0;
  double w = 0;
  double h = 0;

  bool operator==(const CornerBox&) const = default;
};

/// Box in a normalized frame, stored as center plus size.
struct BoundingBox {
  double cx = 0;
  double cy = 0;
  double w = 0;
  double h = 0;

  double left() const { return cx - w / 2; }
  double right() const { return cx + w / 2; }
  double top() const { return cy - h / 2; }
  double bottom() const { return cy + h / 2; }
  double area() const { return w * h; }
  double aspect_ratio() const { return w / h; }
  double area_ratio(const ImageFrame& frame) const { return area() / frame.area(); }

  static BoundingBox from_edges(double left, double top, double right, double bottom) {
    return {(left + right) / 2, (top + bottom) / 2, right - left, bottom - top};
  }

  bool operator==(const BoundingBox&) const = default;
};

ImageFrame normalize_frame(double orig_width, double orig_height);

BoundingBox to_normalized(const CornerBox& box, const ImageFrame& frame);
CornerBox to_original(const BoundingBox& box, const ImageFrame& frame);

/// Intersection over union. Zero when the boxes do not overlap.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Intersection of the box with the frame rectangle. Throws NoOverlap when
/// nothing of positive area remains.
BoundingBox crop_to_frame(const BoundingBox& box, const ImageFrame& frame);

bool contains(const ImageFrame& frame, const BoundingBox& box, double tol = 1e-9);

}  // namespace situate
