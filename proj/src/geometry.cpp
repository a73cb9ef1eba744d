#include "situate/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "situate/error.hpp"

namespace situate {

ImageFrame normalize_frame(double orig_width, double orig_height) {
  if (!(orig_width >= 1) || !(orig_height >= 1) || !std::isfinite(orig_width) ||
      !std::isfinite(orig_height)) {
    throw InvalidInput("image dimensions must be >= 1, got " + std::to_string(orig_width) + "x" +
                       std::to_string(orig_height));
  }
  ImageFrame frame;
  frame.orig_width = orig_width;
  frame.orig_height = orig_height;
  frame.scale = std::sqrt(kNormalizedPixels / (orig_width * orig_height));
  frame.norm_width = orig_width * frame.scale;
  frame.norm_height = orig_height * frame.scale;
  return frame;
}

BoundingBox to_normalized(const CornerBox& box, const ImageFrame& frame) {
  if (!(box.w > 0) || !(box.h > 0)) {
    throw InvalidInput("degenerate box: width and height must be positive");
  }
  const double s = frame.scale;
  return {(box.x + box.w / 2) * s - frame.norm_width / 2,
          (box.y + box.h / 2) * s - frame.norm_height / 2, box.w * s, box.h * s};
}

CornerBox to_original(const BoundingBox& box, const ImageFrame& frame) {
  const double s = frame.scale;
  return {(box.left() + frame.norm_width / 2) / s, (box.top() + frame.norm_height / 2) / s,
          box.w / s, box.h / s};
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

BoundingBox crop_to_frame(const BoundingBox& box, const ImageFrame& frame) {
  if (box.left() >= frame.min_x() && box.right() <= frame.max_x() && box.top() >= frame.min_y() &&
      box.bottom() <= frame.max_y()) {
    return box;
  }
  const double l = std::max(box.left(), frame.min_x());
  const double r = std::min(box.right(), frame.max_x());
  const double t = std::max(box.top(), frame.min_y());
  const double b = std::min(box.bottom(), frame.max_y());
  if (r <= l || b <= t) throw NoOverlap("box lies entirely outside the image frame");
  return BoundingBox::from_edges(l, t, r, b);
}

bool contains(const ImageFrame& frame, const BoundingBox& box, double tol) {
  return box.left() >= frame.min_x() - tol && box.right() <= frame.max_x() + tol &&
         box.top() >= frame.min_y() - tol && box.bottom() <= frame.max_y() + tol;
}

}  // namespace situate
