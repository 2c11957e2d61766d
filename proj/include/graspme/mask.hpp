#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace graspme {

/// Axis-aligned box in pixels: lower corner plus extent.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Row-major binary image; nonzero bytes are foreground.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  BinaryMask() = default;
  BinaryMask(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}

  bool at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool value = true) {
    pixels[static_cast<std::size_t>(y) * width + x] = value ? 1 : 0;
  }
  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// Box from the extreme mask pixels with w = x_max - x_min and
/// h = y_max - y_min, so a one-pixel-wide mask has zero width. Absent for an
/// empty mask.
std::optional<BBox> bbox_from_mask(const BinaryMask& mask);

/// COCO uncompressed RLE: alternating background/foreground run lengths in
/// column-major order, starting with background.
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  std::uint64_t area() const;

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

RleMask encode_rle(const BinaryMask& mask);
/// Throws InvalidArgument if the run lengths do not sum to height * width.
BinaryMask decode_rle(const RleMask& rle);

/// Foreground pixels shared by two RLEs of equal size.
std::uint64_t rle_intersection(const RleMask& a, const RleMask& b);
/// Intersection over union of two RLEs; 0 when both are empty.
double rle_iou(const RleMask& a, const RleMask& b);

}  // namespace graspme
