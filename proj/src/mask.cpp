#include "graspme/mask.hpp"

#include <algorithm>
#include <numeric>

#include "graspme/error.hpp"

namespace graspme {

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(pixels.begin(), pixels.end(), [](std::uint8_t p) { return p != 0; }));
}

std::optional<BBox> bbox_from_mask(const BinaryMask& mask) {
  int x_min = mask.width, y_min = mask.height, x_max = -1, y_max = -1;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max < 0) return std::nullopt;
  return BBox{double(x_min), double(y_min), double(x_max - x_min), double(y_max - y_min)};
}

std::uint64_t RleMask::area() const {
  std::uint64_t total = 0;
  for (std::size_t i = 1; i < counts.size(); i += 2) total += counts[i];
  return total;
}

RleMask encode_rle(const BinaryMask& mask) {
  if (mask.pixels.size() != static_cast<std::size_t>(mask.width) * mask.height) {
    throw InvalidArgument("encode_rle: pixel buffer does not match mask size");
  }
  RleMask rle{mask.height, mask.width, {}};
  bool current = false;
  std::uint32_t run = 0;
  for (int x = 0; x < mask.width; ++x) {
    for (int y = 0; y < mask.height; ++y) {
      const bool value = mask.at(x, y);
      if (value != current) {
        rle.counts.push_back(run);
        run = 0;
        current = value;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask decode_rle(const RleMask& rle) {
  if (rle.width < 0 || rle.height < 0) throw InvalidArgument("decode_rle: negative size");
  const std::uint64_t total =
      std::accumulate(rle.counts.begin(), rle.counts.end(), std::uint64_t{0});
  if (total != static_cast<std::uint64_t>(rle.width) * rle.height) {
    throw InvalidArgument("decode_rle: run lengths sum to " + std::to_string(total) +
                          ", expected " + std::to_string(std::uint64_t(rle.width) * rle.height));
  }
  BinaryMask mask(rle.width, rle.height);
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < rle.counts.size(); ++i) {
    if (i % 2 == 1) {
      for (std::uint64_t k = pos; k < pos + rle.counts[i]; ++k) {
        const auto x = static_cast<int>(k / rle.height);
        const auto y = static_cast<int>(k % rle.height);
        mask.set(x, y);
      }
    }
    pos += rle.counts[i];
  }
  return mask;
}

std::uint64_t rle_intersection(const RleMask& a, const RleMask& b) {
  if (a.width != b.width || a.height != b.height) {
    throw InvalidArgument("rle_intersection: mask sizes differ");
  }
  // Sweep both run sequences together.
  std::size_t ia = 0, ib = 0;
  std::uint64_t left_a = a.counts.empty() ? 0 : a.counts[0];
  std::uint64_t left_b = b.counts.empty() ? 0 : b.counts[0];
  std::uint64_t shared = 0;
  while (ia < a.counts.size() && ib < b.counts.size()) {
    if (left_a == 0) {
      if (++ia < a.counts.size()) left_a = a.counts[ia];
      continue;
    }
    if (left_b == 0) {
      if (++ib < b.counts.size()) left_b = b.counts[ib];
      continue;
    }
    const std::uint64_t step = std::min(left_a, left_b);
    if (ia % 2 == 1 && ib % 2 == 1) shared += step;
    left_a -= step;
    left_b -= step;
  }
  return shared;
}

double rle_iou(const RleMask& a, const RleMask& b) {
  const std::uint64_t inter = rle_intersection(a, b);
  const std::uint64_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace graspme
