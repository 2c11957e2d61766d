#include "graspme/overlay.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "graspme/error.hpp"
#include "graspme/metrics.hpp"

namespace graspme {
namespace {

using Color = std::array<std::uint8_t, 3>;

constexpr Color kBlack = {0, 0, 0};
constexpr Color kPrediction = {255, 0, 255};
constexpr Color kVisible = {40, 220, 40};
constexpr Color kOccluded = {250, 200, 30};

const std::array<Color, 6> kPalette = {{
    {230, 25, 75}, {60, 180, 75}, {0, 130, 200}, {245, 130, 48}, {145, 30, 180}, {70, 240, 240},
}};

class Painter {
 public:
  explicit Painter(Image8& image) : image_(image) {}

  void put(int x, int y, const Color& c) {
    if (x < 0 || y < 0 || x >= image_.width || y >= image_.height) return;
    auto* p = &image_.data[(static_cast<std::size_t>(y) * image_.width + x) * 3];
    std::copy(c.begin(), c.end(), p);
  }

  void blend(std::size_t index, const Color& c, double alpha) {
    auto* p = &image_.data[index * 3];
    for (int k = 0; k < 3; ++k) {
      p[k] = static_cast<std::uint8_t>(std::lround((1.0 - alpha) * p[k] + alpha * c[k]));
    }
  }

  void rectangle(const BBox& box, const Color& c) {
    const int x0 = pixel_of(box.x);
    const int y0 = pixel_of(box.y);
    const int x1 = pixel_of(box.x + box.w);
    const int y1 = pixel_of(box.y + box.h);
    for (int x = x0; x <= x1; ++x) {
      put(x, y0, c);
      put(x, y1, c);
    }
    for (int y = y0; y <= y1; ++y) {
      put(x0, y, c);
      put(x1, y, c);
    }
  }

  void dot(double u, double v, const Color& c) {
    const int cx = pixel_of(u);
    const int cy = pixel_of(v);
    for (int dy = -2; dy <= 2; ++dy) {
      for (int dx = -2; dx <= 2; ++dx) {
        if (dx * dx + dy * dy <= 4) put(cx + dx, cy + dy, c);
      }
    }
  }

  void pixels(const PixelSet& set, const Color& c) {
    for (auto index : set) {
      put(static_cast<int>(index % image_.width), static_cast<int>(index / image_.width), c);
    }
  }

 private:
  Image8& image_;
};

PixelSet manifold_of(const std::vector<Pixel2>& points, ManifoldKind kind, Canvas canvas) {
  if (points.size() < 2) return {};
  if (kind == ManifoldKind::kSurface && points.size() < 3) kind = ManifoldKind::kLine;
  return rasterize_manifold(points, kind, 1.0, canvas);
}

}  // namespace

Image8 render_overlay(const Image8& rgb, const CocoDataset& dataset, std::int64_t image_id,
                      const PredictionSet* predictions) {
  if (rgb.channels != 3) throw InvalidArgument("render_overlay: expected an RGB image");
  const CocoImage* info = dataset.find_image(image_id);
  if (!info) throw InvalidArgument("render_overlay: unknown image id " + std::to_string(image_id));
  if (info->width != rgb.width || info->height != rgb.height) {
    throw InvalidArgument("render_overlay: image size does not match the dataset");
  }

  Image8 out = rgb;
  Painter paint(out);
  const Canvas canvas{rgb.width, rgb.height};

  std::vector<const CocoAnnotation*> annotations;
  for (const auto& a : dataset.annotations) {
    if (a.image_id == image_id) annotations.push_back(&a);
  }

  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const BinaryMask mask = decode_rle(annotations[i]->segmentation);
    for (std::size_t p = 0; p < mask.pixels.size(); ++p) {
      if (mask.pixels[p]) paint.blend(p, kPalette[i % kPalette.size()], 0.4);
    }
  }
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    paint.rectangle(annotations[i]->bbox, kPalette[i % kPalette.size()]);
  }
  if (predictions) {
    for (const auto& p : *predictions) {
      if (p.image_id == image_id) paint.rectangle(p.bbox, kPrediction);
    }
  }

  for (const auto* a : annotations) {
    for (const auto& k : a->keypoints) {
      if (k.flag > 0) paint.dot(k.u, k.v, k.flag == 2 ? kVisible : kOccluded);
    }
  }
  if (predictions) {
    for (const auto& p : *predictions) {
      if (p.image_id != image_id) continue;
      for (const auto& k : p.keypoints) {
        if (k.confidence > 0.0) paint.dot(k.u, k.v, kPrediction);
      }
    }
  }

  if (predictions) {
    for (const auto& p : *predictions) {
      if (p.image_id != image_id) continue;
      const CocoCategory* cat = dataset.find_category(p.category_id);
      if (!cat) continue;
      std::vector<Pixel2> points;
      for (const auto& k : p.keypoints) {
        if (k.confidence > 0.0) points.push_back({k.u, k.v});
      }
      paint.pixels(manifold_of(points, cat->manifold_kind, canvas), kPrediction);
    }
  }
  for (const auto* a : annotations) {
    const bool any_visible = std::any_of(a->keypoints.begin(), a->keypoints.end(),
                                         [](const Keypoint2D& k) { return k.flag == 2; });
    if (!any_visible) continue;
    const CocoCategory* cat = dataset.find_category(a->category_id);
    std::vector<Pixel2> points;
    for (const auto& k : a->keypoints) {
      if (k.flag > 0) points.push_back({k.u, k.v});
    }
    paint.pixels(manifold_of(points, cat->manifold_kind, canvas), kBlack);
  }
  return out;
}

}  // namespace graspme
