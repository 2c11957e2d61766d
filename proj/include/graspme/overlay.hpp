#pragma once

#include <cstdint>

#include "graspme/dataset.hpp"
#include "graspme/png_io.hpp"

namespace graspme {

/// Annotation overlay on an RGB image: tinted masks, box outlines, keypoint
/// dots and the grasp manifold in black (stroke 1). Manifolds are drawn only
/// for objects with at least one visible keypoint. Predictions for the same
/// image, if given, are drawn in magenta.
Image8 render_overlay(const Image8& rgb, const CocoDataset& dataset, std::int64_t image_id,
                      const PredictionSet* predictions = nullptr);

}  // namespace graspme
