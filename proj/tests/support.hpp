#pragma once

#include <cstdint>
#include <vector>

#include "graspme/assets.hpp"
#include "graspme/mask.hpp"
#include "graspme/rng.hpp"
#include "graspme/scene.hpp"

namespace testing_support {

inline graspme::Vec3 random_unit(graspme::Rng& rng) {
  for (;;) {
    graspme::Vec3 v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (v.norm() > 0.1 && v.norm() <= 1.0) return v.normalized();
  }
}

inline graspme::Pose random_pose(graspme::Rng& rng) {
  graspme::Pose p;
  p.rotation = graspme::axis_angle(random_unit(rng), rng.uniform(-3.0, 3.0));
  p.translation = graspme::Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
  return p;
}

inline graspme::BinaryMask random_mask(graspme::Rng& rng, int max_side = 24) {
  const int w = rng.uniform_int(1, max_side);
  const int h = rng.uniform_int(1, max_side);
  graspme::BinaryMask m(w, h);
  const double density = rng.uniform();
  for (auto& p : m.pixels) p = rng.bernoulli(density) ? 1 : 0;
  return m;
}

/// Small, fast frames for oracle comparisons.
inline graspme::GenerationConfig small_config(int side = 64) {
  graspme::GenerationConfig c;
  c.image_width = side;
  c.image_height = side;
  c.segments = 12;
  return c;
}

}  // namespace testing_support
