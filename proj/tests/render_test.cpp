#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "graspme/assets.hpp"
#include "graspme/error.hpp"
#include "graspme/render.hpp"
#include "oracle/raycast.hpp"
#include "support.hpp"

using namespace graspme;

namespace {

Camera camera_at(const Vec3& eye, const Vec3& target, int side = 64, double fov = 1.0,
                 const Vec3& up = Vec3::UnitZ()) {
  Camera cam;
  cam.intrinsics = CameraIntrinsics::from_fov(side, side, fov);
  cam.extrinsic = look_at(eye, target, up);
  return cam;
}

SceneObject place(const PrimitiveShape& shape, const Vec3& position, int id,
                  const Mat3& rotation = Mat3::Identity()) {
  Pose pose;
  pose.rotation = rotation;
  pose.translation = position;
  return make_scene_object(simple_templates()[static_cast<int>(kind_of(shape))],
                           static_cast<std::size_t>(kind_of(shape)), shape, pose, id, 24);
}

std::size_t count_id(const FrameBuffers& fb, int id) {
  return static_cast<std::size_t>(std::count(fb.instance_id.begin(), fb.instance_id.end(), id));
}

}  // namespace

TEST(Rasterize, EmptyScene) {
  Scene scene;
  scene.camera = camera_at(Vec3(0.3, 0.2, 1.0), Vec3::Zero());
  const auto fb = rasterize(scene);
  EXPECT_EQ(fb.width, 64);
  EXPECT_EQ(count_id(fb, 0), 64u * 64u);
  EXPECT_TRUE(annotate_scene(scene, fb).empty());
}

TEST(Rasterize, CenteredCuboidTopDown) {
  Scene scene;
  scene.camera = camera_at(Vec3(0, 0, 1), Vec3::Zero(), 128, 1.0, Vec3::UnitY());
  scene.objects.push_back(place(Cuboid{0.2, 0.1, 0.05}, Vec3(0, 0, 0.025), 1));
  const auto fb = rasterize(scene);
  double sx = 0, sy = 0;
  std::size_t n = 0;
  for (int y = 0; y < fb.height; ++y) {
    for (int x = 0; x < fb.width; ++x) {
      if (fb.instance_id[fb.index(x, y)] == 1) {
        sx += x;
        sy += y;
        ++n;
      }
    }
  }
  ASSERT_GT(n, 0u);
  EXPECT_LT(std::hypot(sx / n - 64.0, sy / n - 64.0), 2.0);

  const auto frame = oracle::raycast_frame(scene);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < frame.hits.size(); ++i) agree += frame.hits[i].id == fb.instance_id[i];
  EXPECT_GE(static_cast<double>(agree) / frame.hits.size(), 0.995);
}

TEST(Rasterize, FullyHiddenObjectIsAbsent) {
  Scene scene;
  scene.camera = camera_at(Vec3(2, 0, 0.1), Vec3(0, 0, 0.1));
  scene.objects.push_back(place(Cuboid{0.3, 0.3, 0.3}, Vec3(0.5, 0, 0.15), 1));
  scene.objects.push_back(place(Cuboid{0.05, 0.05, 0.05}, Vec3(-0.5, 0, 0.025), 2));
  const auto fb = rasterize(scene);
  EXPECT_GT(count_id(fb, 1), 0u);
  EXPECT_EQ(count_id(fb, 2), 0u);
  const auto frame = oracle::raycast_frame(scene);
  for (const auto& h : frame.hits) EXPECT_NE(h.id, 2);
  const auto ann = annotate_scene(scene, fb);
  ASSERT_EQ(ann.size(), 1u);
  EXPECT_EQ(ann[0].instance_id, 1);

  // Without the occluder the small cube is seen.
  scene.objects.erase(scene.objects.begin());
  EXPECT_GT(count_id(rasterize(scene), 2), 0u);
}

TEST(Rasterize, FlatColorWithFullAmbient) {
  Scene scene;
  scene.camera = camera_at(Vec3(0.4, 0.3, 0.6), Vec3::Zero());
  scene.light.ambient = 1.0;
  scene.light.intensity = 0.0;
  scene.table_color = Rgb(0.2, 0.4, 0.6);
  auto obj = place(Cylinder{0.2, 0.04}, Vec3(0, 0, 0.04), 1);
  obj.color = Rgb(0.8, 0.2, 0.4);
  scene.objects.push_back(obj);
  const auto fb = rasterize(scene);
  const std::array<std::uint8_t, 3> object_rgb = {204, 51, 102};
  const std::array<std::uint8_t, 3> table_rgb = {51, 102, 153};
  std::size_t checked = 0;
  for (std::size_t i = 0; i < fb.instance_id.size(); ++i) {
    if (!std::isfinite(fb.depth[i])) continue;
    const auto& want = fb.instance_id[i] == 1 ? object_rgb : table_rgb;
    for (int c = 0; c < 3; ++c) ASSERT_EQ(fb.rgb[3 * i + c], want[c]);
    ++checked;
  }
  EXPECT_GT(checked, 100u);
}

TEST(Rasterize, BufferInvariantsAndOracleAgreement) {
  const auto cfg = testing_support::small_config();
  std::size_t pixels = 0, agree = 0;
  for (const auto& templates : {simple_templates(), complex_templates()}) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const Scene scene = generate_scene(seed, cfg, templates);
      const auto fb = rasterize(scene);
      ASSERT_EQ(fb.rgb.size(), 3u * fb.width * fb.height);
      ASSERT_EQ(fb.depth.size(), static_cast<std::size_t>(fb.width) * fb.height);
      for (std::size_t i = 0; i < fb.depth.size(); ++i) {
        const int id = fb.instance_id[i];
        ASSERT_GE(id, 0);
        ASSERT_LE(id, static_cast<int>(scene.objects.size()));
        if (id > 0) ASSERT_TRUE(std::isfinite(fb.depth[i]));
      }
      // Table and background share id 0; coverage tells them apart.
      const auto frame = oracle::raycast_frame(scene);
      for (std::size_t i = 0; i < frame.hits.size(); ++i) {
        ++pixels;
        const auto& hit = frame.hits[i];
        const int want = std::isfinite(hit.depth) ? hit.id : -1;
        const int got = std::isfinite(fb.depth[i]) ? fb.instance_id[i] : -1;
        if (want != got) continue;
        ++agree;
        if (want >= 0) EXPECT_NEAR(fb.depth[i], hit.depth, 1e-6 * hit.depth);
      }
    }
  }
  EXPECT_GE(static_cast<double>(agree) / pixels, 0.995);
}

TEST(Keypoints, OutOfFrameIsFlagOne) {
  Scene scene;
  scene.camera = camera_at(Vec3(0, 0, 0.5), Vec3::Zero(), 64, 0.4, Vec3::UnitY());
  scene.objects.push_back(place(Cylinder{0.8, 0.02}, Vec3(0, 0, 0.02), 1));
  const auto fb = rasterize(scene);
  const auto kps = annotate_keypoints(scene, fb, scene.objects[0]);
  ASSERT_EQ(kps.size(), 2u);
  EXPECT_EQ(kps[0].flag, 1);
  EXPECT_EQ(kps[1].flag, 1);
  EXPECT_TRUE(kps[0].u < 0 || kps[0].u > 64);
}

TEST(Keypoints, VisibleEndpointsOfUnoccludedObject) {
  Scene scene;
  scene.camera = camera_at(Vec3(0.6, 0.2, 0.8), Vec3::Zero(), 128);
  scene.objects.push_back(place(Cuboid{0.2, 0.06, 0.06}, Vec3(0, 0, 0.03), 1));
  const auto fb = rasterize(scene);
  const auto kps = annotate_keypoints(scene, fb, scene.objects[0]);
  ASSERT_EQ(kps.size(), 2u);
  EXPECT_EQ(kps[0].flag, 2);
  EXPECT_EQ(kps[1].flag, 2);
  const oracle::SceneSoup soup(scene);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(oracle::visibility(scene, soup, scene.objects[0],
                                 scene.objects[0].manifold.keypoints()[i]),
              2);
  }
}

TEST(Keypoints, PaddingKeepsCoordinatesWithFlagZero) {
  const auto templates = complex_templates();
  const auto& mug = templates[2];
  Scene scene;
  scene.camera = camera_at(Vec3(0.5, 0.3, 0.6), Vec3::Zero(), 64);
  Pose pose;
  pose.translation = Vec3(0, 0, 0.2);
  scene.objects.push_back(make_scene_object(mug, 2, mug.geometry, pose, 1));
  const auto fb = rasterize(scene);
  const auto kps = annotate_keypoints(scene, fb, scene.objects[0]);
  ASSERT_EQ(kps.size(), 10u);
  const auto origin = project(scene.camera, pose.translation);
  for (std::size_t i = mug.manifold.size(); i < 10; ++i) {
    EXPECT_EQ(kps[i].flag, 0);
    EXPECT_NEAR(kps[i].u, origin->u, 1e-9);
    EXPECT_NEAR(kps[i].v, origin->v, 1e-9);
  }
}

TEST(SimpleSwap, Cases) {
  const Keypoint2D a{1, 2, 1}, b{3, 4, 2};
  EXPECT_EQ(apply_simple_swap({a, b}), (std::vector<Keypoint2D>{b, a}));
  const Keypoint2D c{1, 2, 2};
  EXPECT_EQ(apply_simple_swap({c, b}), (std::vector<Keypoint2D>{c, b}));
  const Keypoint2D d{3, 4, 1};
  EXPECT_EQ(apply_simple_swap({a, d}), (std::vector<Keypoint2D>{a, d}));
  EXPECT_THROW(apply_simple_swap({a}), InvalidArgument);
  EXPECT_THROW(apply_simple_swap({a, b, c}), InvalidArgument);
}

TEST(AnnotateScene, Properties) {
  const GenerationConfig cfg = testing_support::small_config(96);
  for (const auto& templates : {simple_templates(), complex_templates()}) {
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
      const Scene scene = generate_scene(seed, cfg, templates);
      const auto fb = rasterize(scene);
      const auto ann = annotate_scene(scene, fb);
      std::set<int> present(fb.instance_id.begin(), fb.instance_id.end());
      present.erase(0);
      ASSERT_EQ(ann.size(), present.size());
      std::vector<int> owner(fb.instance_id.size(), 0);
      for (const auto& a : ann) {
        EXPECT_TRUE(present.count(a.instance_id));
        const auto box = bbox_from_mask(a.mask);
        ASSERT_TRUE(box);
        EXPECT_EQ(*box, a.bbox);
        EXPECT_EQ(a.mask, fb.mask_of(a.instance_id));
        for (std::size_t i = 0; i < a.mask.pixels.size(); ++i) {
          if (!a.mask.pixels[i]) continue;
          EXPECT_EQ(owner[i], 0);
          owner[i] = a.instance_id;
        }
        const auto& obj = scene.objects[a.instance_id - 1];
        ASSERT_EQ(a.keypoints.size(), static_cast<std::size_t>(obj.keypoint_budget));
        if (obj.simple) {
          EXPECT_FALSE(a.keypoints[0].flag != 2 && a.keypoints[1].flag == 2);
        }
      }
    }
  }
}
