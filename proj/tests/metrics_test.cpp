#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "graspme/error.hpp"
#include "graspme/metrics.hpp"
#include "graspme/pipeline.hpp"
#include "oracle/ap_oracle.hpp"
#include "support.hpp"

using namespace graspme;

namespace {

// Brute-force stroke: every pixel center within radius of the polyline.
PixelSet brute_stroke(const std::vector<Pixel2>& pts, double stroke, Canvas c) {
  PixelSet out;
  const double r = stroke / 2;
  for (int y = 0; y < c.height; ++y) {
    for (int x = 0; x < c.width; ++x) {
      bool hit = false;
      for (std::size_t i = 0; i + 1 < pts.size() && !hit; ++i) {
        const auto& a = pts[i];
        const auto& b = pts[i + 1];
        const double dx = b.x - a.x, dy = b.y - a.y;
        const double len2 = dx * dx + dy * dy;
        const double t = len2 > 0 ? std::clamp(((x - a.x) * dx + (y - a.y) * dy) / len2, 0.0, 1.0) : 0.0;
        hit = std::hypot(a.x + t * dx - x, a.y + t * dy - y) <= r;
      }
      if (hit) out.push_back(static_cast<std::uint32_t>(y * c.width + x));
    }
  }
  return out;
}

// Even-odd point-in-polygon by ray casting.
bool inside(const std::vector<Pixel2>& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    if ((poly[i].y > y) != (poly[j].y > y) &&
        x < (poly[j].x - poly[i].x) * (y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x) {
      in = !in;
    }
  }
  return in;
}

std::vector<ApItem> items(std::initializer_list<std::tuple<int, int, double>> list) {
  std::vector<ApItem> out;
  for (auto [img, cat, score] : list) out.push_back({img, cat, score});
  return out;
}

CocoDataset small_gt(Family family, std::size_t scenes, std::uint64_t seed, int side = 128) {
  GenerateOptions opt;
  opt.config = testing_support::small_config(side);
  opt.family = family;
  opt.scenes = scenes;
  opt.seed = seed;
  opt.jobs = 1;
  auto build = generate_dataset_serial(opt);
  CocoDataset all = build.train;
  for (const auto* part : {&build.val, &build.test}) {
    for (const auto& im : part->images) all.images.push_back(im);
    for (auto a : part->annotations) {
      a.id += 100000;
      all.annotations.push_back(a);
    }
  }
  return all;
}

}  // namespace

TEST(IouBbox, Examples) {
  const BBox a{0, 0, 10, 10};
  EXPECT_DOUBLE_EQ(iou_bbox(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou_bbox(a, {20, 20, 5, 5}), 0.0);
  EXPECT_DOUBLE_EQ(iou_bbox(a, {5, 0, 10, 10}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(iou_bbox(a, {2.5, 0, 10, 10}), 0.6);
  EXPECT_DOUBLE_EQ(iou_bbox({1, 1, 0, 0}, {1, 1, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(iou_bbox({1, 1, 0, 0}, {2, 2, 0, 0}), 0.0);
}

TEST(Oks, Examples) {
  const std::vector<Keypoint2D> gt = {{10, 10, 2}, {20, 20, 1}};
  const std::vector<ScoredKeypoint> same = {{10, 10, 1}, {20, 20, 1}};
  EXPECT_DOUBLE_EQ(oks(same, gt, 100, 0.1), 1.0);
  const std::vector<Keypoint2D> hidden = {{10, 10, 0}, {20, 20, 0}};
  EXPECT_DOUBLE_EQ(oks(same, hidden, 100, 0.1), 0.0);
  const double area = 50, kappa = 0.1;
  const double d = std::sqrt(2 * area * kappa * kappa);
  const std::vector<Keypoint2D> one = {{0, 0, 2}};
  const std::vector<ScoredKeypoint> off = {{d, 0, 1}};
  EXPECT_NEAR(oks(off, one, area, kappa), std::exp(-1.0), 1e-12);
  EXPECT_THROW(oks(off, gt, area, kappa), InvalidArgument);
}

TEST(CocoAp, IouSixtyGivesThirty) {
  const auto gts = items({{1, 1, 0}});
  const auto dets = items({{1, 1, 0.9}});
  const auto thresholds = EvalConfig::default_thresholds();
  auto sim = [](std::size_t, std::size_t) { return iou_bbox({0, 0, 10, 10}, {2.5, 0, 10, 10}); };
  EXPECT_NEAR(coco_ap(gts, dets, sim, thresholds).ap, 30.0, 1e-9);
  EXPECT_NEAR(oracle::brute_force_ap(gts, dets, sim, thresholds, false), 30.0, 1e-9);
}

TEST(CocoAp, PerfectAndEmpty) {
  const auto gts = items({{1, 1, 0}, {1, 2, 0}, {2, 1, 0}});
  const auto thresholds = EvalConfig::default_thresholds();
  auto perfect = [&](std::size_t d, std::size_t g) { return d == g ? 1.0 : 0.0; };
  const auto dets = items({{1, 1, 0.9}, {1, 2, 0.8}, {2, 1, 0.7}});
  EXPECT_DOUBLE_EQ(coco_ap(gts, dets, perfect, thresholds).ap, 100.0);
  EXPECT_DOUBLE_EQ(coco_ap(gts, {}, perfect, thresholds).ap, 0.0);
  EXPECT_DOUBLE_EQ(coco_ap({}, dets, perfect, thresholds).ap, 0.0);
}

TEST(CocoAp, MergeClassesIgnoresCategory) {
  const auto gts = items({{1, 1, 0}});
  const auto dets = items({{1, 2, 0.9}});
  const auto thresholds = EvalConfig::default_thresholds();
  auto sim = [](std::size_t, std::size_t) { return 1.0; };
  EXPECT_DOUBLE_EQ(coco_ap(gts, dets, sim, thresholds, false).ap, 0.0);
  EXPECT_DOUBLE_EQ(coco_ap(gts, dets, sim, thresholds, true).ap, 100.0);
}

TEST(CocoAp, MatchesBruteForceOracle) {
  Rng rng(2718);
  const auto thresholds = EvalConfig::default_thresholds();
  for (int fixture = 0; fixture < 200; ++fixture) {
    std::vector<ApItem> gts, dets;
    std::vector<BBox> gt_boxes, det_boxes;
    const int images = rng.uniform_int(1, 3);
    for (int im = 1; im <= images; ++im) {
      const int ng = rng.uniform_int(0, 4);
      for (int g = 0; g < ng; ++g) {
        gts.push_back({im, rng.uniform_int(1, 2), 0});
        gt_boxes.push_back({rng.uniform(0, 30), rng.uniform(0, 30), rng.uniform(2, 12), rng.uniform(2, 12)});
      }
      const int nd = rng.uniform_int(0, 5);
      for (int d = 0; d < nd; ++d) {
        const double score = rng.bernoulli(0.2) ? 0.5 : rng.uniform();
        dets.push_back({im, rng.uniform_int(1, 2), score});
        if (!gt_boxes.empty() && rng.bernoulli(0.7)) {
          BBox b = gt_boxes[rng.uniform_int(0, static_cast<int>(gt_boxes.size()) - 1)];
          b.x += rng.uniform(-3, 3);
          b.y += rng.uniform(-3, 3);
          det_boxes.push_back(b);
        } else {
          det_boxes.push_back({rng.uniform(0, 30), rng.uniform(0, 30), rng.uniform(2, 12), rng.uniform(2, 12)});
        }
      }
    }
    auto sim = [&](std::size_t d, std::size_t g) { return iou_bbox(det_boxes[d], gt_boxes[g]); };
    for (bool merge : {false, true}) {
      const double fast = coco_ap(gts, dets, sim, thresholds, merge).ap;
      const double slow = oracle::brute_force_ap(gts, dets, sim, thresholds, merge);
      ASSERT_EQ(std::round(fast * 1e9), std::round(slow * 1e9)) << "fixture " << fixture;
    }
  }
}

TEST(Stroke, SegmentMatchesDistanceScan) {
  const Canvas c{40, 30};
  const std::vector<Pixel2> seg = {{10, 10}, {20, 10}};
  const auto px = stroke_polyline(seg, false, 3, c);
  EXPECT_EQ(px, brute_stroke(seg, 3, c));
  EXPECT_EQ(px.size(), 11u * 3u + 6u);
}

TEST(Stroke, DegenerateSegmentIsDisc) {
  const Canvas c{20, 20};
  const std::vector<Pixel2> pts = {{10, 10}, {10, 10}};
  const auto px = rasterize_manifold(pts, ManifoldKind::kLine, 3, c);
  std::size_t expected = 0;
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) expected += std::hypot(x - 10, y - 10) <= 1.5;
  }
  EXPECT_EQ(px.size(), expected);
}

TEST(Stroke, RandomPolylinesMatchScan) {
  Rng rng(17);
  const Canvas c{48, 40};
  for (int i = 0; i < 200; ++i) {
    std::vector<Pixel2> pts(rng.uniform_int(2, 5));
    for (auto& p : pts) p = {rng.uniform(-10, 58), rng.uniform(-10, 50)};
    const double stroke = rng.uniform(1, 6);
    ASSERT_EQ(stroke_polyline(pts, false, stroke, c), brute_stroke(pts, stroke, c));
  }
}

TEST(Fill, SquareArea) {
  const Canvas c{30, 30};
  const std::vector<Pixel2> square = {{5, 5}, {15, 5}, {15, 15}, {5, 15}};
  const auto fill = fill_polygon(square, c);
  EXPECT_LE(std::abs(static_cast<long>(fill.size()) - 121), 11);
  const auto full = rasterize_manifold(square, ManifoldKind::kSurface, 1, c);
  EXPECT_EQ(full.size(), 121u);
}

TEST(Fill, MatchesEvenOddOracleAwayFromEdges) {
  Rng rng(23);
  const Canvas c{40, 40};
  for (int i = 0; i < 200; ++i) {
    std::vector<Pixel2> poly(rng.uniform_int(3, 7));
    for (auto& p : poly) p = {rng.uniform(-5, 45), rng.uniform(-5, 45)};
    const auto fill = fill_polygon(poly, c);
    const auto edge = stroke_polyline(poly, true, 2.0, c);
    for (int y = 0; y < c.height; ++y) {
      for (int x = 0; x < c.width; ++x) {
        const auto idx = static_cast<std::uint32_t>(y * c.width + x);
        if (std::binary_search(edge.begin(), edge.end(), idx)) continue;
        ASSERT_EQ(std::binary_search(fill.begin(), fill.end(), idx), inside(poly, x, y));
      }
    }
  }
}

TEST(Rasterize, ArityErrors) {
  const Canvas c{10, 10};
  const std::vector<Pixel2> one = {{1, 1}};
  const std::vector<Pixel2> two = {{1, 1}, {5, 5}};
  EXPECT_THROW(rasterize_manifold(one, ManifoldKind::kLine, 3, c), InvalidArgument);
  EXPECT_THROW(rasterize_manifold(two, ManifoldKind::kSurface, 3, c), InvalidArgument);
}

TEST(PixelSetIou, Properties) {
  Rng rng(3);
  const Canvas c{32, 32};
  for (int i = 0; i < 300; ++i) {
    std::vector<Pixel2> a(2), b(2);
    for (auto& p : a) p = {rng.uniform(0, 32), rng.uniform(0, 32)};
    for (auto& p : b) p = {rng.uniform(0, 32), rng.uniform(0, 32)};
    const auto sa = stroke_polyline(a, false, 3, c);
    const auto sb = stroke_polyline(b, false, 3, c);
    const double ab = pixel_set_iou(sa, sb);
    EXPECT_DOUBLE_EQ(ab, pixel_set_iou(sb, sa));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_EQ(ab == 1.0, sa == sb);
    EXPECT_DOUBLE_EQ(pixel_set_iou(sa, sa), 1.0);
  }
  EXPECT_DOUBLE_EQ(pixel_set_iou({}, {}), 1.0);
  EXPECT_DOUBLE_EQ(pixel_set_iou({}, {1, 2}), 0.0);
}

TEST(ManifoldIou, IdentityTranslationAndModes) {
  const Canvas c{64, 64};
  std::vector<Keypoint2D> gt = {{10, 10, 2}, {40, 12, 2}};
  const std::vector<ScoredKeypoint> same = {{10, 10, 2}, {40, 12, 2}};
  EXPECT_DOUBLE_EQ(manifold_iou(gt, ManifoldKind::kLine, same, IouMode::kClip, 3, c), 1.0);
  EXPECT_DOUBLE_EQ(manifold_iou(gt, ManifoldKind::kLine, same, IouMode::kFull, 3, c), 1.0);
  const std::vector<ScoredKeypoint> moved = {{10, 14, 2}, {40, 16, 2}};
  EXPECT_DOUBLE_EQ(manifold_iou(gt, ManifoldKind::kLine, moved, IouMode::kClip, 3, c), 0.0);

  // Clip uses only as many predicted points as there are visible GT points.
  std::vector<Keypoint2D> gt3 = {{10, 10, 2}, {40, 10, 1}, {0, 0, 0}};
  const std::vector<ScoredKeypoint> extra = {{10, 10, 2}, {40, 10, 2}, {40, 50, 2}};
  EXPECT_DOUBLE_EQ(manifold_iou(gt3, ManifoldKind::kLine, extra, IouMode::kClip, 3, c), 1.0);
  EXPECT_LT(manifold_iou(gt3, ManifoldKind::kLine, extra, IouMode::kFull, 3, c), 1.0);
}

TEST(ManifoldIou, ClipEqualsFullWhenAllKeypointsUsed) {
  Rng rng(41);
  const Canvas c{96, 96};
  for (int i = 0; i < 200; ++i) {
    const int K = rng.bernoulli(0.5) ? 2 : 6;
    const auto kind = K > 2 && rng.bernoulli(0.5) ? ManifoldKind::kSurface : ManifoldKind::kLine;
    std::vector<Keypoint2D> gt(K);
    std::vector<ScoredKeypoint> pred(K);
    for (int k = 0; k < K; ++k) {
      gt[k] = {rng.uniform(0, 96), rng.uniform(0, 96), rng.bernoulli(0.8) ? 2 : 1};
      pred[k] = {rng.uniform(0, 96), rng.uniform(0, 96), rng.uniform(0.1, 1)};
    }
    const double clip = manifold_iou(gt, kind, pred, IouMode::kClip, 3, c);
    const double full = manifold_iou(gt, kind, pred, IouMode::kFull, 3, c);
    EXPECT_NEAR(clip, full, 1e-12);
  }
}

TEST(Matching, PrefersExactSet) {
  const std::vector<Keypoint2D> g1 = {{0, 0, 2}, {10, 0, 2}};
  const std::vector<Keypoint2D> g2 = {{50, 50, 2}, {60, 50, 2}};
  const std::vector<ScoredKeypoint> p = {{50, 50, 1}, {60, 50, 1}};
  const auto pairs = match_instances({g1, g2}, {p});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].gt, 1u);
  EXPECT_DOUBLE_EQ(pairs[0].distance, 0.0);
}

TEST(Matching, BijectionForEqualCounts) {
  Rng rng(8);
  std::vector<std::vector<Keypoint2D>> gts;
  std::vector<std::vector<ScoredKeypoint>> preds;
  for (int i = 0; i < 5; ++i) {
    gts.push_back({{i * 100.0, 0, 2}, {i * 100.0 + 20, 0, 2}});
    preds.push_back({{(4 - i) * 100.0 + 1, 1, 1}, {(4 - i) * 100.0 + 21, 1, 1}});
  }
  std::vector<std::span<const Keypoint2D>> gs(gts.begin(), gts.end());
  std::vector<std::span<const ScoredKeypoint>> ps(preds.begin(), preds.end());
  const auto pairs = match_instances(gs, ps);
  ASSERT_EQ(pairs.size(), 5u);
  for (const auto& p : pairs) EXPECT_EQ(p.gt, 4 - p.pred);
}

TEST(Matching, GreedyGlobalMinimumAgainstExhaustive) {
  // Crossed distances: the closest pair (g0, p0) is not part of the
  // assignment with the smallest total distance.
  const std::vector<Keypoint2D> g0 = {{0, 0, 2}}, g1 = {{4, 0, 2}};
  const std::vector<ScoredKeypoint> p0 = {{1, 0, 1}}, p1 = {{-6, 2, 1}};
  const std::vector<std::span<const Keypoint2D>> gs = {g0, g1};
  const std::vector<std::span<const ScoredKeypoint>> ps = {p0, p1};
  const auto pairs = match_instances(gs, ps);
  ASSERT_EQ(pairs.size(), 2u);
  // Greedy takes the globally closest pair first.
  double best = INFINITY;
  std::size_t best_g = 0, best_p = 0;
  for (std::size_t g = 0; g < 2; ++g) {
    for (std::size_t p = 0; p < 2; ++p) {
      const double d = *keypoint_set_distance(gs[g], ps[p]);
      if (d < best) {
        best = d;
        best_g = g;
        best_p = p;
      }
    }
  }
  EXPECT_EQ(pairs[0].gt, best_g);
  EXPECT_EQ(pairs[0].pred, best_p);
  EXPECT_DOUBLE_EQ(pairs[0].distance, best);
  EXPECT_EQ(pairs[1].gt, 1 - best_g);
  EXPECT_EQ(pairs[1].pred, 1 - best_p);
  const double greedy_total = pairs[0].distance + pairs[1].distance;
  const double swapped = *keypoint_set_distance(gs[0], ps[1]) + *keypoint_set_distance(gs[1], ps[0]);
  EXPECT_GT(greedy_total, swapped);
}

TEST(MeanDistance, Examples) {
  const std::vector<Keypoint2D> gt = {{0, 0, 2}, {10, 10, 2}};
  const std::vector<ScoredKeypoint> pred = {{3, 4, 1}, {10, 10, 1}};
  EXPECT_DOUBLE_EQ(*keypoint_set_distance(gt, pred), 2.5);
  const std::vector<MatchPair> pairs = {{0, 0, 2.5}};
  const auto ms = mean_pixel_distance(pairs);
  ASSERT_TRUE(ms);
  EXPECT_DOUBLE_EQ(ms->mean, 2.5);
  EXPECT_DOUBLE_EQ(ms->std, 0.0);
  EXPECT_FALSE(mean_pixel_distance({}));

  const std::vector<Keypoint2D> gt2 = {{0, 0, 2}, {20, 20, 2}};
  const std::vector<ScoredKeypoint> pred2 = {{6, 8, 1}, {20, 20, 1}};
  EXPECT_DOUBLE_EQ(*keypoint_set_distance(gt2, pred2), 5.0);
  const std::vector<Keypoint2D> none = {{0, 0, 0}, {1, 1, 0}};
  EXPECT_FALSE(keypoint_set_distance(none, pred));
}

TEST(MeanStd, Population) {
  const std::vector<double> v = {1, 3};
  EXPECT_DOUBLE_EQ(mean_std(v)->mean, 2.0);
  EXPECT_DOUBLE_EQ(mean_std(v)->std, 1.0);
}

TEST(Evaluate, PerfectPredictor) {
  for (Family f : {Family::kSimple, Family::kComplex}) {
    const auto gt = small_gt(f, 20, 3);
    Rng rng(1);
    const auto preds = perturbation_predictor(gt, 0.0, rng);
    const auto r = evaluate(gt, preds, EvalConfig{});
    EXPECT_EQ(*r.ap_bb, 100.0);
    EXPECT_EQ(*r.ap_seg, 100.0);
    EXPECT_EQ(*r.ap_kp, 100.0);
    EXPECT_EQ(r.iou_clip->mean, 100.0);
    EXPECT_EQ(r.iou_clip->std, 0.0);
    EXPECT_EQ(r.iou_full->mean, 100.0);
    EXPECT_EQ(r.iou_full->std, 0.0);
    EXPECT_EQ(r.mdist->mean, 0.0);
    EXPECT_EQ(r.mdist->std, 0.0);
    EXPECT_EQ(r.num_matched, gt.annotations.size());
  }
}

TEST(Evaluate, EmptyPredictions) {
  const auto gt = small_gt(Family::kSimple, 10, 4);
  const auto r = evaluate(gt, {}, EvalConfig{});
  EXPECT_EQ(*r.ap_bb, 0.0);
  EXPECT_EQ(*r.ap_seg, 0.0);
  EXPECT_EQ(*r.ap_kp, 0.0);
  EXPECT_FALSE(r.iou_clip);
  EXPECT_FALSE(r.iou_full);
  EXPECT_FALSE(r.mdist);
  EXPECT_EQ(r.match_rate, 0.0);
}

TEST(Evaluate, SerialAndParallelAgree) {
  const auto gt = small_gt(Family::kComplex, 30, 5);
  Rng rng(2);
  const auto preds = perturbation_predictor(gt, 4.0, rng);
  EvalConfig cfg;
  EXPECT_EQ(report_to_json(evaluate(gt, preds, cfg)), report_to_json(evaluate_serial(gt, preds, cfg)));
  cfg.merge_classes = true;
  EXPECT_EQ(report_to_json(evaluate(gt, preds, cfg)), report_to_json(evaluate_serial(gt, preds, cfg)));
}

TEST(Evaluate, NoiseMonotonicity) {
  const auto gt = small_gt(Family::kSimple, 40, 6, 256);
  double last_dist = -1, last_ap = 101;
  for (double noise : {0.0, 2.0, 5.0, 10.0}) {
    Rng rng(77);
    const auto preds = perturbation_predictor(gt, noise, rng);
    const auto r = evaluate(gt, preds, EvalConfig{});
    EXPECT_GE(r.mdist->mean, last_dist);
    EXPECT_LE(*r.ap_kp, last_ap);
    if (noise == 2.0) EXPECT_LE(r.mdist->mean, 2.0);
    last_dist = r.mdist->mean;
    last_ap = *r.ap_kp;
  }
}

TEST(Evaluate, MasklessPredictionsOmitSegAp) {
  const auto gt = small_gt(Family::kSimple, 10, 7);
  Rng rng(3);
  const auto preds = random_baseline(gt, rng);
  const auto r = evaluate(gt, preds, EvalConfig{});
  EXPECT_FALSE(r.ap_seg);
  EXPECT_EQ(*r.ap_bb, 100.0);
  EXPECT_LE(*r.ap_kp, 100.0);
  const auto table = report_table(r, "Random");
  EXPECT_NE(table.find("Random"), std::string::npos);
  EXPECT_NE(table.find("AP^kp"), std::string::npos);
}

TEST(Evaluate, RejectsUnknownIds) {
  const auto gt = small_gt(Family::kSimple, 10, 8);
  Rng rng(3);
  auto preds = random_baseline(gt, rng);
  preds[0].image_id = 99999;
  EXPECT_THROW(evaluate(gt, preds, EvalConfig{}), SchemaError);
}

TEST(EvalConfig, Validation) {
  EvalConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.iou_thresholds.size(), 10u);
  EXPECT_DOUBLE_EQ(c.iou_thresholds.front(), 0.5);
  EXPECT_DOUBLE_EQ(c.iou_thresholds.back(), 0.95);
  c.stroke_px = 0.5;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = EvalConfig{};
  c.iou_thresholds = {0.5, 0.5};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.iou_thresholds = {0.0};
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(RandomBaseline, InsideBoxesAndDeterministic) {
  const auto gt = small_gt(Family::kComplex, 30, 9);
  Rng a(5), b(5);
  const auto pa = random_baseline(gt, a);
  const auto pb = random_baseline(gt, b);
  EXPECT_EQ(write_predictions(pa), write_predictions(pb));
  ASSERT_EQ(pa.size(), gt.annotations.size());
  std::size_t draws = 0;
  for (const auto& p : pa) {
    EXPECT_EQ(p.score, 1.0);
    for (const auto& k : p.keypoints) {
      EXPECT_GE(k.u, p.bbox.x);
      EXPECT_LE(k.u, p.bbox.x + p.bbox.w);
      EXPECT_GE(k.v, p.bbox.y);
      EXPECT_LE(k.v, p.bbox.y + p.bbox.h);
      EXPECT_EQ(k.confidence, 2.0);
      ++draws;
    }
  }
  EXPECT_GT(draws, 1000u);
}

TEST(RandomBaseline, UsesSuppliedBoxes) {
  const auto gt = small_gt(Family::kSimple, 10, 10);
  PredictionSet boxes;
  boxes.push_back({gt.images[0].id, 1, 0.4, BBox{1, 2, 3, 4}, std::nullopt, {}});
  Rng rng(1);
  const auto preds = random_baseline(gt, rng, &boxes);
  ASSERT_EQ(preds.size(), 1u);
  EXPECT_EQ(preds[0].bbox, (BBox{1, 2, 3, 4}));
  EXPECT_EQ(preds[0].keypoints.size(), 2u);
}

TEST(Perturbation, NoiseBoundAndClamp) {
  const auto gt = small_gt(Family::kSimple, 20, 11);
  Rng rng(4);
  const auto preds = perturbation_predictor(gt, 3.0, rng);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& a = gt.annotations[i];
    const auto* im = gt.find_image(a.image_id);
    for (std::size_t k = 0; k < a.keypoints.size(); ++k) {
      const auto& g = a.keypoints[k];
      const auto& p = preds[i].keypoints[k];
      EXPECT_LE(std::hypot(p.u - g.u, p.v - g.v), 3.0 + 1e-9);
      if (g.u >= 0 && g.u <= im->width - 1) {
        EXPECT_GE(p.u, 0.0);
        EXPECT_LE(p.u, im->width - 1.0);
      }
      EXPECT_EQ(p.confidence, g.flag);
    }
  }
  EXPECT_THROW(perturbation_predictor(gt, -1.0, rng), InvalidArgument);
}
