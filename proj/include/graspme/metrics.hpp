#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graspme/dataset.hpp"
#include "graspme/rng.hpp"

namespace graspme {

struct EvalConfig {
  std::vector<double> iou_thresholds = default_thresholds();
  double oks_kappa = 0.1;
  double stroke_px = 3.0;
  bool merge_classes = false;

  /// 0.50, 0.55, ..., 0.95 computed as (50 + 5i) / 100 so each threshold is
  /// the double nearest its decimal value.
  static std::vector<double> default_thresholds();
  void validate() const;
};

double iou_bbox(const BBox& a, const BBox& b);

/// Object keypoint similarity with a uniform kappa over GT keypoints with
/// v > 0. Throws InvalidArgument on arity mismatch.
double oks(std::span<const ScoredKeypoint> pred, std::span<const Keypoint2D> gt, double gt_area,
           double kappa);

// ---------------------------------------------------------------------------
// Average precision

struct ApItem {
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  double score = 0.0;  // ignored for ground truth
};

/// similarity(detection_index, gt_index); only called for pairs on the same image.
using SimilarityFn = std::function<double(std::size_t, std::size_t)>;

struct ApResult {
  double ap = 0.0;  // percent, mean over categories with ground truth
  std::map<std::int64_t, double> per_category;
};

/// COCO-style AP: per threshold, score-descending greedy matching to the most
/// similar unmatched GT with similarity >= t on the same image (and category
/// unless merged), 101-point interpolated precision, averaged over thresholds
/// and then over categories.
ApResult coco_ap(std::span<const ApItem> gts, std::span<const ApItem> detections,
                 const SimilarityFn& similarity, std::span<const double> thresholds,
                 bool merge_classes = false);

// ---------------------------------------------------------------------------
// Grasp-manifold pixel sets

struct Pixel2 {
  double x = 0.0;
  double y = 0.0;
};

/// Sorted linear pixel indices y * width + x.
using PixelSet = std::vector<std::uint32_t>;

struct Canvas {
  int width = 0;
  int height = 0;
};

/// Pixels whose centers lie within stroke_px / 2 of the polyline.
PixelSet stroke_polyline(std::span<const Pixel2> points, bool closed, double stroke_px, Canvas canvas);
/// Even-odd fill of the closed polygon, sampled at pixel centers.
PixelSet fill_polygon(std::span<const Pixel2> points, Canvas canvas);

/// Line: stroked open polyline. Surface: filled polygon united with its
/// stroked boundary. Throws InvalidArgument for fewer than 2 (line) or 3
/// (surface) points.
PixelSet rasterize_manifold(std::span<const Pixel2> points, ManifoldKind kind, double stroke_px,
                            Canvas canvas);

/// 1 exactly when the sets coincide, so two empty sets score 1.
double pixel_set_iou(const PixelSet& a, const PixelSet& b);

enum class IouMode { kClip, kFull };

/// GT pixels come from GT keypoints with v > 0. The prediction uses its first
/// k keypoints (clip, k = that GT count) or every keypoint with nonzero
/// confidence (full).
double manifold_iou(std::span<const Keypoint2D> gt, ManifoldKind kind,
                    std::span<const ScoredKeypoint> pred, IouMode mode, double stroke_px,
                    Canvas canvas);

// ---------------------------------------------------------------------------
// Instance matching and distances

/// Mean distance between index-aligned keypoints over GT keypoints with v > 0.
/// Absent if the GT has no such keypoint.
std::optional<double> keypoint_set_distance(std::span<const Keypoint2D> gt,
                                            std::span<const ScoredKeypoint> pred);

struct MatchPair {
  std::size_t gt = 0;
  std::size_t pred = 0;
  double distance = 0.0;
};

/// Greedy assignment on one image: repeatedly pairs the globally closest
/// unmatched (prediction, GT) pair. Ties go to the lower GT, then prediction
/// index.
std::vector<MatchPair> match_instances(const std::vector<std::span<const Keypoint2D>>& gts,
                                       const std::vector<std::span<const ScoredKeypoint>>& preds);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

std::optional<MeanStd> mean_std(std::span<const double> values);
std::optional<MeanStd> mean_pixel_distance(std::span<const MatchPair> pairs);

// ---------------------------------------------------------------------------
// Baselines

/// K keypoints uniform inside each source box, score 1, confidence 2. Boxes
/// come from the GT annotations, or from `boxes` when given.
PredictionSet random_baseline(const CocoDataset& gt, Rng& rng,
                              const PredictionSet* boxes = nullptr);

/// Copies GT boxes, masks and keypoints and displaces each keypoint uniformly
/// within a disc of radius noise_px. Displaced points are clamped to the
/// image, never further outside than the original. Confidence = GT flag.
PredictionSet perturbation_predictor(const CocoDataset& gt, double noise_px, Rng& rng);

// ---------------------------------------------------------------------------
// Evaluation

struct CategoryReport {
  std::int64_t id = 0;
  std::string name;
  std::size_t gt_count = 0;
  std::optional<double> ap_bb;
  std::optional<double> ap_seg;
  std::optional<double> ap_kp;
  std::optional<MeanStd> iou_clip;
  std::optional<MeanStd> iou_full;
  std::optional<MeanStd> mdist;
};

struct EvalReport {
  std::optional<double> ap_bb;   // percent
  std::optional<double> ap_seg;  // absent when no prediction carries a mask
  std::optional<double> ap_kp;
  std::optional<MeanStd> iou_clip;  // percent
  std::optional<MeanStd> iou_full;  // percent
  std::optional<MeanStd> mdist;     // pixels
  std::size_t num_gt = 0;
  std::size_t num_predictions = 0;
  std::size_t num_matched = 0;
  double match_rate = 0.0;
  std::vector<CategoryReport> per_category;
  EvalConfig config;
};

/// Full metric suite. Per-image work runs in parallel; reductions are ordered
/// by image so results do not depend on thread count.
EvalReport evaluate(const CocoDataset& gt, const PredictionSet& preds, const EvalConfig& config);
EvalReport evaluate_serial(const CocoDataset& gt, const PredictionSet& preds,
                           const EvalConfig& config);

std::string report_to_json(const EvalReport& report);
/// Aligned text table in the column order AP^bb, AP^seg, AP^kp, IoU_clip,
/// IoU_full, mDist.
std::string report_table(const EvalReport& report, const std::string& model_name);

}  // namespace graspme
