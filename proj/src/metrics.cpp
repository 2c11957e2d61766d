#include "graspme/metrics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "graspme/error.hpp"
#include "json.hpp"

namespace graspme {

std::vector<double> EvalConfig::default_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back((50 + 5 * i) / 100.0);
  return t;
}

void EvalConfig::validate() const {
  if (iou_thresholds.empty()) throw InvalidArgument("eval: no IoU thresholds");
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    const double t = iou_thresholds[i];
    if (!(t > 0.0 && t <= 1.0)) throw InvalidArgument("eval: thresholds must lie in (0, 1]");
    if (i > 0 && !(t > iou_thresholds[i - 1])) {
      throw InvalidArgument("eval: thresholds must be strictly increasing");
    }
  }
  if (!(oks_kappa > 0.0) || !std::isfinite(oks_kappa)) throw InvalidArgument("eval: kappa must be positive");
  if (!(stroke_px >= 1.0) || !std::isfinite(stroke_px)) throw InvalidArgument("eval: stroke_px must be >= 1");
}

double iou_bbox(const BBox& a, const BBox& b) {
  if (a == b) return 1.0;
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double oks(std::span<const ScoredKeypoint> pred, std::span<const Keypoint2D> gt, double gt_area,
           double kappa) {
  if (pred.size() != gt.size()) throw InvalidArgument("oks: keypoint arity mismatch");
  const double denom = 2.0 * gt_area * kappa * kappa;
  double sum = 0.0;
  int visible = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt[i].flag <= 0) continue;
    const double dx = pred[i].u - gt[i].u;
    const double dy = pred[i].v - gt[i].v;
    const double d2 = dx * dx + dy * dy;
    sum += denom > 0.0 ? std::exp(-d2 / denom) : (d2 == 0.0 ? 1.0 : 0.0);
    ++visible;
  }
  return visible == 0 ? 0.0 : sum / visible;
}

// ---------------------------------------------------------------------------

ApResult coco_ap(std::span<const ApItem> gts, std::span<const ApItem> detections,
                 const SimilarityFn& similarity, std::span<const double> thresholds,
                 bool merge_classes) {
  auto group_of = [merge_classes](const ApItem& item) {
    return merge_classes ? std::int64_t{0} : item.category_id;
  };

  // GT indices grouped by (category, image).
  std::map<std::int64_t, std::map<std::int64_t, std::vector<std::size_t>>> gt_index;
  std::map<std::int64_t, std::size_t> gt_count;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    gt_index[group_of(gts[g])][gts[g].image_id].push_back(g);
    ++gt_count[group_of(gts[g])];
  }
  std::map<std::int64_t, std::vector<std::size_t>> dets_by_group;
  for (std::size_t d = 0; d < detections.size(); ++d) {
    dets_by_group[group_of(detections[d])].push_back(d);
  }

  ApResult result;
  if (gt_count.empty()) return result;

  const std::size_t recall_points = 101;
  double total = 0.0;
  for (const auto& [group, n_gt] : gt_count) {
    std::vector<std::size_t> dets = dets_by_group[group];
    std::stable_sort(dets.begin(), dets.end(), [&](std::size_t a, std::size_t b) {
      return detections[a].score > detections[b].score;
    });
    const auto& images = gt_index[group];

    // Similarities are reused across thresholds.
    std::vector<std::vector<double>> sims(dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) {
      auto it = images.find(detections[dets[i]].image_id);
      if (it == images.end()) continue;
      for (auto g : it->second) sims[i].push_back(similarity(dets[i], g));
    }

    double group_sum = 0.0;
    for (double t : thresholds) {
      std::map<std::int64_t, std::vector<bool>> matched;
      for (const auto& [image, list] : images) matched[image].assign(list.size(), false);

      std::vector<double> precision(dets.size());
      std::vector<double> recall(dets.size());
      std::size_t tp = 0;
      for (std::size_t i = 0; i < dets.size(); ++i) {
        auto it = matched.find(detections[dets[i]].image_id);
        int best = -1;
        double best_sim = t;
        if (it != matched.end()) {
          for (std::size_t j = 0; j < sims[i].size(); ++j) {
            if (it->second[j]) continue;
            if (sims[i][j] >= best_sim && (best < 0 || sims[i][j] > best_sim)) {
              best = static_cast<int>(j);
              best_sim = sims[i][j];
            }
          }
        }
        if (best >= 0) {
          it->second[static_cast<std::size_t>(best)] = true;
          ++tp;
        }
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(n_gt);
      }
      for (std::size_t i = precision.size(); i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
      }
      double sum = 0.0;
      for (std::size_t r = 0; r < recall_points; ++r) {
        const double level = static_cast<double>(r) / 100.0;
        const auto pos = std::lower_bound(recall.begin(), recall.end(), level) - recall.begin();
        if (static_cast<std::size_t>(pos) < precision.size()) sum += precision[pos];
      }
      group_sum += sum / recall_points;
    }
    const double ap = 100.0 * group_sum / static_cast<double>(thresholds.size());
    result.per_category[group] = ap;
    total += ap;
  }
  result.ap = total / static_cast<double>(gt_count.size());
  return result;
}

// ---------------------------------------------------------------------------

namespace {

double segment_distance2(double px, double py, const Pixel2& a, const Pixel2& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - a.x) * dx + (py - a.y) * dy) / len2, 0.0, 1.0);
  const double ex = a.x + t * dx - px;
  const double ey = a.y + t * dy - py;
  return ex * ex + ey * ey;
}

void normalize(PixelSet& set) {
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
}

void stroke_segment(const Pixel2& a, const Pixel2& b, double radius, Canvas canvas, PixelSet& out) {
  const double r2 = radius * radius;
  const int x0 = std::max(0, static_cast<int>(std::ceil(std::min(a.x, b.x) - radius)));
  const int x1 = std::min(canvas.width - 1, static_cast<int>(std::floor(std::max(a.x, b.x) + radius)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(std::min(a.y, b.y) - radius)));
  const int y1 = std::min(canvas.height - 1, static_cast<int>(std::floor(std::max(a.y, b.y) + radius)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (segment_distance2(x, y, a, b) <= r2) {
        out.push_back(static_cast<std::uint32_t>(y) * static_cast<std::uint32_t>(canvas.width) +
                      static_cast<std::uint32_t>(x));
      }
    }
  }
}

std::vector<Pixel2> finite_points(std::span<const Pixel2> points) {
  std::vector<Pixel2> out;
  for (const auto& p : points) {
    if (std::isfinite(p.x) && std::isfinite(p.y)) out.push_back(p);
  }
  return out;
}

// Manifold pixels tolerant of short point lists: a surface with fewer than 3
// points degrades to a line, a single point to a disc.
PixelSet manifold_pixels(std::span<const Pixel2> points, ManifoldKind kind, double stroke_px,
                         Canvas canvas) {
  if (points.empty()) return {};
  if (points.size() == 1) return stroke_polyline(points, false, stroke_px, canvas);
  if (kind == ManifoldKind::kSurface && points.size() < 3) kind = ManifoldKind::kLine;
  return rasterize_manifold(points, kind, stroke_px, canvas);
}

}  // namespace

PixelSet stroke_polyline(std::span<const Pixel2> points, bool closed, double stroke_px,
                         Canvas canvas) {
  PixelSet out;
  const auto pts = finite_points(points);
  if (pts.empty() || canvas.width <= 0 || canvas.height <= 0) return out;
  const double radius = 0.5 * stroke_px;
  if (pts.size() == 1) stroke_segment(pts[0], pts[0], radius, canvas, out);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) stroke_segment(pts[i], pts[i + 1], radius, canvas, out);
  if (closed && pts.size() > 2) stroke_segment(pts.back(), pts.front(), radius, canvas, out);
  normalize(out);
  return out;
}

PixelSet fill_polygon(std::span<const Pixel2> points, Canvas canvas) {
  PixelSet out;
  const auto pts = finite_points(points);
  if (pts.size() < 3 || canvas.width <= 0 || canvas.height <= 0) return out;
  double y_lo = pts[0].y, y_hi = pts[0].y;
  for (const auto& p : pts) {
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  }
  const int y0 = std::max(0, static_cast<int>(std::ceil(y_lo)));
  const int y1 = std::min(canvas.height - 1, static_cast<int>(std::floor(y_hi)));
  std::vector<double> crossings;
  for (int y = y0; y <= y1; ++y) {
    crossings.clear();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Pixel2& a = pts[i];
      const Pixel2& b = pts[(i + 1) % pts.size()];
      // Half-open in y so shared vertices count once.
      if ((a.y <= y) != (b.y <= y)) crossings.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      const int x0 = std::max(0, static_cast<int>(std::ceil(crossings[k])));
      const int x1 = std::min(canvas.width - 1, static_cast<int>(std::floor(crossings[k + 1])));
      for (int x = x0; x <= x1; ++x) {
        out.push_back(static_cast<std::uint32_t>(y) * static_cast<std::uint32_t>(canvas.width) +
                      static_cast<std::uint32_t>(x));
      }
    }
  }
  normalize(out);
  return out;
}

PixelSet rasterize_manifold(std::span<const Pixel2> points, ManifoldKind kind, double stroke_px,
                            Canvas canvas) {
  if (kind == ManifoldKind::kLine) {
    if (points.size() < 2) throw InvalidArgument("rasterize_manifold: a line needs >= 2 keypoints");
    return stroke_polyline(points, false, stroke_px, canvas);
  }
  if (points.size() < 3) throw InvalidArgument("rasterize_manifold: a surface needs >= 3 keypoints");
  PixelSet fill = fill_polygon(points, canvas);
  PixelSet edge = stroke_polyline(points, true, stroke_px, canvas);
  PixelSet out;
  std::set_union(fill.begin(), fill.end(), edge.begin(), edge.end(), std::back_inserter(out));
  return out;
}

double pixel_set_iou(const PixelSet& a, const PixelSet& b) {
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  // Coinciding sets score 1, including two empty ones.
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double manifold_iou(std::span<const Keypoint2D> gt, ManifoldKind kind,
                    std::span<const ScoredKeypoint> pred, IouMode mode, double stroke_px,
                    Canvas canvas) {
  std::vector<Pixel2> gt_pts;
  for (const auto& k : gt) {
    if (k.flag > 0) gt_pts.push_back({k.u, k.v});
  }
  std::vector<Pixel2> pred_pts;
  if (mode == IouMode::kClip) {
    for (std::size_t i = 0; i < std::min(gt_pts.size(), pred.size()); ++i) {
      pred_pts.push_back({pred[i].u, pred[i].v});
    }
  } else {
    for (const auto& k : pred) {
      if (k.confidence > 0.0) pred_pts.push_back({k.u, k.v});
    }
  }
  return pixel_set_iou(manifold_pixels(gt_pts, kind, stroke_px, canvas),
                       manifold_pixels(pred_pts, kind, stroke_px, canvas));
}

// ---------------------------------------------------------------------------

std::optional<double> keypoint_set_distance(std::span<const Keypoint2D> gt,
                                            std::span<const ScoredKeypoint> pred) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < std::min(gt.size(), pred.size()); ++i) {
    if (gt[i].flag <= 0) continue;
    sum += std::hypot(pred[i].u - gt[i].u, pred[i].v - gt[i].v);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::vector<MatchPair> match_instances(const std::vector<std::span<const Keypoint2D>>& gts,
                                       const std::vector<std::span<const ScoredKeypoint>>& preds) {
  std::vector<MatchPair> candidates;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t p = 0; p < preds.size(); ++p) {
      if (auto d = keypoint_set_distance(gts[g], preds[p])) candidates.push_back({g, p, *d});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const MatchPair& a, const MatchPair& b) { return a.distance < b.distance; });
  std::vector<bool> gt_used(gts.size(), false);
  std::vector<bool> pred_used(preds.size(), false);
  std::vector<MatchPair> out;
  for (const auto& c : candidates) {
    if (gt_used[c.gt] || pred_used[c.pred]) continue;
    gt_used[c.gt] = pred_used[c.pred] = true;
    out.push_back(c);
  }
  return out;
}

std::optional<MeanStd> mean_std(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return MeanStd{mean, std::sqrt(var / static_cast<double>(values.size()))};
}

std::optional<MeanStd> mean_pixel_distance(std::span<const MatchPair> pairs) {
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& p : pairs) d.push_back(p.distance);
  return mean_std(d);
}

// ---------------------------------------------------------------------------

PredictionSet random_baseline(const CocoDataset& gt, Rng& rng, const PredictionSet* boxes) {
  PredictionSet out;
  auto sample = [&](std::int64_t image_id, std::int64_t category_id, const BBox& box,
                    const std::optional<RleMask>& mask) {
    const CocoCategory* cat = gt.find_category(category_id);
    if (!cat) throw SchemaError("category_id", "unknown category " + std::to_string(category_id));
    Prediction p;
    p.image_id = image_id;
    p.category_id = category_id;
    p.score = 1.0;
    p.bbox = box;
    p.segmentation = mask;
    for (int k = 0; k < cat->keypoint_budget(); ++k) {
      const double u = box.x + box.w * rng.uniform();
      const double v = box.y + box.h * rng.uniform();
      p.keypoints.push_back({u, v, 2.0});
    }
    out.push_back(std::move(p));
  };
  if (boxes) {
    for (const auto& b : *boxes) sample(b.image_id, b.category_id, b.bbox, b.segmentation);
  } else {
    for (const auto& a : gt.annotations) sample(a.image_id, a.category_id, a.bbox, std::nullopt);
  }
  return out;
}

PredictionSet perturbation_predictor(const CocoDataset& gt, double noise_px, Rng& rng) {
  if (!(noise_px >= 0.0)) throw InvalidArgument("perturbation_predictor: noise must be >= 0");
  std::unordered_map<std::int64_t, const CocoImage*> images;
  for (const auto& im : gt.images) images.emplace(im.id, &im);

  PredictionSet out;
  for (const auto& a : gt.annotations) {
    const CocoImage* im = images.at(a.image_id);
    Prediction p;
    p.image_id = a.image_id;
    p.category_id = a.category_id;
    p.score = 1.0;
    p.bbox = a.bbox;
    p.segmentation = a.segmentation;
    for (const auto& k : a.keypoints) {
      ScoredKeypoint s{k.u, k.v, static_cast<double>(k.flag)};
      if (noise_px > 0.0) {
        const double r = noise_px * std::sqrt(rng.uniform());
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        const double x_max = im->width - 1.0;
        const double y_max = im->height - 1.0;
        s.u = std::clamp(k.u + r * std::cos(theta), std::min(k.u, 0.0), std::max(k.u, x_max));
        s.v = std::clamp(k.v + r * std::sin(theta), std::min(k.v, 0.0), std::max(k.v, y_max));
      }
      p.keypoints.push_back(s);
    }
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

struct ImageWork {
  std::vector<std::size_t> gts;    // annotation indices
  std::vector<std::size_t> preds;  // prediction indices
  Canvas canvas;
  // Similarity matrices, row = local prediction, column = local GT.
  std::vector<double> bbox_iou;
  std::vector<double> mask_iou;
  std::vector<double> oks;
  std::vector<MatchPair> pairs;  // local indices
  std::vector<double> iou_clip;  // per pair
  std::vector<double> iou_full;
};

void process_image(ImageWork& w, const CocoDataset& gt, const PredictionSet& preds,
                   const std::unordered_map<std::int64_t, ManifoldKind>& kinds,
                   const EvalConfig& config) {
  const std::size_t np = w.preds.size();
  const std::size_t ng = w.gts.size();
  w.bbox_iou.assign(np * ng, 0.0);
  w.mask_iou.assign(np * ng, 0.0);
  w.oks.assign(np * ng, 0.0);
  for (std::size_t i = 0; i < np; ++i) {
    const Prediction& p = preds[w.preds[i]];
    for (std::size_t j = 0; j < ng; ++j) {
      const CocoAnnotation& a = gt.annotations[w.gts[j]];
      w.bbox_iou[i * ng + j] = iou_bbox(p.bbox, a.bbox);
      if (p.segmentation) w.mask_iou[i * ng + j] = rle_iou(*p.segmentation, a.segmentation);
      if (p.keypoints.size() == a.keypoints.size()) {
        w.oks[i * ng + j] = oks(p.keypoints, a.keypoints, static_cast<double>(a.area), config.oks_kappa);
      }
    }
  }

  std::vector<std::span<const Keypoint2D>> gt_kps;
  for (auto j : w.gts) gt_kps.emplace_back(gt.annotations[j].keypoints);
  std::vector<std::span<const ScoredKeypoint>> pred_kps;
  for (auto i : w.preds) pred_kps.emplace_back(preds[i].keypoints);
  w.pairs = match_instances(gt_kps, pred_kps);
  for (const auto& pair : w.pairs) {
    const CocoAnnotation& a = gt.annotations[w.gts[pair.gt]];
    const ManifoldKind kind = kinds.at(a.category_id);
    const auto& pk = preds[w.preds[pair.pred]].keypoints;
    w.iou_clip.push_back(manifold_iou(a.keypoints, kind, pk, IouMode::kClip, config.stroke_px, w.canvas));
    w.iou_full.push_back(manifold_iou(a.keypoints, kind, pk, IouMode::kFull, config.stroke_px, w.canvas));
  }
}

std::optional<MeanStd> scaled(std::optional<MeanStd> v, double s) {
  if (v) {
    v->mean *= s;
    v->std *= s;
  }
  return v;
}

EvalReport evaluate_impl(const CocoDataset& gt, const PredictionSet& preds, const EvalConfig& config,
                         bool parallel) {
  config.validate();
  std::unordered_map<std::int64_t, ManifoldKind> kinds;
  for (const auto& c : gt.categories) kinds[c.id] = c.manifold_kind;

  std::unordered_map<std::int64_t, std::size_t> image_slot;
  std::vector<ImageWork> work(gt.images.size());
  for (std::size_t s = 0; s < gt.images.size(); ++s) {
    image_slot[gt.images[s].id] = s;
    work[s].canvas = {gt.images[s].width, gt.images[s].height};
  }
  std::vector<std::pair<std::size_t, std::size_t>> gt_loc(gt.annotations.size());
  for (std::size_t j = 0; j < gt.annotations.size(); ++j) {
    const auto slot = image_slot.at(gt.annotations[j].image_id);
    gt_loc[j] = {slot, work[slot].gts.size()};
    work[slot].gts.push_back(j);
  }
  std::vector<std::pair<std::size_t, std::size_t>> pred_loc(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto it = image_slot.find(preds[i].image_id);
    if (it == image_slot.end()) {
      throw SchemaError("[" + std::to_string(i) + "].image_id", "unknown image id");
    }
    if (!kinds.contains(preds[i].category_id)) {
      throw SchemaError("[" + std::to_string(i) + "].category_id", "unknown category id");
    }
    pred_loc[i] = {it->second, work[it->second].preds.size()};
    work[it->second].preds.push_back(i);
  }

  const auto n_images = static_cast<std::int64_t>(work.size());
  if (parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t s = 0; s < n_images; ++s) {
      try {
        process_image(work[static_cast<std::size_t>(s)], gt, preds, kinds, config);
      } catch (...) {
#pragma omp critical(graspme_eval_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (auto& w : work) process_image(w, gt, preds, kinds, config);
  }

  EvalReport report;
  report.config = config;
  report.num_gt = gt.annotations.size();
  report.num_predictions = preds.size();

  std::vector<ApItem> gt_items;
  for (const auto& a : gt.annotations) gt_items.push_back({a.image_id, a.category_id, 0.0});
  std::vector<ApItem> det_items;
  for (const auto& p : preds) det_items.push_back({p.image_id, p.category_id, p.score});

  auto lookup = [&](const std::vector<double> ImageWork::*matrix) {
    return [&, matrix](std::size_t d, std::size_t g) {
      const auto [slot, local_p] = pred_loc[d];
      const auto local_g = gt_loc[g].second;
      const ImageWork& w = work[slot];
      return (w.*matrix)[local_p * w.gts.size() + local_g];
    };
  };
  const auto& thresholds = config.iou_thresholds;
  const ApResult bb = coco_ap(gt_items, det_items, lookup(&ImageWork::bbox_iou), thresholds,
                              config.merge_classes);
  const ApResult kp = coco_ap(gt_items, det_items, lookup(&ImageWork::oks), thresholds,
                              config.merge_classes);
  const bool any_mask = std::any_of(preds.begin(), preds.end(),
                                    [](const Prediction& p) { return p.segmentation.has_value(); });
  std::optional<ApResult> seg;
  if (any_mask || preds.empty()) {
    seg = coco_ap(gt_items, det_items, lookup(&ImageWork::mask_iou), thresholds, config.merge_classes);
  }
  report.ap_bb = bb.ap;
  report.ap_kp = kp.ap;
  if (seg) report.ap_seg = seg->ap;

  // Ordered reduction over images.
  std::vector<double> clip, full, dist;
  std::map<std::int64_t, std::vector<double>> cat_clip, cat_full, cat_dist;
  for (const auto& w : work) {
    for (std::size_t k = 0; k < w.pairs.size(); ++k) {
      const auto cat = gt.annotations[w.gts[w.pairs[k].gt]].category_id;
      clip.push_back(w.iou_clip[k]);
      full.push_back(w.iou_full[k]);
      dist.push_back(w.pairs[k].distance);
      cat_clip[cat].push_back(w.iou_clip[k]);
      cat_full[cat].push_back(w.iou_full[k]);
      cat_dist[cat].push_back(w.pairs[k].distance);
    }
  }
  report.num_matched = dist.size();
  report.match_rate = report.num_gt == 0 ? 0.0
                                          : static_cast<double>(report.num_matched) /
                                                static_cast<double>(report.num_gt);
  report.iou_clip = scaled(mean_std(clip), 100.0);
  report.iou_full = scaled(mean_std(full), 100.0);
  report.mdist = mean_std(dist);

  std::map<std::int64_t, std::size_t> gt_per_cat;
  for (const auto& a : gt.annotations) ++gt_per_cat[a.category_id];
  for (const auto& c : gt.categories) {
    CategoryReport cr;
    cr.id = c.id;
    cr.name = c.name;
    cr.gt_count = gt_per_cat[c.id];
    if (!config.merge_classes) {
      if (auto it = bb.per_category.find(c.id); it != bb.per_category.end()) cr.ap_bb = it->second;
      if (auto it = kp.per_category.find(c.id); it != kp.per_category.end()) cr.ap_kp = it->second;
      if (seg) {
        if (auto it = seg->per_category.find(c.id); it != seg->per_category.end()) cr.ap_seg = it->second;
      }
    }
    cr.iou_clip = scaled(mean_std(cat_clip[c.id]), 100.0);
    cr.iou_full = scaled(mean_std(cat_full[c.id]), 100.0);
    cr.mdist = mean_std(cat_dist[c.id]);
    report.per_category.push_back(std::move(cr));
  }
  return report;
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json opt_json(const std::optional<MeanStd>& v) {
  if (!v) return nullptr;
  return {{"mean", v->mean}, {"std", v->std}};
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", *v);
  return buf;
}

std::string cell(const std::optional<MeanStd>& v, int decimals) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f +- %.*f", decimals, v->mean, decimals, v->std);
  return buf;
}

}  // namespace

EvalReport evaluate(const CocoDataset& gt, const PredictionSet& preds, const EvalConfig& config) {
  return evaluate_impl(gt, preds, config, true);
}

EvalReport evaluate_serial(const CocoDataset& gt, const PredictionSet& preds,
                           const EvalConfig& config) {
  return evaluate_impl(gt, preds, config, false);
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::json doc;
  doc["ap_bb"] = opt_json(r.ap_bb);
  doc["ap_seg"] = opt_json(r.ap_seg);
  doc["ap_kp"] = opt_json(r.ap_kp);
  doc["iou_clip"] = opt_json(r.iou_clip);
  doc["iou_full"] = opt_json(r.iou_full);
  doc["mdist"] = opt_json(r.mdist);
  doc["num_gt"] = r.num_gt;
  doc["num_predictions"] = r.num_predictions;
  doc["num_matched"] = r.num_matched;
  doc["match_rate"] = r.match_rate;
  doc["config"] = {{"iou_thresholds", r.config.iou_thresholds},
                   {"oks_kappa", r.config.oks_kappa},
                   {"stroke_px", r.config.stroke_px},
                   {"merge_classes", r.config.merge_classes}};
  doc["per_category"] = nlohmann::json::array();
  for (const auto& c : r.per_category) {
    doc["per_category"].push_back({{"id", c.id},
                                   {"name", c.name},
                                   {"gt_count", c.gt_count},
                                   {"ap_bb", opt_json(c.ap_bb)},
                                   {"ap_seg", opt_json(c.ap_seg)},
                                   {"ap_kp", opt_json(c.ap_kp)},
                                   {"iou_clip", opt_json(c.iou_clip)},
                                   {"iou_full", opt_json(c.iou_full)},
                                   {"mdist", opt_json(c.mdist)}});
  }
  return doc.dump(2) + "\n";
}

std::string report_table(const EvalReport& r, const std::string& model_name) {
  const std::vector<std::string> header = {"Model", "AP^bb", "AP^seg", "AP^kp",
                                           "IoU_clip", "IoU_full", "mDist"};
  std::vector<std::vector<std::string>> rows = {header};
  rows.push_back({model_name, cell(r.ap_bb), cell(r.ap_seg), cell(r.ap_kp), cell(r.iou_clip, 1),
                  cell(r.iou_full, 1), cell(r.mdist, 2)});
  for (const auto& c : r.per_category) {
    if (c.gt_count == 0) continue;
    rows.push_back({"  " + c.name, cell(c.ap_bb), cell(c.ap_seg), cell(c.ap_kp),
                    cell(c.iou_clip, 1), cell(c.iou_full, 1), cell(c.mdist, 2)});
  }
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::ostringstream out;
  for (std::size_t r_i = 0; r_i < rows.size(); ++r_i) {
    for (std::size_t i = 0; i < rows[r_i].size(); ++i) {
      const auto& s = rows[r_i][i];
      if (i == 0) {
        out << s << std::string(widths[i] - s.size(), ' ');
      } else {
        out << "  " << std::string(widths[i] - s.size(), ' ') << s;
      }
    }
    out << '\n';
    if (r_i == 0) {
      std::size_t total = widths[0];
      for (std::size_t i = 1; i < widths.size(); ++i) total += widths[i] + 2;
      out << std::string(total, '-') << '\n';
    }
  }
  char summary[128];
  std::snprintf(summary, sizeof(summary), "matched %zu / %zu GT objects (%.1f%%), stroke %.0f px\n",
                r.num_matched, r.num_gt, 100.0 * r.match_rate, r.config.stroke_px);
  out << summary;
  return out.str();
}

}  // namespace graspme
