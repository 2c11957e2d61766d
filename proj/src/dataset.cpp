#include "graspme/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "graspme/error.hpp"
#include "graspme/png_io.hpp"
#include "graspme/rng.hpp"
#include "json.hpp"

namespace graspme {

namespace {

using nlohmann::json;

// Integers verbatim, floats with exactly two decimals, keys sorted.
void dump_canonical(const json& node, std::string& out) {
  switch (node.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = node.begin(); it != node.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += json(it.key()).dump();
        out += ':';
        dump_canonical(it.value(), out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < node.size(); ++i) {
        if (i) out += ',';
        dump_canonical(node[i], out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      char buf[64];
      auto [ptr, ec] =
          std::to_chars(buf, buf + sizeof(buf), node.get<double>(), std::chars_format::fixed, 2);
      if (ec != std::errc()) throw InvalidArgument("canonical JSON: number out of range");
      out.append(buf, ptr);
      break;
    }
    default:
      out += node.dump();
  }
}

std::string at(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }
std::string dot(const std::string& base, const char* key) { return base.empty() ? key : base + "." + key; }

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(dot(path, key), "missing");
  return *it;
}

std::int64_t get_int(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number_integer()) throw SchemaError(dot(path, key), "expected integer");
  return v.get<std::int64_t>();
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected number");
  return v.get<double>();
}

std::string get_string(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw SchemaError(dot(path, key), "expected string");
  return v.get<std::string>();
}

const json& get_array(const json& obj, const char* key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_array()) throw SchemaError(dot(path, key), "expected array");
  return v;
}

BBox parse_bbox(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 4) throw SchemaError(path, "expected [x, y, w, h]");
  BBox b{get_number(v[0], path), get_number(v[1], path), get_number(v[2], path),
         get_number(v[3], path)};
  if (!(b.w >= 0.0 && b.h >= 0.0) || !std::isfinite(b.x) || !std::isfinite(b.y) ||
      !std::isfinite(b.w) || !std::isfinite(b.h)) {
    throw SchemaError(path, "box extent must be finite and non-negative");
  }
  return b;
}

RleMask parse_rle(const json& v, const std::string& path) {
  if (!v.is_object()) throw SchemaError(path, "expected RLE object {size, counts}");
  const json& size = require(v, "size", path);
  if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() ||
      !size[1].is_number_integer()) {
    throw SchemaError(dot(path, "size"), "expected [height, width]");
  }
  RleMask rle;
  rle.height = size[0].get<int>();
  rle.width = size[1].get<int>();
  if (rle.height < 0 || rle.width < 0) throw SchemaError(dot(path, "size"), "negative size");
  const json& counts = get_array(v, "counts", path);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!counts[i].is_number_unsigned() && !(counts[i].is_number_integer() && counts[i].get<std::int64_t>() >= 0)) {
      throw SchemaError(at(dot(path, "counts"), i), "expected non-negative integer");
    }
    const auto c = counts[i].get<std::uint64_t>();
    if (c > 0xffffffffULL) throw SchemaError(at(dot(path, "counts"), i), "run too long");
    rle.counts.push_back(static_cast<std::uint32_t>(c));
    total += c;
  }
  if (total != static_cast<std::uint64_t>(rle.height) * rle.width) {
    throw SchemaError(dot(path, "counts"), "run lengths do not sum to height * width");
  }
  return rle;
}

json rle_json(const RleMask& rle) {
  json counts = json::array();
  for (auto c : rle.counts) counts.push_back(c);
  return {{"size", {rle.height, rle.width}}, {"counts", std::move(counts)}};
}

json bbox_json(const BBox& b) { return {b.x, b.y, b.w, b.h}; }

json parse_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
}

char* format_index(char* buf, std::size_t n, const char* prefix, std::size_t index) {
  std::snprintf(buf, n, "%s_%06zu.png", prefix, index);
  return buf;
}

}  // namespace

int CocoAnnotation::num_keypoints() const {
  return static_cast<int>(
      std::count_if(keypoints.begin(), keypoints.end(), [](const Keypoint2D& k) { return k.flag > 0; }));
}

const CocoCategory* CocoDataset::find_category(std::int64_t id) const {
  for (const auto& c : categories) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

const CocoImage* CocoDataset::find_image(std::int64_t id) const {
  for (const auto& im : images) {
    if (im.id == id) return &im;
  }
  return nullptr;
}

void CocoDataset::validate() const {
  std::unordered_map<std::int64_t, const CocoImage*> image_by_id;
  std::unordered_map<std::int64_t, const CocoCategory*> category_by_id;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!image_by_id.emplace(images[i].id, &images[i]).second) {
      throw SchemaError(at("images", i) + ".id", "duplicate image id");
    }
    if (images[i].width <= 0 || images[i].height <= 0) {
      throw SchemaError(at("images", i), "image size must be positive");
    }
  }
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const auto& c = categories[i];
    if (!category_by_id.emplace(c.id, &c).second) {
      throw SchemaError(at("categories", i) + ".id", "duplicate category id");
    }
    if (c.keypoints.size() < 2) throw SchemaError(at("categories", i) + ".keypoints", "need K >= 2");
    for (const auto& [a, b] : c.skeleton) {
      if (a < 1 || b < 1 || a > c.keypoint_budget() || b > c.keypoint_budget()) {
        throw SchemaError(at("categories", i) + ".skeleton", "index out of range");
      }
    }
  }
  std::set<std::int64_t> annotation_ids;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    const std::string path = at("annotations", i);
    if (!annotation_ids.insert(a.id).second) throw SchemaError(path + ".id", "duplicate annotation id");
    auto im = image_by_id.find(a.image_id);
    if (im == image_by_id.end()) {
      throw SchemaError(path + ".image_id", "references unknown image " + std::to_string(a.image_id));
    }
    auto cat = category_by_id.find(a.category_id);
    if (cat == category_by_id.end()) {
      throw SchemaError(path + ".category_id",
                        "references unknown category " + std::to_string(a.category_id));
    }
    if (a.keypoints.size() != static_cast<std::size_t>(cat->second->keypoint_budget())) {
      throw SchemaError(path + ".keypoints", "expected 3K = " +
                                                 std::to_string(3 * cat->second->keypoint_budget()) +
                                                 " values");
    }
    for (const auto& k : a.keypoints) {
      if (k.flag < 0 || k.flag > 2) throw SchemaError(path + ".keypoints", "visibility must be 0, 1 or 2");
    }
    if (a.segmentation.height != im->second->height || a.segmentation.width != im->second->width) {
      throw SchemaError(path + ".segmentation.size", "does not match image size");
    }
    if (a.segmentation.area() != a.area) throw SchemaError(path + ".area", "differs from mask pixel count");
    if (!(a.bbox.w >= 0.0 && a.bbox.h >= 0.0)) throw SchemaError(path + ".bbox", "negative extent");
  }
}

std::string write_coco(const CocoDataset& dataset) {
  json doc;
  doc["images"] = json::array();
  for (const auto& im : dataset.images) {
    doc["images"].push_back(
        {{"id", im.id}, {"file_name", im.file_name}, {"width", im.width}, {"height", im.height}});
  }
  doc["annotations"] = json::array();
  for (const auto& a : dataset.annotations) {
    json kps = json::array();
    for (const auto& k : a.keypoints) {
      kps.push_back(k.u);
      kps.push_back(k.v);
      kps.push_back(k.flag);
    }
    doc["annotations"].push_back({{"id", a.id},
                                  {"image_id", a.image_id},
                                  {"category_id", a.category_id},
                                  {"bbox", bbox_json(a.bbox)},
                                  {"area", a.area},
                                  {"iscrowd", 0},
                                  {"segmentation", rle_json(a.segmentation)},
                                  {"keypoints", std::move(kps)},
                                  {"num_keypoints", a.num_keypoints()}});
  }
  doc["categories"] = json::array();
  for (const auto& c : dataset.categories) {
    json skeleton = json::array();
    for (const auto& [a, b] : c.skeleton) skeleton.push_back({a, b});
    doc["categories"].push_back({{"id", c.id},
                                 {"name", c.name},
                                 {"keypoints", c.keypoints},
                                 {"skeleton", std::move(skeleton)},
                                 {"manifold_kind", std::string(manifold_kind_name(c.manifold_kind))}});
  }
  std::string out;
  dump_canonical(doc, out);
  out += '\n';
  return out;
}

CocoDataset read_coco(std::string_view text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) throw SchemaError("", "expected a COCO object");
  CocoDataset ds;

  const json& images = get_array(doc, "images", "");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string path = at("images", i);
    const json& v = images[i];
    if (!v.is_object()) throw SchemaError(path, "expected object");
    ds.images.push_back({get_int(v, "id", path), get_string(v, "file_name", path),
                         static_cast<int>(get_int(v, "width", path)),
                         static_cast<int>(get_int(v, "height", path))});
  }

  const json& categories = get_array(doc, "categories", "");
  for (std::size_t i = 0; i < categories.size(); ++i) {
    const std::string path = at("categories", i);
    const json& v = categories[i];
    if (!v.is_object()) throw SchemaError(path, "expected object");
    CocoCategory c;
    c.id = get_int(v, "id", path);
    c.name = get_string(v, "name", path);
    const json& names = get_array(v, "keypoints", path);
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (!names[k].is_string()) throw SchemaError(at(path + ".keypoints", k), "expected string");
      c.keypoints.push_back(names[k].get<std::string>());
    }
    if (v.contains("skeleton")) {
      const json& sk = get_array(v, "skeleton", path);
      for (std::size_t k = 0; k < sk.size(); ++k) {
        if (!sk[k].is_array() || sk[k].size() != 2 || !sk[k][0].is_number_integer() ||
            !sk[k][1].is_number_integer()) {
          throw SchemaError(at(path + ".skeleton", k), "expected [a, b]");
        }
        c.skeleton.emplace_back(sk[k][0].get<int>(), sk[k][1].get<int>());
      }
    }
    if (v.contains("manifold_kind")) {
      try {
        c.manifold_kind = parse_manifold_kind(get_string(v, "manifold_kind", path));
      } catch (const SchemaError& e) {
        throw SchemaError(path + ".manifold_kind", e.what());
      }
    }
    ds.categories.push_back(std::move(c));
  }

  const json& annotations = get_array(doc, "annotations", "");
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const std::string path = at("annotations", i);
    const json& v = annotations[i];
    if (!v.is_object()) throw SchemaError(path, "expected object");
    CocoAnnotation a;
    a.id = get_int(v, "id", path);
    a.image_id = get_int(v, "image_id", path);
    a.category_id = get_int(v, "category_id", path);
    a.bbox = parse_bbox(require(v, "bbox", path), path + ".bbox");
    const std::int64_t area = get_int(v, "area", path);
    if (area < 0) throw SchemaError(path + ".area", "negative");
    a.area = static_cast<std::uint64_t>(area);
    if (v.contains("iscrowd") && get_int(v, "iscrowd", path) != 0) {
      throw SchemaError(path + ".iscrowd", "crowd annotations are not supported");
    }
    a.segmentation = parse_rle(require(v, "segmentation", path), path + ".segmentation");
    const json& kps = get_array(v, "keypoints", path);
    if (kps.size() % 3 != 0) throw SchemaError(path + ".keypoints", "length must be a multiple of 3");
    for (std::size_t k = 0; k < kps.size(); k += 3) {
      const std::string kp_path = at(path + ".keypoints", k);
      if (!kps[k + 2].is_number_integer()) throw SchemaError(kp_path, "visibility must be an integer");
      a.keypoints.push_back({get_number(kps[k], kp_path), get_number(kps[k + 1], kp_path),
                             kps[k + 2].get<int>()});
    }
    if (get_int(v, "num_keypoints", path) != a.num_keypoints()) {
      throw SchemaError(path + ".num_keypoints", "does not match keypoints with v > 0");
    }
    ds.annotations.push_back(std::move(a));
  }
  ds.validate();
  return ds;
}

std::vector<CocoCategory> categories_for(const std::vector<ObjectTemplate>& templates) {
  std::vector<CocoCategory> out;
  for (std::size_t i = 0; i < templates.size(); ++i) {
    const auto& t = templates[i];
    CocoCategory c;
    c.id = static_cast<std::int64_t>(i) + 1;
    c.name = t.category_name;
    for (int k = 1; k <= t.keypoint_budget; ++k) c.keypoints.push_back("kp" + std::to_string(k));
    const int k = static_cast<int>(t.manifold.size());
    for (int j = 1; j < k; ++j) c.skeleton.emplace_back(j, j + 1);
    if (t.manifold.kind() == ManifoldKind::kSurface) c.skeleton.emplace_back(k, 1);
    c.manifold_kind = t.manifold.kind();
    out.push_back(std::move(c));
  }
  return out;
}

std::string rgb_file_name(std::size_t scene_index) {
  char buf[64];
  return format_index(buf, sizeof(buf), "rgb", scene_index);
}

std::string depth_file_name(std::size_t scene_index) {
  char buf[64];
  return format_index(buf, sizeof(buf), "depth", scene_index);
}

std::string seg_file_name(std::size_t scene_index) {
  char buf[64];
  return format_index(buf, sizeof(buf), "seg", scene_index);
}

SceneRecord make_scene_record(std::size_t scene_index, int width, int height,
                              const std::vector<AnnotatedObject>& annotations) {
  SceneRecord rec;
  rec.image = {static_cast<std::int64_t>(scene_index) + 1, "images/" + rgb_file_name(scene_index),
               width, height};
  for (const auto& obj : annotations) {
    CocoAnnotation a;
    a.image_id = rec.image.id;
    a.category_id = static_cast<std::int64_t>(obj.template_index) + 1;
    a.bbox = obj.bbox;
    a.segmentation = encode_rle(obj.mask);
    a.area = a.segmentation.area();
    a.keypoints = obj.keypoints;
    rec.annotations.push_back(std::move(a));
  }
  return rec;
}

std::uint16_t depth_to_millimeters(double depth_m) {
  if (!(depth_m < 65.535)) return 65535;
  return static_cast<std::uint16_t>(std::lround(std::max(0.0, depth_m) * 1000.0));
}

SceneRecord emit_scene(const FrameBuffers& buffers, const std::vector<AnnotatedObject>& annotations,
                       const std::filesystem::path& out_dir, std::size_t scene_index) {
  const std::size_t n = static_cast<std::size_t>(buffers.width) * buffers.height;
  Image8 seg{buffers.width, buffers.height, 1, std::vector<std::uint8_t>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = buffers.instance_id[i];
    if (id < 0 || id > 255) {
      throw InvalidArgument("emit_scene: instance id " + std::to_string(id) + " exceeds 8-bit range");
    }
    seg.data[i] = static_cast<std::uint8_t>(id);
  }
  Image16 depth{buffers.width, buffers.height, std::vector<std::uint16_t>(n)};
  for (std::size_t i = 0; i < n; ++i) depth.data[i] = depth_to_millimeters(buffers.depth[i]);

  const auto dir = out_dir / "images";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_png(dir / rgb_file_name(scene_index), Image8{buffers.width, buffers.height, 3, buffers.rgb});
  write_png16(dir / depth_file_name(scene_index), depth);
  write_png(dir / seg_file_name(scene_index), seg);
  return make_scene_record(scene_index, buffers.width, buffers.height, annotations);
}

Split split_dataset(std::size_t n_scenes, std::uint64_t seed) {
  if (n_scenes < 10) throw InvalidArgument("split_dataset: need at least 10 scenes");
  std::vector<std::size_t> perm(n_scenes);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n_scenes - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
    std::swap(perm[i], perm[j]);
  }
  const std::size_t tenth = n_scenes / 10;
  Split split;
  split.val.assign(perm.begin(), perm.begin() + tenth);
  split.test.assign(perm.begin() + tenth, perm.begin() + 2 * tenth);
  split.train.assign(perm.begin() + 2 * tenth, perm.end());
  return split;
}

CocoDataset assemble_split(const std::vector<SceneRecord>& records,
                           const std::vector<std::size_t>& scene_indices,
                           std::vector<CocoCategory> categories) {
  CocoDataset ds;
  ds.categories = std::move(categories);
  std::int64_t next_id = 1;
  for (auto idx : scene_indices) {
    const auto& rec = records.at(idx);
    ds.images.push_back(rec.image);
    for (auto a : rec.annotations) {
      a.id = next_id++;
      ds.annotations.push_back(std::move(a));
    }
  }
  return ds;
}

PredictionSet read_predictions(std::string_view text, const CocoDataset& gt) {
  const json doc = parse_document(text);
  if (!doc.is_array()) throw SchemaError("", "expected an array of predictions");
  std::unordered_map<std::int64_t, const CocoImage*> images;
  for (const auto& im : gt.images) images.emplace(im.id, &im);

  PredictionSet out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = at("", i);
    const json& v = doc[i];
    if (!v.is_object()) throw SchemaError(path, "expected object");
    Prediction p;
    p.image_id = get_int(v, "image_id", path);
    auto im = images.find(p.image_id);
    if (im == images.end()) {
      throw SchemaError(path + ".image_id", "unknown image id " + std::to_string(p.image_id));
    }
    p.category_id = get_int(v, "category_id", path);
    const CocoCategory* cat = gt.find_category(p.category_id);
    if (!cat) throw SchemaError(path + ".category_id", "unknown category id " + std::to_string(p.category_id));

    const json& score = require(v, "score", path);
    if (!score.is_number() || !std::isfinite(score.get<double>())) {
      throw SchemaError(path + ".score", "score must be a finite number");
    }
    p.score = score.get<double>();
    if (p.score < 0.0 || p.score > 1.0) throw SchemaError(path + ".score", "score must lie in [0, 1]");

    p.bbox = parse_bbox(require(v, "bbox", path), path + ".bbox");
    if (v.contains("segmentation") && !v["segmentation"].is_null()) {
      p.segmentation = parse_rle(v["segmentation"], path + ".segmentation");
      if (p.segmentation->height != im->second->height || p.segmentation->width != im->second->width) {
        throw SchemaError(path + ".segmentation.size", "does not match image size");
      }
    }
    const json& kps = get_array(v, "keypoints", path);
    const std::size_t expected = 3 * static_cast<std::size_t>(cat->keypoint_budget());
    if (kps.size() != expected) {
      throw SchemaError(path + ".keypoints", "expected " + std::to_string(expected) +
                                                 " values (3K), got " + std::to_string(kps.size()));
    }
    for (std::size_t k = 0; k < kps.size(); k += 3) {
      const std::string kp_path = at(path + ".keypoints", k);
      ScoredKeypoint kp{get_number(kps[k], kp_path), get_number(kps[k + 1], kp_path),
                        get_number(kps[k + 2], kp_path)};
      if (!std::isfinite(kp.u) || !std::isfinite(kp.v) || !std::isfinite(kp.confidence)) {
        throw SchemaError(kp_path, "keypoint values must be finite");
      }
      p.keypoints.push_back(kp);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::string write_predictions(const PredictionSet& predictions) {
  json doc = json::array();
  for (const auto& p : predictions) {
    json kps = json::array();
    for (const auto& k : p.keypoints) {
      kps.push_back(k.u);
      kps.push_back(k.v);
      kps.push_back(k.confidence);
    }
    json rec = {{"image_id", p.image_id},
                {"category_id", p.category_id},
                {"score", p.score},
                {"bbox", bbox_json(p.bbox)},
                {"keypoints", std::move(kps)}};
    if (p.segmentation) rec["segmentation"] = rle_json(*p.segmentation);
    doc.push_back(std::move(rec));
  }
  return doc.dump() + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace graspme
