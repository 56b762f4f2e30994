#include "segeval/dataset_io.hpp"

#include "segeval/png_io.hpp"
#include "segeval/polygon.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace segeval {

using nlohmann::json;

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

std::string frame_id_from_file_name(const std::string& file_name) {
  const auto dot = file_name.rfind('.');
  return dot == std::string::npos ? file_name : file_name.substr(0, dot);
}

json transform_to_json(const TransformSpec& t) {
  switch (t.kind) {
    case TransformKind::identity: return {{"kind", "identity"}};
    case TransformKind::rotation: return {{"kind", "rotation"}, {"deg", t.rotation_deg}};
    case TransformKind::scale: return {{"kind", "scale"}, {"factor", t.scale_factor}};
    case TransformKind::translation:
      return {{"kind", "translation"}, {"u", t.shift_x_frac}, {"v", t.shift_y_frac}};
    case TransformKind::mirror:
      return {{"kind", "mirror"},
              {"axis", t.mirror_axis == MirrorAxis::horizontal ? "horizontal" : "vertical"}};
    case TransformKind::blur: return {{"kind", "blur"}, {"sigma", t.blur_sigma}};
  }
  throw std::runtime_error("unknown transform kind");
}

TransformSpec transform_from_json(const json& j) {
  const std::string kind = j.at("kind");
  if (kind == "identity") return TransformSpec::identity();
  if (kind == "rotation") return TransformSpec::rotation(j.at("deg"));
  if (kind == "scale") return TransformSpec::scale(j.at("factor"));
  if (kind == "translation") return TransformSpec::translation(j.at("u"), j.at("v"));
  if (kind == "mirror")
    return TransformSpec::mirror(j.at("axis") == "horizontal" ? MirrorAxis::horizontal
                                                              : MirrorAxis::vertical);
  if (kind == "blur") return TransformSpec::blur(j.at("sigma"));
  throw std::runtime_error("unknown transform kind: " + kind);
}

// RLE object, COCO polygon array, or {"png": path}.
RleMask segmentation_from_json(const json& seg, int width, int height,
                               const std::filesystem::path& root, const std::string& where) {
  if (seg.is_array()) {
    std::vector<Polygon> rings;
    for (const auto& ring : seg) {
      if (!ring.is_array() || ring.size() < 6 || ring.size() % 2 != 0)
        throw std::runtime_error(where + ": malformed polygon ring");
      Polygon p;
      for (std::size_t i = 0; i < ring.size(); i += 2)
        p.vertices.push_back({ring[i].get<double>(), ring[i + 1].get<double>()});
      rings.push_back(std::move(p));
    }
    // COCO multi-ring polygons are a union of parts.
    Mask acc = Mask::Zero(height, width);
    for (const auto& ring : rings) {
      const Mask part = polygon_to_mask(ring, width, height);
      acc = (acc != 0 || part != 0).cast<std::uint8_t>();
    }
    return rle_encode(acc);
  }
  if (seg.is_object() && seg.contains("counts")) {
    RleMask rle;
    const auto& size = seg.at("size");
    rle.height = size.at(0);
    rle.width = size.at(1);
    rle.counts = seg.at("counts").get<std::vector<std::int64_t>>();
    rle_decode(rle);  // validates the run sums
    return rle;
  }
  if (seg.is_object() && seg.contains("png")) {
    const std::filesystem::path path = root / seg.at("png").get<std::string>();
    if (!std::filesystem::exists(path))
      throw std::runtime_error(where + ": missing mask file: " + path.string());
    return rle_encode(read_mask_png(path.string()));
  }
  throw std::runtime_error(where + ": unsupported segmentation encoding");
}

json segmentation_to_json(const RleMask& rle) {
  return {{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

Taxonomy taxonomy_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw std::runtime_error(where + ": categories must be an array");
  Taxonomy tax;
  for (const auto& c : arr) tax.push_back({c.at("id").get<CategoryId>(), c.at("name")});
  return tax;
}

json taxonomy_to_json(const Taxonomy& tax) {
  json arr = json::array();
  for (const auto& c : tax) arr.push_back({{"id", c.id}, {"name", c.name}});
  return arr;
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  DatasetManifest m;
  if (j.contains("root")) {
    const std::filesystem::path r = j.at("root").get<std::string>();
    m.root = r.is_relative() ? path.parent_path() / r : r;
  } else {
    m.root = path.parent_path();
  }
  m.version = j.value("version", std::string(kFormatVersion));
  if (m.version != kFormatVersion)
    throw std::runtime_error("unrecognized manifest version: " + m.version);
  m.annotations = j.value("annotations", std::string("annotations.json"));
  m.images = j.value("images", std::string("images"));
  if (j.contains("taxonomy")) m.taxonomy = std::filesystem::path(j.at("taxonomy").get<std::string>());
  if (!std::filesystem::exists(m.annotations_path()))
    throw std::runtime_error("manifest references missing annotation file: " +
                             m.annotations_path().string());
  if (m.taxonomy && !std::filesystem::exists(m.root / *m.taxonomy))
    throw std::runtime_error("manifest references missing taxonomy file: " +
                             (m.root / *m.taxonomy).string());
  return m;
}

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  json j;
  j["version"] = m.version;
  j["annotations"] = m.annotations.generic_string();
  j["images"] = m.images.generic_string();
  if (m.taxonomy) j["taxonomy"] = m.taxonomy->generic_string();
  write_file_atomic(path, j.dump(2) + "\n");
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  return taxonomy_from_json(read_json_file(path), path.string());
}

void save_taxonomy(const Taxonomy& tax, const std::filesystem::path& path) {
  write_file_atomic(path, taxonomy_to_json(tax).dump(2) + "\n");
}

Dataset load_dataset(const DatasetManifest& manifest, const LoadOptions& opts) {
  const json j = read_json_file(manifest.annotations_path());
  Dataset ds;
  ds.taxonomy = manifest.taxonomy ? load_taxonomy(manifest.root / *manifest.taxonomy)
                                  : taxonomy_from_json(j.value("categories", json::array()),
                                                       manifest.annotations_path().string());

  const json vendor = j.value("vendor", json::object());
  const json split_map = vendor.value("split", json::object());
  const json prov_map = vendor.value("provenance", json::object());

  std::map<std::int64_t, std::size_t> frame_by_coco_id;
  for (const auto& img : j.value("images", json::array())) {
    AnnotatedFrame frame;
    const std::string file_name = img.at("file_name");
    frame.frame_id = frame_id_from_file_name(file_name);
    frame.width = img.at("width");
    frame.height = img.at("height");
    frame.image_ref = (manifest.image_dir() / file_name).string();
    if (opts.check_images && !std::filesystem::exists(frame.image_ref))
      throw std::runtime_error("annotation references missing image file: " + frame.image_ref);
    if (split_map.contains(frame.frame_id)) {
      const auto s = split_from_name(split_map.at(frame.frame_id));
      if (!s) throw std::runtime_error("unknown split tag for frame " + frame.frame_id);
      frame.split = s;
    }
    if (prov_map.contains(frame.frame_id))
      for (const auto& t : prov_map.at(frame.frame_id))
        frame.provenance.push_back(transform_from_json(t));
    frame_by_coco_id[img.at("id").get<std::int64_t>()] = ds.frames.size();
    ds.frames.push_back(std::move(frame));
  }

  for (const auto& ann : j.value("annotations", json::array())) {
    const std::int64_t image_id = ann.at("image_id");
    const auto it = frame_by_coco_id.find(image_id);
    if (it == frame_by_coco_id.end())
      throw std::runtime_error("annotation references unknown image id " +
                               std::to_string(image_id));
    AnnotatedFrame& frame = ds.frames[it->second];
    const std::string where = "annotation for frame " + frame.frame_id;
    RleMask rle = segmentation_from_json(ann.at("segmentation"), frame.width, frame.height,
                                         manifest.root, where);
    frame.instances.push_back(
        InstanceMask::from_rle(ann.at("category_id").get<CategoryId>(), std::move(rle)));
  }

  const auto violations = validate_dataset(ds);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "dataset failed validation (" << violations.size() << " violations):";
    for (std::size_t i = 0; i < violations.size() && i < 10; ++i)
      msg << "\n  [" << violations[i].rule << "] " << violations[i].frame_id << " "
          << violations[i].detail;
    throw std::runtime_error(msg.str());
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& manifest_or_annotations,
                     const LoadOptions& opts) {
  const json j = read_json_file(manifest_or_annotations);
  if (j.contains("images") && j.at("images").is_array()) {
    DatasetManifest m;
    m.root = manifest_or_annotations.parent_path();
    m.annotations = manifest_or_annotations.filename();
    m.images = "images";
    LoadOptions bare = opts;
    return load_dataset(m, bare);
  }
  return load_dataset(load_manifest(manifest_or_annotations), opts);
}

Dataset canonicalized(Dataset ds) {
  std::sort(ds.frames.begin(), ds.frames.end(),
            [](const AnnotatedFrame& a, const AnnotatedFrame& b) {
              return a.frame_id < b.frame_id;
            });
  for (auto& frame : ds.frames) {
    std::stable_sort(frame.instances.begin(), frame.instances.end(),
                     [](const InstanceMask& a, const InstanceMask& b) {
                       return std::tie(a.category, a.bbox.x, a.bbox.y) <
                              std::tie(b.category, b.bbox.x, b.bbox.y);
                     });
  }
  return ds;
}

std::string dataset_to_json_string(const Dataset& ds) {
  const Dataset canon = canonicalized(ds);
  json j;
  j["info"] = {{"version", kFormatVersion}};
  j["categories"] = taxonomy_to_json(canon.taxonomy);
  json images = json::array();
  json annotations = json::array();
  json split_map = json::object();
  json prov_map = json::object();
  std::int64_t next_ann_id = 1;
  for (std::size_t i = 0; i < canon.frames.size(); ++i) {
    const auto& frame = canon.frames[i];
    const std::int64_t image_id = static_cast<std::int64_t>(i) + 1;
    images.push_back({{"id", image_id},
                      {"file_name", frame.frame_id + ".png"},
                      {"width", frame.width},
                      {"height", frame.height}});
    for (const auto& inst : frame.instances) {
      annotations.push_back({{"id", next_ann_id++},
                             {"image_id", image_id},
                             {"category_id", inst.category},
                             {"segmentation", segmentation_to_json(inst.mask)},
                             {"area", inst.area},
                             {"bbox", {inst.bbox.x, inst.bbox.y, inst.bbox.w, inst.bbox.h}},
                             {"iscrowd", 0}});
    }
    if (frame.split) split_map[frame.frame_id] = split_name(*frame.split);
    if (!frame.provenance.empty()) {
      json chain = json::array();
      for (const auto& t : frame.provenance) chain.push_back(transform_to_json(t));
      prov_map[frame.frame_id] = std::move(chain);
    }
  }
  j["images"] = std::move(images);
  j["annotations"] = std::move(annotations);
  json vendor = json::object();
  if (!split_map.empty()) vendor["split"] = std::move(split_map);
  if (!prov_map.empty()) vendor["provenance"] = std::move(prov_map);
  if (!vendor.empty()) j["vendor"] = std::move(vendor);
  return j.dump(2) + "\n";
}

void save_dataset(const Dataset& ds, const DatasetManifest& manifest) {
  std::filesystem::create_directories(manifest.root);
  write_file_atomic(manifest.annotations_path(), dataset_to_json_string(ds));
  if (manifest.taxonomy) save_taxonomy(ds.taxonomy, manifest.root / *manifest.taxonomy);
}

PredictionSet load_predictions(const std::filesystem::path& path, const Dataset& gt) {
  const json j = read_json_file(path);
  if (!j.is_array()) throw std::runtime_error("predictions must be a JSON array");

  std::map<std::string, const AnnotatedFrame*> frames;
  for (const auto& f : gt.frames) frames[f.frame_id] = &f;
  std::set<CategoryId> categories;
  for (const auto& c : gt.taxonomy) categories.insert(c.id);

  PredictionSet preds;
  for (const auto& p : j) {
    const std::string frame_id = p.at("frame_id");
    const auto it = frames.find(frame_id);
    if (it == frames.end())
      throw std::runtime_error("prediction references unknown frame id: " + frame_id);
    if (!p.contains("score"))
      throw std::runtime_error("prediction for frame " + frame_id + " is missing a score");
    const double score = p.at("score");
    if (score < 0 || score > 1)
      throw std::runtime_error("prediction score out of [0,1] for frame " + frame_id);
    const CategoryId category = p.at("category_id");
    if (!categories.count(category))
      throw std::runtime_error("prediction uses unknown category " + std::to_string(category) +
                               " for frame " + frame_id);
    RleMask rle = segmentation_from_json(p.at("segmentation"), it->second->width,
                                         it->second->height, path.parent_path(),
                                         "prediction for frame " + frame_id);
    if (rle.width != it->second->width || rle.height != it->second->height)
      throw std::runtime_error("prediction mask dimensions do not match frame " + frame_id);
    auto inst = InstanceMask::from_rle(category, std::move(rle), score);
    if (inst.area < 1)
      throw std::runtime_error("prediction mask is empty for frame " + frame_id);
    preds[frame_id].push_back(std::move(inst));
  }
  return preds;
}

void save_predictions(const PredictionSet& preds, const std::filesystem::path& path) {
  json arr = json::array();
  for (const auto& [frame_id, instances] : preds)
    for (const auto& inst : instances)
      arr.push_back({{"frame_id", frame_id},
                     {"category_id", inst.category},
                     {"score", inst.score.value_or(-1)},
                     {"segmentation", segmentation_to_json(inst.mask)}});
  write_file_atomic(path, arr.dump(2) + "\n");
}

std::int64_t prediction_count(const PredictionSet& preds) {
  std::int64_t n = 0;
  for (const auto& [id, v] : preds) n += static_cast<std::int64_t>(v.size());
  return n;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write: " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace segeval
