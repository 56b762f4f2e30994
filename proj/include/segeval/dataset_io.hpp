#pragma once

#include "segeval/model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace segeval {

inline constexpr const char* kFormatVersion = "segeval/1";

// Points at the files of one dataset. Relative paths resolve against root.
struct DatasetManifest {
  std::filesystem::path root;
  std::filesystem::path annotations = "annotations.json";
  std::filesystem::path images = "images";
  std::optional<std::filesystem::path> taxonomy;
  std::string version = kFormatVersion;

  std::filesystem::path annotations_path() const { return root / annotations; }
  std::filesystem::path image_dir() const { return root / images; }
};

struct LoadOptions {
  bool check_images = true;  // require referenced image files to exist
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);

Taxonomy load_taxonomy(const std::filesystem::path& path);
void save_taxonomy(const Taxonomy& tax, const std::filesystem::path& path);

// Accepts either a manifest.json or a bare annotations file (detected by its
// "images" array). Masks may be stored as RLE, COCO polygons, or per-instance
// PNG references; all are materialized to RLE. The result passes
// validate_dataset or loading fails listing the violations.
Dataset load_dataset(const DatasetManifest& manifest, const LoadOptions& opts = {});
Dataset load_dataset(const std::filesystem::path& manifest_or_annotations,
                     const LoadOptions& opts = {});

// Canonical serialization: frames sorted by frame_id, instances by
// (category, bbox.x, bbox.y), masks as RLE. Equal datasets produce
// byte-identical files. Writes are atomic (temp file + rename).
void save_dataset(const Dataset& ds, const DatasetManifest& manifest);

// Canonical annotation JSON as a string (what save_dataset writes).
std::string dataset_to_json_string(const Dataset& ds);

// Returns a copy with canonical frame and instance order.
Dataset canonicalized(Dataset ds);

// Scored instances per frame id, in file order.
using PredictionSet = std::map<std::string, std::vector<InstanceMask>>;

// Predictions must reference frames of gt, carry a score in [0,1], and use a
// category from the gt taxonomy.
PredictionSet load_predictions(const std::filesystem::path& path, const Dataset& gt);
void save_predictions(const PredictionSet& preds, const std::filesystem::path& path);

std::int64_t prediction_count(const PredictionSet& preds);

// Atomic text-file write used for every artifact this tool produces.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace segeval
