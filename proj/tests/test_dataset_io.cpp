#include "segeval/dataset_io.hpp"

#include "segeval/eval.hpp"
#include "segeval/png_io.hpp"
#include "segeval/polygon.hpp"
#include "segeval/rng.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>

namespace {

using namespace segeval;
namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "segeval_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Mask blob(int w, int h, int x0, int y0, int bw, int bh) {
  Mask m = Mask::Zero(h, w);
  m.block(y0, x0, bh, bw).setConstant(1);
  return m;
}

Dataset synthetic_dataset() {
  Dataset ds;
  ds.taxonomy = default_taxonomy();
  CounterRng rng(17);
  for (int i = 0; i < 3; ++i) {
    AnnotatedFrame f;
    f.frame_id = "f00" + std::to_string(i);
    f.width = 48;
    f.height = 36;
    const int n = 1 + i % 2;
    for (int k = 0; k < n; ++k) {
      const int x = static_cast<int>(rng.uniform_int(0, 30));
      const int y = static_cast<int>(rng.uniform_int(0, 20));
      f.instances.push_back(
          InstanceMask::from_dense(1 + (i + k) % 12, blob(48, 36, x, y, 8, 6)));
    }
    ds.frames.push_back(f);
  }
  ds.frames[0].split = Split::train;
  ds.frames[1].split = Split::val;
  ds.frames[2].split = Split::test;
  ds.frames[1].provenance.push_back(TransformSpec::rotation(90));
  return ds;
}

}  // namespace

TEST_CASE("dataset save/load round trip") {
  const fs::path dir = fresh_dir("roundtrip");
  const Dataset ds = synthetic_dataset();

  DatasetManifest manifest;
  manifest.root = dir;
  save_dataset(ds, manifest);
  save_manifest(manifest, dir / "manifest.json");

  LoadOptions opts;
  opts.check_images = false;
  const Dataset back = load_dataset(dir / "manifest.json", opts);
  CHECK(back.frames.size() == ds.frames.size());
  CHECK(back.taxonomy == ds.taxonomy);

  const Dataset canon = canonicalized(ds);
  for (std::size_t i = 0; i < canon.frames.size(); ++i) {
    const auto& a = canon.frames[i];
    const auto& b = back.frames[i];
    CHECK(a.frame_id == b.frame_id);
    CHECK(a.width == b.width);
    CHECK(a.split == b.split);
    CHECK(a.provenance.size() == b.provenance.size());
    REQUIRE(a.instances.size() == b.instances.size());
    for (std::size_t k = 0; k < a.instances.size(); ++k) {
      CHECK(a.instances[k].category == b.instances[k].category);
      CHECK(a.instances[k].mask == b.instances[k].mask);
      CHECK(a.instances[k].bbox == b.instances[k].bbox);
    }
  }

  // Saving twice, and re-saving the loaded copy, is byte-identical.
  const std::string bytes1 = slurp(dir / "annotations.json");
  save_dataset(ds, manifest);
  CHECK(slurp(dir / "annotations.json") == bytes1);
  save_dataset(back, manifest);
  CHECK(slurp(dir / "annotations.json") == bytes1);

  // A relative manifest path resolves against the manifest's directory.
  std::error_code ec;
  const fs::path rel = fs::relative(dir / "manifest.json", fs::current_path(), ec);
  if (!ec && !rel.empty() && rel.is_relative()) {
    const Dataset via_rel = load_dataset(rel, opts);
    CHECK(via_rel.frames.size() == ds.frames.size());
  }
}

TEST_CASE("missing image file fails the load with the path") {
  const fs::path dir = fresh_dir("missing_image");
  const Dataset ds = synthetic_dataset();
  DatasetManifest manifest;
  manifest.root = dir;
  save_dataset(ds, manifest);
  save_manifest(manifest, dir / "manifest.json");
  try {
    load_dataset(dir / "manifest.json");  // default: images must exist
    FAIL("expected a load error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("f000.png") != std::string::npos);
  }
}

TEST_CASE("polygon and png segmentations load to the same masks as rle") {
  const fs::path dir = fresh_dir("encodings");
  fs::create_directories(dir / "masks");

  // A 10x8 rectangle at (3,2) in three encodings.
  const Mask dense = blob(32, 24, 3, 2, 10, 8);
  write_mask_png((dir / "masks" / "f000_0.png").string(), dense);
  const RleMask rle = rle_encode(dense);

  nlohmann::json j;
  j["categories"] = {{{"id", 1}, {"name", "Instrument"}}};
  j["images"] = {{{"id", 1}, {"file_name", "f000.png"}, {"width", 32}, {"height", 24}}};
  j["annotations"] = nlohmann::json::array();
  j["annotations"].push_back({{"id", 1},
                              {"image_id", 1},
                              {"category_id", 1},
                              {"segmentation", {{"size", {24, 32}}, {"counts", rle.counts}}}});
  j["annotations"].push_back(
      {{"id", 2},
       {"image_id", 1},
       {"category_id", 1},
       {"segmentation", {{3, 2, 13, 2, 13, 10, 3, 10}}}});  // COCO polygon ring
  j["annotations"].push_back({{"id", 3},
                              {"image_id", 1},
                              {"category_id", 1},
                              {"segmentation", {{"png", "masks/f000_0.png"}}}});
  // Derived fields are recomputed on load; write them anyway for COCO shape.
  for (auto& ann : j["annotations"]) {
    ann["area"] = 80;
    ann["bbox"] = {3, 2, 10, 8};
    ann["iscrowd"] = 0;
  }
  write_file_atomic(dir / "annotations.json", j.dump(2));

  LoadOptions opts;
  opts.check_images = false;
  const Dataset ds = load_dataset(dir / "annotations.json", opts);
  REQUIRE(ds.frames.size() == 1);
  REQUIRE(ds.frames[0].instances.size() == 3);
  for (const auto& inst : ds.frames[0].instances) {
    CHECK(inst.mask == rle);
    CHECK(inst.area == 80);
  }
}

TEST_CASE("prediction loading validates scores, frames and categories") {
  const fs::path dir = fresh_dir("predictions");
  const Dataset ds = synthetic_dataset();

  auto write_preds = [&](nlohmann::json arr) {
    write_file_atomic(dir / "pred.json", arr.dump());
    return dir / "pred.json";
  };
  const RleMask rle = rle_encode(blob(48, 36, 1, 1, 4, 4));
  nlohmann::json seg = {{"size", {36, 48}}, {"counts", rle.counts}};

  // Happy path: GT as predictions.
  nlohmann::json good = nlohmann::json::array();
  for (const auto& frame : ds.frames)
    for (const auto& inst : frame.instances)
      good.push_back({{"frame_id", frame.frame_id},
                      {"category_id", inst.category},
                      {"score", 1.0},
                      {"segmentation", {{"size", {36, 48}}, {"counts", inst.mask.counts}}}});
  const PredictionSet preds = load_predictions(write_preds(good), ds);
  CHECK(prediction_count(preds) == total_instances(ds));

  // Score out of range.
  nlohmann::json bad_score = nlohmann::json::array();
  bad_score.push_back({{"frame_id", "f000"}, {"category_id", 1}, {"score", 1.5}, {"segmentation", seg}});
  CHECK_THROWS(load_predictions(write_preds(bad_score), ds));

  // Missing score.
  nlohmann::json no_score = nlohmann::json::array();
  no_score.push_back({{"frame_id", "f000"}, {"category_id", 1}, {"segmentation", seg}});
  CHECK_THROWS(load_predictions(write_preds(no_score), ds));

  // Unknown frame id, named in the message.
  nlohmann::json bad_frame = nlohmann::json::array();
  bad_frame.push_back({{"frame_id", "nope"}, {"category_id", 1}, {"score", 0.5}, {"segmentation", seg}});
  try {
    load_predictions(write_preds(bad_frame), ds);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("nope") != std::string::npos);
  }

  // Unknown category.
  nlohmann::json bad_cat = nlohmann::json::array();
  bad_cat.push_back({{"frame_id", "f000"}, {"category_id", 77}, {"score", 0.5}, {"segmentation", seg}});
  CHECK_THROWS(load_predictions(write_preds(bad_cat), ds));
}

TEST_CASE("predictions round trip through save") {
  const fs::path dir = fresh_dir("pred_roundtrip");
  const Dataset ds = synthetic_dataset();
  PredictionSet preds;
  for (const auto& frame : ds.frames) {
    auto scored = frame.instances;
    for (auto& inst : scored) inst.score = 0.75;
    preds[frame.frame_id] = std::move(scored);
  }
  save_predictions(preds, dir / "pred.json");
  const PredictionSet back = load_predictions(dir / "pred.json", ds);
  CHECK(prediction_count(back) == prediction_count(preds));
  for (const auto& [id, instances] : back)
    for (const auto& inst : instances) CHECK(inst.score == 0.75);
}

TEST_CASE("taxonomy manifest round trip") {
  const fs::path dir = fresh_dir("taxonomy");
  save_taxonomy(default_taxonomy(), dir / "taxonomy.json");
  CHECK(load_taxonomy(dir / "taxonomy.json") == default_taxonomy());
}

TEST_CASE("malformed json fails with a message naming the file") {
  const fs::path dir = fresh_dir("malformed");
  write_file_atomic(dir / "broken.json", "{not json");
  try {
    load_dataset(dir / "broken.json");
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("broken.json") != std::string::npos);
  }
}

TEST_CASE("dataset failing validation is rejected at load") {
  const fs::path dir = fresh_dir("invalid");
  nlohmann::json j;
  j["categories"] = {{{"id", 1}, {"name", "Instrument"}}};
  j["images"] = {{{"id", 1}, {"file_name", "f0.png"}, {"width", 16}, {"height", 16}}};
  const RleMask rle = rle_encode(blob(8, 8, 0, 0, 2, 2));  // wrong dimensions
  j["annotations"] = {{{"id", 1},
                       {"image_id", 1},
                       {"category_id", 1},
                       {"segmentation", {{"size", {8, 8}}, {"counts", rle.counts}}}}};
  write_file_atomic(dir / "annotations.json", j.dump());
  LoadOptions opts;
  opts.check_images = false;
  try {
    load_dataset(dir / "annotations.json", opts);
    FAIL("expected a validation error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("dimension mismatch") != std::string::npos);
  }
}

TEST_CASE("png image round trip") {
  const fs::path dir = fresh_dir("png");
  CounterRng rng(23);
  Image img = Image::filled(33, 21, {0, 0, 0});
  for (int y = 0; y < 21; ++y)
    for (int x = 0; x < 33; ++x)
      img.set(x, y, {std::uint8_t(rng.uniform_int(0, 255)),
                     std::uint8_t(rng.uniform_int(0, 255)),
                     std::uint8_t(rng.uniform_int(0, 255))});
  write_image_png((dir / "img.png").string(), img);
  CHECK(read_image_png((dir / "img.png").string()) == img);

  const Mask m = blob(19, 11, 2, 3, 7, 5);
  write_mask_png((dir / "mask.png").string(), m);
  CHECK((read_mask_png((dir / "mask.png").string()) == m).all());
}
