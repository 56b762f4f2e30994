#include "segeval/model.hpp"

#include <set>
#include <stdexcept>

namespace segeval {

Taxonomy default_taxonomy() {
  return {
      {1, "Bipolar Grasper"},
      {2, "Hook"},
      {3, "Sealer-Divider"},
      {4, "Grasper"},
      {5, "Irrigator"},
      {6, "Knot-Pusher"},
      {7, "Needle-Holder"},
      {8, "Scissors"},
      {9, "Morcellator"},
      {10, "Needle"},
      {11, "Trocar"},
      {12, "Other"},
  };
}

Taxonomy binary_taxonomy() { return {{kInstrumentCategory, "Instrument"}}; }

InstanceMask InstanceMask::from_dense(CategoryId category, const Mask& dense,
                                      std::optional<double> score) {
  return from_rle(category, rle_encode(dense), score);
}

InstanceMask InstanceMask::from_rle(CategoryId category, RleMask rle,
                                    std::optional<double> score) {
  InstanceMask m;
  m.category = category;
  m.area = rle_area(rle);
  m.bbox = rle_bbox(rle);
  m.mask = std::move(rle);
  m.score = score;
  return m;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

std::optional<Split> split_from_name(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  return std::nullopt;
}

std::vector<Violation> validate_dataset(const Dataset& ds) {
  std::vector<Violation> out;
  auto add = [&out](std::string frame, std::string rule, std::string detail) {
    out.push_back({std::move(frame), std::move(rule), std::move(detail)});
  };

  std::set<CategoryId> ids;
  for (const auto& cat : ds.taxonomy) {
    if (!ids.insert(cat.id).second)
      add("", "duplicate category", "category id " + std::to_string(cat.id));
  }
  for (std::size_t i = 0; i < ds.taxonomy.size(); ++i) {
    if (!ids.count(static_cast<CategoryId>(i + 1))) {
      add("", "taxonomy not dense",
          "ids must cover 1.." + std::to_string(ds.taxonomy.size()));
      break;
    }
  }

  std::set<std::string> seen_ids;
  std::size_t tagged = 0;
  for (const auto& frame : ds.frames) {
    if (!seen_ids.insert(frame.frame_id).second)
      add(frame.frame_id, "duplicate frame id", "");
    if (frame.width < 1 || frame.height < 1)
      add(frame.frame_id, "invalid frame size",
          std::to_string(frame.width) + "x" + std::to_string(frame.height));
    if (frame.split) ++tagged;

    for (std::size_t k = 0; k < frame.instances.size(); ++k) {
      const auto& inst = frame.instances[k];
      const std::string which = "instance " + std::to_string(k);
      if (!ids.count(inst.category))
        add(frame.frame_id, "unknown category",
            which + " has category " + std::to_string(inst.category));
      if (inst.mask.width != frame.width || inst.mask.height != frame.height) {
        add(frame.frame_id, "dimension mismatch",
            which + " mask " + std::to_string(inst.mask.width) + "x" +
                std::to_string(inst.mask.height) + " in frame " +
                std::to_string(frame.width) + "x" + std::to_string(frame.height));
        continue;  // derived-field checks are meaningless on the wrong grid
      }
      const std::int64_t area = rle_area(inst.mask);
      if (area < 1) add(frame.frame_id, "empty mask", which);
      if (inst.area != area)
        add(frame.frame_id, "area mismatch",
            which + " stores " + std::to_string(inst.area) + ", mask has " +
                std::to_string(area));
      if (area >= 1 && inst.bbox != rle_bbox(inst.mask))
        add(frame.frame_id, "bbox mismatch", which);
      if (inst.score) add(frame.frame_id, "score on ground truth", which);
    }
  }
  if (tagged != 0 && tagged != ds.frames.size())
    add("", "partial split tagging",
        std::to_string(tagged) + " of " + std::to_string(ds.frames.size()) +
            " frames tagged");
  return out;
}

std::map<CategoryId, std::int64_t> instance_histogram(const Dataset& ds) {
  std::map<CategoryId, std::int64_t> counts;
  for (const auto& cat : ds.taxonomy) counts[cat.id] = 0;
  for (const auto& frame : ds.frames)
    for (const auto& inst : frame.instances) ++counts[inst.category];
  return counts;
}

std::int64_t total_instances(const Dataset& ds) {
  std::int64_t total = 0;
  for (const auto& frame : ds.frames) total += static_cast<std::int64_t>(frame.instances.size());
  return total;
}

}  // namespace segeval
