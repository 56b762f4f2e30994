#pragma once

#include "segeval/mask.hpp"
#include "segeval/transform.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace segeval {

using CategoryId = int;

struct Category {
  CategoryId id = 0;
  std::string name;

  bool operator==(const Category&) const = default;
};

// Categories with dense ids 1..N.
using Taxonomy = std::vector<Category>;

// The twelve default categories: eleven instrument types plus "Other" for
// instruments that cannot be identified.
Taxonomy default_taxonomy();

// Class-agnostic mode folds every category into this one.
inline constexpr CategoryId kInstrumentCategory = 1;
Taxonomy binary_taxonomy();

// One instrument instance. area and bbox are derived from the mask; score is
// present on predictions only, never on ground truth.
struct InstanceMask {
  CategoryId category = 0;
  RleMask mask;
  BoundingBox bbox;
  std::int64_t area = 0;
  std::optional<double> score;

  static InstanceMask from_dense(CategoryId category, const Mask& dense,
                                 std::optional<double> score = std::nullopt);
  static InstanceMask from_rle(CategoryId category, RleMask rle,
                               std::optional<double> score = std::nullopt);

  Mask dense() const { return rle_decode(mask); }
};

enum class Split { train, val, test };

const char* split_name(Split s);
std::optional<Split> split_from_name(const std::string& name);

struct AnnotatedFrame {
  std::string frame_id;
  int width = 0;
  int height = 0;
  std::string image_ref;  // path to pixel data; may be empty for in-memory data
  std::vector<InstanceMask> instances;
  std::optional<Split> split;
  std::vector<TransformSpec> provenance;  // augmentation chain, empty on originals
};

struct Dataset {
  Taxonomy taxonomy;
  std::vector<AnnotatedFrame> frames;
};

struct Violation {
  std::string frame_id;  // empty for dataset-level rules
  std::string rule;
  std::string detail;
};

// Checks every structural invariant; violations are data, not failures.
std::vector<Violation> validate_dataset(const Dataset& ds);

// Instance counts per category id; categories absent from the data report 0.
std::map<CategoryId, std::int64_t> instance_histogram(const Dataset& ds);

std::int64_t total_instances(const Dataset& ds);

}  // namespace segeval
