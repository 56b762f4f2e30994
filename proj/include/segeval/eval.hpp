#pragma once

#include "segeval/dataset_io.hpp"
#include "segeval/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace segeval {

enum class IouKind { mask, bbox };
enum class EvalMode { binary, multiclass };

const char* iou_kind_name(IouKind k);
const char* eval_mode_name(EvalMode m);

// 0.50, 0.55, ..., 0.95.
std::vector<double> coco_thresholds();
// 0.50, ..., 0.90 (the narrower nine-threshold variant).
std::vector<double> narrow_thresholds();

struct EvalConfig {
  IouKind iou_kind = IouKind::mask;
  EvalMode mode = EvalMode::multiclass;
  std::vector<double> thresholds = coco_thresholds();
  std::vector<int> max_detections{1, 10, 100};
  int interpolation_points = 101;
  bool include_other = true;  // count the "Other" class in the aggregate

  void validate() const;
};

// Every category id mapped to the single instrument id; counts preserved.
std::vector<InstanceMask> collapse_to_binary(std::vector<InstanceMask> instances);
Dataset collapse_to_binary(Dataset ds);
PredictionSet collapse_to_binary(PredictionSet preds);

// Greedy score-ordered assignment for one frame (and, in multiclass
// evaluation, one category). Detections take the unmatched ground truth with
// the highest IoU at or above the threshold; ties go to the lowest gt index.
struct MatchResult {
  std::vector<int> det_order;   // prediction indices, descending score
  std::vector<int> det_to_gt;   // per rank: matched gt index or -1
  std::vector<int> gt_to_rank;  // per gt: matching detection rank or -1
};
MatchResult match_instances(const std::vector<InstanceMask>& gt,
                            const std::vector<InstanceMask>& preds,
                            double iou_threshold, IouKind kind);

struct PrPoint {
  double recall = 0;
  double precision = 0;
};

// Cumulative precision/recall over (score, is-true-positive) detections,
// highest score first (stable for equal scores). gt_total is the recall
// denominator.
std::vector<PrPoint> pr_curve(std::vector<std::pair<double, bool>> detections,
                              std::int64_t gt_total);

// Interpolated AP: mean over evenly spaced recall levels of the best
// precision achieved at or beyond that recall; 0 where unattained.
double average_precision(const std::vector<PrPoint>& curve, int interpolation_points = 101);

// Mean of per-threshold recalls.
double average_recall(const std::vector<double>& recall_per_threshold);

struct ClassEval {
  CategoryId id = 0;
  std::string name;
  std::int64_t gt_count = 0;
  // Indexed [threshold][max_detections]; NaN when gt_count == 0.
  std::vector<std::vector<double>> ap;
  std::vector<std::vector<double>> recall;
  // Interpolated precision at the evenly spaced recall levels, at the
  // largest detection cap; indexed [threshold][level].
  std::vector<std::vector<double>> curves;
  double ap50 = 0;    // AP at the first threshold, largest cap
  double ap_mean = 0; // mean AP over thresholds, largest cap
  std::vector<double> ar;  // per max_detections entry, mean recall over thresholds
};

struct EvalReport {
  EvalConfig config;
  std::string label = "run";
  Taxonomy classes;  // taxonomy the evaluation ran over (single entry in binary mode)
  std::vector<ClassEval> per_class;
  // Aggregates over classes with at least one gt instance.
  double ap50 = 0;
  double ap_mean = 0;
  std::vector<double> ar;
  std::int64_t gt_total = 0;
  std::int64_t prediction_total = 0;
  std::int64_t frames = 0;
};

// Full evaluation: per-frame greedy matching at every threshold, dataset-wide
// precision/recall accumulation, per-class and aggregate AP/AR. Pure function
// of (gt, preds, cfg); identical output for any thread count.
EvalReport evaluate(const Dataset& gt, const PredictionSet& preds, const EvalConfig& cfg,
                    int threads = 1);

}  // namespace segeval
