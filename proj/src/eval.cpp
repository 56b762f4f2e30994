#include "segeval/eval.hpp"

#include "segeval/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace segeval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> threshold_range(double lo, double hi) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double t = lo + 0.05 * i;
    if (t > hi + 1e-9) break;
    out.push_back(t);
  }
  return out;
}

}  // namespace

const char* iou_kind_name(IouKind k) { return k == IouKind::mask ? "mask" : "bbox"; }
const char* eval_mode_name(EvalMode m) {
  return m == EvalMode::binary ? "binary" : "multiclass";
}

std::vector<double> coco_thresholds() { return threshold_range(0.50, 0.95); }
std::vector<double> narrow_thresholds() { return threshold_range(0.50, 0.90); }

void EvalConfig::validate() const {
  if (thresholds.empty()) throw std::invalid_argument("no IoU thresholds configured");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] <= 0 || thresholds[i] > 1)
      throw std::invalid_argument("IoU thresholds must lie in (0,1]");
    if (i > 0 && thresholds[i] <= thresholds[i - 1])
      throw std::invalid_argument("IoU thresholds must be strictly increasing");
  }
  if (max_detections.empty()) throw std::invalid_argument("no detection caps configured");
  for (std::size_t i = 0; i < max_detections.size(); ++i) {
    if (max_detections[i] < 1)
      throw std::invalid_argument("detection caps must be positive");
    if (i > 0 && max_detections[i] <= max_detections[i - 1])
      throw std::invalid_argument("detection caps must be increasing");
  }
  if (interpolation_points < 2)
    throw std::invalid_argument("interpolation needs at least 2 recall levels");
}

std::vector<InstanceMask> collapse_to_binary(std::vector<InstanceMask> instances) {
  for (auto& inst : instances) inst.category = kInstrumentCategory;
  return instances;
}

Dataset collapse_to_binary(Dataset ds) {
  ds.taxonomy = binary_taxonomy();
  for (auto& frame : ds.frames) frame.instances = collapse_to_binary(std::move(frame.instances));
  return ds;
}

PredictionSet collapse_to_binary(PredictionSet preds) {
  for (auto& [id, instances] : preds) instances = collapse_to_binary(std::move(instances));
  return preds;
}

MatchResult match_instances(const std::vector<InstanceMask>& gt,
                            const std::vector<InstanceMask>& preds,
                            double iou_threshold, IouKind kind) {
  MatchResult result;
  result.det_order.resize(preds.size());
  std::iota(result.det_order.begin(), result.det_order.end(), 0);
  std::stable_sort(result.det_order.begin(), result.det_order.end(), [&](int a, int b) {
    return preds[a].score.value_or(0) > preds[b].score.value_or(0);
  });
  result.det_to_gt.assign(preds.size(), -1);
  result.gt_to_rank.assign(gt.size(), -1);

  for (std::size_t rank = 0; rank < result.det_order.size(); ++rank) {
    const InstanceMask& det = preds[result.det_order[rank]];
    int best = -1;
    double best_iou = 0;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (result.gt_to_rank[g] >= 0) continue;
      const double v = kind == IouKind::mask ? mask_iou(gt[g].mask, det.mask)
                                             : bbox_iou(gt[g].bbox, det.bbox);
      if (v >= iou_threshold && v > best_iou) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      result.det_to_gt[rank] = best;
      result.gt_to_rank[best] = static_cast<int>(rank);
    }
  }
  return result;
}

std::vector<PrPoint> pr_curve(std::vector<std::pair<double, bool>> detections,
                              std::int64_t gt_total) {
  if (gt_total <= 0)
    throw std::invalid_argument("pr_curve: undefined with no ground-truth instances");
  std::stable_sort(detections.begin(), detections.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<PrPoint> curve;
  curve.reserve(detections.size());
  std::int64_t tp = 0, fp = 0;
  for (const auto& [score, is_tp] : detections) {
    (is_tp ? tp : fp) += 1;
    curve.push_back({static_cast<double>(tp) / static_cast<double>(gt_total),
                     static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  return curve;
}

double average_precision(const std::vector<PrPoint>& curve, int interpolation_points) {
  if (curve.empty()) return 0;
  // Monotone envelope: precision at each point becomes the best achieved at
  // that recall or beyond.
  std::vector<double> precision(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) precision[i] = curve[i].precision;
  for (std::size_t i = curve.size() - 1; i > 0; --i)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double sum = 0;
  for (int j = 0; j < interpolation_points; ++j) {
    const double level = static_cast<double>(j) / (interpolation_points - 1);
    // First curve point reaching this recall; recalls are non-decreasing.
    std::size_t lo = 0, hi = curve.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (curve[mid].recall < level) lo = mid + 1;
      else hi = mid;
    }
    if (lo < curve.size()) sum += precision[lo];
  }
  return sum / interpolation_points;
}

double average_recall(const std::vector<double>& recall_per_threshold) {
  if (recall_per_threshold.empty()) return 0;
  return std::accumulate(recall_per_threshold.begin(), recall_per_threshold.end(), 0.0) /
         static_cast<double>(recall_per_threshold.size());
}

EvalReport evaluate(const Dataset& gt_in, const PredictionSet& preds_in,
                    const EvalConfig& cfg, int threads) {
  cfg.validate();
  if (gt_in.frames.empty()) throw std::invalid_argument("evaluate: empty ground-truth dataset");

  const bool binary = cfg.mode == EvalMode::binary;
  const Dataset gt = binary ? collapse_to_binary(gt_in) : gt_in;
  const PredictionSet preds = binary ? collapse_to_binary(preds_in) : preds_in;

  const std::size_t n_thresh = cfg.thresholds.size();
  const std::size_t n_caps = cfg.max_detections.size();
  const int top_cap = cfg.max_detections.back();

  EvalReport report;
  report.config = cfg;
  report.classes = gt.taxonomy;
  report.frames = static_cast<std::int64_t>(gt.frames.size());
  report.gt_total = total_instances(gt);
  report.prediction_total = prediction_count(preds);

  // Per (frame, class) matching, parallel over frames.
  struct FrameClassMatches {
    std::int64_t gt_count = 0;
    std::vector<double> scores;               // rank order within the frame
    std::vector<std::vector<bool>> matched;   // [threshold][rank]
    std::vector<std::vector<int>> gt_matched; // [threshold] count matched among ranks < cap
  };
  const std::size_t n_classes = gt.taxonomy.size();
  std::vector<std::vector<FrameClassMatches>> per_frame(gt.frames.size());

  parallel_for(gt.frames.size(), threads, [&](std::size_t f) {
    const AnnotatedFrame& frame = gt.frames[f];
    const auto pit = preds.find(frame.frame_id);
    static const std::vector<InstanceMask> kNone;
    const std::vector<InstanceMask>& frame_preds = pit == preds.end() ? kNone : pit->second;

    auto& slots = per_frame[f];
    slots.resize(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
      const CategoryId cat = gt.taxonomy[c].id;
      std::vector<InstanceMask> gts, dts;
      for (const auto& inst : frame.instances)
        if (inst.category == cat) gts.push_back(inst);
      for (const auto& inst : frame_preds)
        if (inst.category == cat) dts.push_back(inst);

      auto& slot = slots[c];
      slot.gt_count = static_cast<std::int64_t>(gts.size());
      if (dts.empty() && gts.empty()) continue;

      // One greedy pass per threshold on the score-sorted detections. The
      // match of rank r never depends on later ranks, so detection caps are
      // applied afterwards by truncation.
      slot.matched.assign(n_thresh, {});
      slot.gt_matched.assign(n_thresh, std::vector<int>(n_caps, 0));
      for (std::size_t t = 0; t < n_thresh; ++t) {
        const MatchResult m =
            match_instances(gts, dts, cfg.thresholds[t], cfg.iou_kind);
        const std::size_t kept = std::min<std::size_t>(m.det_order.size(), top_cap);
        if (t == 0) {
          slot.scores.reserve(kept);
          for (std::size_t r = 0; r < kept; ++r)
            slot.scores.push_back(dts[m.det_order[r]].score.value_or(0));
        }
        auto& matched = slot.matched[t];
        matched.resize(kept);
        for (std::size_t r = 0; r < kept; ++r) matched[r] = m.det_to_gt[r] >= 0;
        for (std::size_t mi = 0; mi < n_caps; ++mi) {
          const std::size_t cap = std::min<std::size_t>(cfg.max_detections[mi], kept);
          int count = 0;
          for (std::size_t r = 0; r < cap; ++r) count += matched[r] ? 1 : 0;
          slot.gt_matched[t][mi] = count;
        }
      }
    }
  });

  // Accumulate per class.
  report.per_class.resize(n_classes);
  std::vector<ClassEval>& classes = report.per_class;
  for (std::size_t c = 0; c < n_classes; ++c) {
    ClassEval& ce = classes[c];
    ce.id = gt.taxonomy[c].id;
    ce.name = gt.taxonomy[c].name;
    ce.ap.assign(n_thresh, std::vector<double>(n_caps, kNaN));
    ce.recall.assign(n_thresh, std::vector<double>(n_caps, kNaN));
    ce.curves.assign(n_thresh, {});
    ce.ar.assign(n_caps, kNaN);
    ce.ap50 = kNaN;
    ce.ap_mean = kNaN;

    std::int64_t gt_count = 0;
    for (std::size_t f = 0; f < gt.frames.size(); ++f) gt_count += per_frame[f][c].gt_count;
    ce.gt_count = gt_count;
    if (gt_count == 0) continue;  // AP/AR undefined; excluded from aggregates

    // Pool detections in frame order; a stable score sort keeps ties in
    // input order. The sorted order is shared by every cap.
    struct Pooled {
      double score;
      std::size_t frame;
      std::size_t rank;
    };
    std::vector<Pooled> pooled;
    for (std::size_t f = 0; f < gt.frames.size(); ++f) {
      const auto& slot = per_frame[f][c];
      for (std::size_t r = 0; r < slot.scores.size(); ++r)
        pooled.push_back({slot.scores[r], f, r});
    }
    std::stable_sort(pooled.begin(), pooled.end(),
                     [](const Pooled& a, const Pooled& b) { return a.score > b.score; });

    for (std::size_t t = 0; t < n_thresh; ++t) {
      for (std::size_t mi = 0; mi < n_caps; ++mi) {
        const std::size_t cap = static_cast<std::size_t>(cfg.max_detections[mi]);
        std::vector<PrPoint> curve;
        curve.reserve(pooled.size());
        std::int64_t tp = 0, fp = 0;
        for (const auto& det : pooled) {
          if (det.rank >= cap) continue;
          (per_frame[det.frame][c].matched[t][det.rank] ? tp : fp) += 1;
          curve.push_back({static_cast<double>(tp) / static_cast<double>(gt_count),
                           static_cast<double>(tp) / static_cast<double>(tp + fp)});
        }
        ce.ap[t][mi] = average_precision(curve, cfg.interpolation_points);

        std::int64_t matched_gt = 0;
        for (std::size_t f = 0; f < gt.frames.size(); ++f) {
          const auto& slot = per_frame[f][c];
          if (!slot.gt_matched.empty()) matched_gt += slot.gt_matched[t][mi];
        }
        ce.recall[t][mi] = static_cast<double>(matched_gt) / static_cast<double>(gt_count);

        if (mi + 1 == n_caps) {
          // Interpolated precision levels for the report.
          std::vector<double> env(curve.size());
          for (std::size_t i = 0; i < curve.size(); ++i) env[i] = curve[i].precision;
          for (std::size_t i = curve.size(); i > 1; --i)
            env[i - 2] = std::max(env[i - 2], env[i - 1]);
          std::vector<double> levels(cfg.interpolation_points, 0.0);
          for (int jj = 0; jj < cfg.interpolation_points; ++jj) {
            const double level =
                static_cast<double>(jj) / (cfg.interpolation_points - 1);
            const auto it = std::lower_bound(
                curve.begin(), curve.end(), level,
                [](const PrPoint& p, double l) { return p.recall < l; });
            if (it != curve.end()) levels[jj] = env[it - curve.begin()];
          }
          ce.curves[t] = std::move(levels);
        }
      }
    }
    for (std::size_t mi = 0; mi < n_caps; ++mi) {
      std::vector<double> recalls(n_thresh);
      for (std::size_t t = 0; t < n_thresh; ++t) recalls[t] = ce.recall[t][mi];
      ce.ar[mi] = average_recall(recalls);
    }
    ce.ap50 = ce.ap[0][n_caps - 1];
    double sum = 0;
    for (std::size_t t = 0; t < n_thresh; ++t) sum += ce.ap[t][n_caps - 1];
    ce.ap_mean = sum / static_cast<double>(n_thresh);
  }

  // Aggregates over classes with ground truth.
  std::vector<const ClassEval*> scored;
  for (const auto& ce : classes) {
    if (ce.gt_count == 0) continue;
    if (!cfg.include_other && ce.name == "Other") continue;
    scored.push_back(&ce);
  }
  report.ar.assign(n_caps, kNaN);
  if (scored.empty()) {
    report.ap50 = kNaN;
    report.ap_mean = kNaN;
  } else {
    double ap50 = 0, ap_mean = 0;
    std::vector<double> ar(n_caps, 0.0);
    for (const auto* ce : scored) {
      ap50 += ce->ap50;
      ap_mean += ce->ap_mean;
      for (std::size_t mi = 0; mi < n_caps; ++mi) ar[mi] += ce->ar[mi];
    }
    const double n = static_cast<double>(scored.size());
    report.ap50 = ap50 / n;
    report.ap_mean = ap_mean / n;
    for (std::size_t mi = 0; mi < n_caps; ++mi) report.ar[mi] = ar[mi] / n;
  }
  return report;
}

}  // namespace segeval
