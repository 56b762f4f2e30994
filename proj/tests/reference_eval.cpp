#include "reference_eval.hpp"

#include <cmath>
#include <limits>

namespace refeval {

namespace {

double naive_iou(const segeval::Mask& a, const segeval::Mask& b) {
  std::int64_t inter = 0, uni = 0;
  for (int y = 0; y < a.rows(); ++y)
    for (int x = 0; x < a.cols(); ++x) {
      const bool va = a(y, x) != 0;
      const bool vb = b(y, x) != 0;
      if (va && vb) ++inter;
      if (va || vb) ++uni;
    }
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

struct Box {
  int x0, y0, x1, y1;  // inclusive
};

Box tight_box(const segeval::Mask& m) {
  Box b{int(m.cols()), int(m.rows()), -1, -1};
  for (int y = 0; y < m.rows(); ++y)
    for (int x = 0; x < m.cols(); ++x)
      if (m(y, x)) {
        if (x < b.x0) b.x0 = x;
        if (y < b.y0) b.y0 = y;
        if (x > b.x1) b.x1 = x;
        if (y > b.y1) b.y1 = y;
      }
  return b;
}

double naive_box_iou(const segeval::Mask& a, const segeval::Mask& b) {
  const Box ba = tight_box(a), bb = tight_box(b);
  if (ba.x1 < 0 || bb.x1 < 0) return 0;
  const int ix0 = std::max(ba.x0, bb.x0), iy0 = std::max(ba.y0, bb.y0);
  const int ix1 = std::min(ba.x1, bb.x1), iy1 = std::min(ba.y1, bb.y1);
  const std::int64_t iw = ix1 - ix0 + 1, ih = iy1 - iy0 + 1;
  const std::int64_t inter = (iw > 0 && ih > 0) ? iw * ih : 0;
  const std::int64_t area_a = std::int64_t(ba.x1 - ba.x0 + 1) * (ba.y1 - ba.y0 + 1);
  const std::int64_t area_b = std::int64_t(bb.x1 - bb.x0 + 1) * (bb.y1 - bb.y0 + 1);
  const std::int64_t uni = area_a + area_b - inter;
  return uni == 0 ? 0.0 : double(inter) / double(uni);
}

struct ScoredDet {
  double score;
  bool tp;
};

}  // namespace

RefResult reference_evaluate(const std::vector<RefFrame>& frames,
                             const std::vector<int>& categories,
                             const std::vector<double>& thresholds, int max_det,
                             bool by_bbox) {
  RefResult result;
  result.ap.assign(categories.size(),
                   std::vector<double>(thresholds.size(),
                                       std::numeric_limits<double>::quiet_NaN()));
  result.recall = result.ap;

  int classes_with_gt = 0;
  double sum_ap50 = 0, sum_ap = 0;

  for (std::size_t ci = 0; ci < categories.size(); ++ci) {
    const int cat = categories[ci];
    std::int64_t total_gt = 0;
    for (const auto& frame : frames)
      for (const auto& g : frame.gts)
        if (g.category == cat) ++total_gt;
    if (total_gt == 0) continue;
    ++classes_with_gt;

    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
      const double thresh = thresholds[ti];
      std::vector<ScoredDet> pooled;
      std::int64_t matched_total = 0;

      for (const auto& frame : frames) {
        std::vector<const RefInstance*> gts, dts;
        for (const auto& g : frame.gts)
          if (g.category == cat) gts.push_back(&g);
        for (const auto& d : frame.dts)
          if (d.category == cat) dts.push_back(&d);

        // Insertion sort by descending score, stable.
        for (std::size_t i = 1; i < dts.size(); ++i) {
          const RefInstance* key = dts[i];
          std::size_t j = i;
          while (j > 0 && dts[j - 1]->score < key->score) {
            dts[j] = dts[j - 1];
            --j;
          }
          dts[j] = key;
        }
        if (int(dts.size()) > max_det) dts.resize(max_det);

        std::vector<bool> gt_taken(gts.size(), false);
        for (const auto* d : dts) {
          int pick = -1;
          double best = -1;
          for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gt_taken[g]) continue;
            const double v = by_bbox ? naive_box_iou(gts[g]->mask, d->mask)
                                     : naive_iou(gts[g]->mask, d->mask);
            if (v >= thresh && v > best) {
              best = v;
              pick = int(g);
            }
          }
          if (pick >= 0) {
            gt_taken[pick] = true;
            ++matched_total;
            pooled.push_back({d->score, true});
          } else {
            pooled.push_back({d->score, false});
          }
        }
      }

      // Stable insertion sort of the pooled detections by descending score.
      for (std::size_t i = 1; i < pooled.size(); ++i) {
        const ScoredDet key = pooled[i];
        std::size_t j = i;
        while (j > 0 && pooled[j - 1].score < key.score) {
          pooled[j] = pooled[j - 1];
          --j;
        }
        pooled[j] = key;
      }

      std::vector<double> recalls(pooled.size()), precisions(pooled.size());
      std::int64_t tp = 0, fp = 0;
      for (std::size_t i = 0; i < pooled.size(); ++i) {
        if (pooled[i].tp) ++tp; else ++fp;
        recalls[i] = double(tp) / double(total_gt);
        precisions[i] = double(tp) / double(tp + fp);
      }

      // AP straight from the definition: for each of the 101 recall levels,
      // the best precision at that recall or beyond.
      double sum = 0;
      for (int level = 0; level <= 100; ++level) {
        const double r = level / 100.0;
        double best = 0;
        for (std::size_t i = 0; i < pooled.size(); ++i)
          if (recalls[i] >= r && precisions[i] > best) best = precisions[i];
        sum += best;
      }
      result.ap[ci][ti] = sum / 101.0;
      result.recall[ci][ti] = double(matched_total) / double(total_gt);
    }

    sum_ap50 += result.ap[ci][0];
    double class_mean = 0;
    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) class_mean += result.ap[ci][ti];
    sum_ap += class_mean / double(thresholds.size());
  }

  result.mean_ap50 = classes_with_gt ? sum_ap50 / classes_with_gt : 0;
  result.mean_ap = classes_with_gt ? sum_ap / classes_with_gt : 0;
  return result;
}

}  // namespace refeval
