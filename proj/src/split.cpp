#include "segeval/split.hpp"

#include "segeval/parallel.hpp"
#include "segeval/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace segeval {

namespace {

constexpr int kTrain = 0, kVal = 1, kTest = 2;

// Frame counts per split by largest remainder, summing exactly to n.
std::array<std::int64_t, 3> frame_targets(std::int64_t n, const SplitConfig& cfg) {
  const std::array<double, 3> fractions{cfg.train_fraction, cfg.val_fraction,
                                        cfg.test_fraction};
  std::array<std::int64_t, 3> targets{};
  std::array<double, 3> remainders{};
  std::int64_t assigned = 0;
  for (int s = 0; s < 3; ++s) {
    const double exact = fractions[s] * static_cast<double>(n);
    targets[s] = static_cast<std::int64_t>(std::floor(exact));
    remainders[s] = exact - std::floor(exact);
    assigned += targets[s];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainders[a] > remainders[b]; });
  for (int i = 0; assigned < n; ++i, ++assigned) ++targets[order[i % 3]];
  return targets;
}

struct Attempt {
  std::vector<int> assignment;  // frame index -> split
  double score = 0;
};

class SplitSearch {
 public:
  SplitSearch(const Dataset& ds, const SplitConfig& cfg)
      : cfg_(cfg), n_(static_cast<std::int64_t>(ds.frames.size())) {
    for (std::size_t c = 0; c < ds.taxonomy.size(); ++c)
      class_index_[ds.taxonomy[c].id] = c;
    frame_classes_.resize(ds.frames.size());
    for (std::size_t f = 0; f < ds.frames.size(); ++f)
      for (const auto& inst : ds.frames[f].instances)
        ++frame_classes_[f][class_index_.at(inst.category)];
    targets_ = frame_targets(n_, cfg);
  }

  std::size_t class_count() const { return class_index_.size(); }

  Attempt run(std::uint64_t attempt_seed) const {
    CounterRng rng(attempt_seed);
    Attempt a;
    a.assignment = construct(rng);
    repair(a.assignment);
    a.score = score(a.assignment);
    return a;
  }

  double score(const std::vector<int>& assignment) const {
    const auto counts = split_counts(assignment);
    double total = 0;
    for (int s : {kVal, kTest})
      for (std::size_t c = 0; c < class_count(); ++c)
        total += violation(counts[s][c]);
    return total;
  }

 private:
  double violation(std::int64_t count) const {
    const std::int64_t over = std::llabs(count - cfg_.quota) - cfg_.quota_tolerance;
    return over > 0 ? static_cast<double>(over) : 0.0;
  }

  std::array<std::vector<std::int64_t>, 3> split_counts(
      const std::vector<int>& assignment) const {
    std::array<std::vector<std::int64_t>, 3> counts;
    for (auto& c : counts) c.assign(class_count(), 0);
    for (std::size_t f = 0; f < assignment.size(); ++f)
      for (const auto& [c, k] : frame_classes_[f]) counts[assignment[f]][c] += k;
    return counts;
  }

  std::vector<int> construct(CounterRng& rng) const {
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_int(0, static_cast<std::int64_t>(i) - 1)]);

    std::vector<int> assignment(n_, kTrain);
    std::array<std::int64_t, 3> used{};
    std::array<std::vector<std::int64_t>, 3> counts;
    for (auto& c : counts) c.assign(class_count(), 0);

    for (const std::size_t f : order) {
      // How many still-needed instances would this frame contribute?
      std::array<std::int64_t, 3> gain{};
      for (int s : {kVal, kTest})
        for (const auto& [c, k] : frame_classes_[f])
          gain[s] += std::min<std::int64_t>(std::max<std::int64_t>(cfg_.quota - counts[s][c], 0), k);
      int pick = -1;
      for (int s : {kVal, kTest})
        if (used[s] < targets_[s] && gain[s] > 0 && (pick < 0 || gain[s] > gain[pick]))
          pick = s;
      if (pick < 0) {
        if (used[kTrain] < targets_[kTrain]) pick = kTrain;
        else if (used[kVal] < targets_[kVal]) pick = kVal;
        else pick = kTest;
      }
      assignment[f] = pick;
      ++used[pick];
      for (const auto& [c, k] : frame_classes_[f]) counts[pick][c] += k;
    }
    return assignment;
  }

  // Greedy first-improvement swap and move passes until a full sweep changes
  // nothing. Moves keep frame counts within one frame of their target.
  void repair(std::vector<int>& assignment) const {
    auto counts = split_counts(assignment);
    std::array<std::int64_t, 3> used{};
    for (int s : assignment) ++used[s];

    auto delta_for = [&](std::size_t f, int from, int to) {
      double d = 0;
      for (const auto& [c, k] : frame_classes_[f]) {
        if (from != kTrain)
          d += violation(counts[from][c] - k) - violation(counts[from][c]);
        if (to != kTrain) d += violation(counts[to][c] + k) - violation(counts[to][c]);
      }
      return d;
    };
    auto apply = [&](std::size_t f, int to) {
      for (const auto& [c, k] : frame_classes_[f]) {
        counts[assignment[f]][c] -= k;
        counts[to][c] += k;
      }
      --used[assignment[f]];
      ++used[to];
      assignment[f] = to;
    };

    for (int sweep = 0; sweep < 100; ++sweep) {
      bool changed = false;
      // Single-frame moves within the +-1 frame-count slack.
      for (std::size_t f = 0; f < assignment.size(); ++f) {
        for (int to = 0; to < 3; ++to) {
          const int from = assignment[f];
          if (to == from) continue;
          if (used[from] - 1 < targets_[from] - 1 || used[to] + 1 > targets_[to] + 1) continue;
          if (delta_for(f, from, to) < -1e-12) {
            apply(f, to);
            changed = true;
            break;
          }
        }
      }
      // Pairwise swaps keep frame counts fixed.
      for (std::size_t i = 0; i < assignment.size(); ++i) {
        for (std::size_t j = i + 1; j < assignment.size(); ++j) {
          const int si = assignment[i], sj = assignment[j];
          if (si == sj) continue;
          if (frame_classes_[i].empty() && frame_classes_[j].empty()) continue;
          // Evaluate the swap as move i->sj then j->si on the updated counts.
          double d = delta_for(i, si, sj);
          for (const auto& [c, k] : frame_classes_[i]) {
            if (si != kTrain) counts[si][c] -= k;
            if (sj != kTrain) counts[sj][c] += k;
          }
          d += delta_for(j, sj, si);
          for (const auto& [c, k] : frame_classes_[i]) {
            if (si != kTrain) counts[si][c] += k;
            if (sj != kTrain) counts[sj][c] -= k;
          }
          if (d < -1e-12) {
            const int ti = sj;
            apply(i, ti);
            apply(j, si);
            changed = true;
            break;
          }
        }
      }
      if (!changed) break;
    }
  }

  const SplitConfig& cfg_;
  std::int64_t n_;
  std::map<CategoryId, std::size_t> class_index_;
  // Sparse per-frame class multiset.
  std::vector<std::map<std::size_t, std::int64_t>> frame_classes_;
  std::array<std::int64_t, 3> targets_{};
};

}  // namespace

void SplitConfig::validate() const {
  if (train_fraction <= 0 || val_fraction <= 0 || test_fraction <= 0)
    throw std::invalid_argument("split fractions must be positive");
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");
  if (quota < 0) throw std::invalid_argument("quota must be non-negative");
  if (quota_tolerance < 0) throw std::invalid_argument("quota tolerance must be non-negative");
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be at least 1");
}

SplitOutcome stratified_split(const Dataset& ds, const SplitConfig& cfg, int threads) {
  cfg.validate();
  if (ds.frames.empty()) throw std::invalid_argument("cannot split an empty dataset");
  if (!cfg.force)
    for (const auto& frame : ds.frames)
      if (frame.split)
        throw std::invalid_argument("dataset already has split tags (use force to re-split)");

  if (!cfg.best_effort) {
    const auto histogram = instance_histogram(ds);
    std::ostringstream deficit;
    for (const auto& cat : ds.taxonomy) {
      const std::int64_t total = histogram.at(cat.id);
      const std::int64_t need = 2LL * cfg.quota;
      if (total < need)
        deficit << "\n  " << cat.name << ": " << total << " instances, deficit "
                << (need - total);
    }
    const std::string msg = deficit.str();
    if (!msg.empty())
      throw std::runtime_error("quota " + std::to_string(cfg.quota) +
                               " infeasible for some classes:" + msg);
  }

  const SplitSearch search(ds, cfg);
  std::vector<Attempt> attempts(cfg.max_attempts);
  parallel_for(attempts.size(), threads, [&](std::size_t k) {
    attempts[k] = search.run(CounterRng::mix(cfg.seed, k + 1));
  });

  std::size_t best = 0;
  for (std::size_t k = 1; k < attempts.size(); ++k)
    if (attempts[k].score < attempts[best].score) best = k;

  SplitOutcome outcome;
  outcome.dataset = ds;
  outcome.violation_score = attempts[best].score;
  outcome.attempt = static_cast<int>(best);
  static constexpr Split kSplits[3] = {Split::train, Split::val, Split::test};
  for (std::size_t f = 0; f < outcome.dataset.frames.size(); ++f)
    outcome.dataset.frames[f].split = kSplits[attempts[best].assignment[f]];
  return outcome;
}

std::vector<SplitReportRow> split_report(const Dataset& ds) {
  std::vector<SplitReportRow> rows;
  for (Split s : {Split::train, Split::val, Split::test}) {
    SplitReportRow row;
    row.split = s;
    for (const auto& cat : ds.taxonomy) row.instances[cat.id] = 0;
    rows.push_back(std::move(row));
  }
  for (const auto& frame : ds.frames) {
    if (!frame.split) throw std::invalid_argument("split_report: untagged frame " + frame.frame_id);
    auto& row = rows[static_cast<int>(*frame.split)];
    ++row.frames;
    for (const auto& inst : frame.instances) ++row.instances[inst.category];
  }
  return rows;
}

std::string split_csv(const Dataset& ds) {
  std::vector<const AnnotatedFrame*> frames;
  for (const auto& f : ds.frames) frames.push_back(&f);
  std::sort(frames.begin(), frames.end(),
            [](const AnnotatedFrame* a, const AnnotatedFrame* b) {
              return a->frame_id < b->frame_id;
            });
  std::string out = "frame_id,split\n";
  for (const auto* f : frames) {
    if (!f->split) throw std::invalid_argument("split_csv: untagged frame " + f->frame_id);
    out += f->frame_id + "," + split_name(*f->split) + "\n";
  }
  return out;
}

}  // namespace segeval
