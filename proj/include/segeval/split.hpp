#pragma once

#include "segeval/model.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace segeval {

struct SplitConfig {
  double train_fraction = 0.6;
  double val_fraction = 0.2;
  double test_fraction = 0.2;
  int quota = 7;            // target instances per category in val and in test
  int quota_tolerance = 1;  // +- instances before a count scores as a violation
  std::uint64_t seed = 0;
  int max_attempts = 8;
  bool best_effort = false;  // tolerate classes with fewer than 2*quota instances
  bool force = false;        // allow re-splitting an already tagged dataset

  void validate() const;
};

struct SplitOutcome {
  Dataset dataset;        // every frame tagged
  double violation_score; // L1 quota violation beyond tolerance, val + test
  int attempt;            // restart that produced the winning assignment
};

// Frame-level stratified split. Frames are atomic (all instances travel
// together); frame counts land within one frame of the fraction targets;
// randomized restarts with greedy swap repair minimize the quota violation.
// Deterministic for a given seed at any thread count.
SplitOutcome stratified_split(const Dataset& ds, const SplitConfig& cfg, int threads = 1);

struct SplitReportRow {
  Split split;
  std::int64_t frames = 0;
  std::map<CategoryId, std::int64_t> instances;
};

// Per-split frame and per-class instance counts; throws on untagged frames.
std::vector<SplitReportRow> split_report(const Dataset& ds);

// "frame_id,split" CSV in canonical frame order.
std::string split_csv(const Dataset& ds);

}  // namespace segeval
