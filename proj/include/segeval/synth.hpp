#pragma once

#include "segeval/augment.hpp"
#include "segeval/dataset_io.hpp"
#include "segeval/model.hpp"

#include <cstdint>
#include <vector>

namespace segeval {

enum class ShapeFamily { capsule, rotated_rect };

// Synthetic scenes with tool-like elongated shapes and exact masks.
struct SceneConfig {
  int width = 540;
  int height = 360;
  int min_instruments = 1;
  int max_instruments = 3;
  ShapeFamily shape = ShapeFamily::capsule;
  double min_length = 60;   // body length between the cap centers, px
  double max_length = 160;
  double min_radius = 6;    // half-width, px
  double max_radius = 14;
  int margin = 4;           // clearance from the frame border
  bool central_square_only = false;  // confine shapes to the centered square
  std::vector<double> class_weights;  // over the taxonomy; empty = uniform
  std::uint64_t seed = 0;

  void validate() const;
};

struct PerturbationConfig {
  double jitter_px = 0;       // boundary jitter amplitude, px
  double drop_prob = 0;
  double spurious_rate = 0;   // expected spurious instances per frame
  double class_flip_prob = 0;
  double score_noise = 0.5;   // true-instance scores drawn from (1 - noise, 1]
  std::uint64_t seed = 0;

  void validate() const;
};

// Deterministic given (cfg.seed, frame_index); parallel generation safe.
FrameData generate_scene(const SceneConfig& cfg, const Taxonomy& taxonomy,
                         std::uint64_t frame_index);

// Metadata-only dataset of `frames` scenes (images regenerated on demand
// through scene_image_loader).
Dataset generate_dataset(const SceneConfig& cfg, const Taxonomy& taxonomy, int frames,
                         int threads = 1);

// Loader that re-renders a generated frame's pixels from its frame id.
ImageLoader scene_image_loader(const SceneConfig& cfg, const Taxonomy& taxonomy);

std::string scene_frame_id(std::uint64_t frame_index);

// Noisy copy of a frame's ground truth: instances dropped, masks shifted by
// up to jitter_px per axis, classes flipped, spurious instances injected,
// scores drawn from the configured band.
std::vector<InstanceMask> perturb_predictions(const AnnotatedFrame& frame,
                                              const Taxonomy& taxonomy,
                                              const PerturbationConfig& pcfg);
PredictionSet perturb_dataset(const Dataset& ds, const PerturbationConfig& pcfg);

// IoU of an axis-aligned w x h rectangle with a copy shifted by d along the
// width axis: (w - d) / (w + d). Requires d < w.
double expected_iou_under_shift(double w, double h, double d);

}  // namespace segeval
