#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace segeval {

enum class TransformKind { identity, rotation, scale, translation, mirror, blur };
enum class MirrorAxis { horizontal, vertical };

// One deterministic transform. Only the parameters of its kind are
// meaningful; validate() enforces the allowed parameter sets.
struct TransformSpec {
  TransformKind kind = TransformKind::identity;
  double rotation_deg = 0;    // in {0, 45, 90, ..., 315}
  double scale_factor = 1;    // in {1.25, 1.50, 1.75}
  double shift_x_frac = 0;    // in {-0.1, +0.1}, fraction of frame width
  double shift_y_frac = 0;    // in {-0.1, +0.1}, fraction of frame height
  MirrorAxis mirror_axis = MirrorAxis::horizontal;
  double blur_sigma = 0;      // in [0, 3]

  bool operator==(const TransformSpec&) const = default;

  static TransformSpec identity();
  static TransformSpec rotation(double deg);
  static TransformSpec scale(double factor);
  static TransformSpec translation(double u, double v);
  static TransformSpec mirror(MirrorAxis axis);
  static TransformSpec blur(double sigma);

  void validate() const;
  // Short stable token such as "rot045" or "scl175"; used in derived frame ids.
  std::string slug() const;
};

using TransformChain = std::vector<TransformSpec>;

std::string chain_slug(const TransformChain& chain);

enum class FillPolicy { mean_rgb, constant };

struct AugmentationConfig {
  // Offline transform grid; empty means identity only.
  std::vector<TransformChain> offline_grid;
  double preservation_threshold = 0.9;  // minimum kept area ratio per instance
  FillPolicy fill_policy = FillPolicy::mean_rgb;
  std::array<std::uint8_t, 3> fill_color{0, 0, 0};  // used when fill_policy == constant
  double online_flip_prob = 0.5;
  double online_blur_prob = 0.5;
  double online_sigma_lo = 0.0;
  double online_sigma_hi = 3.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// The 15 single-factor chains: 8 rotations (alpha = 0 is the identity),
// 3 scales, 4 corner translations.
std::vector<TransformChain> default_offline_grid();

// Identity, the 8 x 3 rotation-scale product, then the 4 translations.
std::vector<TransformChain> rotation_scale_grid();

// Canonical chain list for a config: no-op elements dropped, the identity
// chain present exactly once, order otherwise preserved.
std::vector<TransformChain> enumerate_offline_grid(const AugmentationConfig& cfg);

}  // namespace segeval
