#pragma once

#include "segeval/image.hpp"
#include "segeval/model.hpp"
#include "segeval/rng.hpp"
#include "segeval/transform.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <string>

namespace segeval {

// Frame metadata together with its pixels.
struct FrameData {
  AnnotatedFrame meta;
  Image image;
};

// Forward pixel-space map of a chain (blur entries are rejected).
// Rotation and scale act about the frame center; the output keeps the
// input dimensions.
Eigen::Matrix3d chain_matrix(const TransformChain& chain, int width, int height);

// Bilinear resampling; source points outside the image take the fill color.
Image warp_image(const Image& img, const Eigen::Matrix3d& forward, Rgb fill);

// Nearest-neighbor resampling; outside points are background.
Mask warp_mask(const Mask& mask, const Eigen::Matrix3d& forward);

// Applies a geometric chain to pixels and masks. Masks are resampled
// nearest-neighbor and stay binary; boxes and areas are recomputed; the
// provenance chain is extended. A mask pushed fully outside comes back with
// area 0 and an empty box (offline_augment drops such frames).
FrameData apply_affine(const FrameData& frame, const TransformChain& chain, Rgb fill);
FrameData apply_affine(const FrameData& frame, const TransformSpec& t, Rgb fill);

// Blurs pixels only; masks are never touched.
FrameData apply_blur(const FrameData& frame, double sigma);

// Kept-area ratio of a transformed instance relative to what the chain
// should produce: original area scaled by c^2 per scale step, unchanged
// otherwise. 1.0 means the label survived intact (up to rasterization).
double preservation_ratio(const InstanceMask& original, const InstanceMask& transformed,
                          const TransformChain& chain);
double preservation_ratio(const InstanceMask& original, const InstanceMask& transformed,
                          const TransformSpec& t);

using ImageLoader = std::function<Image(const AnnotatedFrame&)>;
// Persists one output frame; returns the stored image_ref (may be empty).
using FrameSink = std::function<std::string(const AnnotatedFrame&, const Image&)>;

struct AugmentResult {
  Dataset dataset;
  std::int64_t kept = 0;     // augmented frames kept by the area filter
  std::int64_t dropped = 0;  // augmented frames rejected
  std::map<std::string, std::int64_t> dropped_by_chain;
};

// Offline stage: every train (or untagged) frame crossed with the offline
// grid. A transformed frame is kept only when every instance keeps at least
// preservation_threshold of its expected area. The identity chain passes the
// original frame through unchanged, so sources are always retained; val/test
// frames pass through untouched. Output order is (frame, chain) and is
// byte-identical for any thread count.
AugmentResult offline_augment(const Dataset& ds, const AugmentationConfig& cfg,
                              const ImageLoader& load, const FrameSink& sink,
                              int threads = 1);

// RNG stream for one (seed, frame, epoch) triple; replay-safe.
CounterRng online_rng(std::uint64_t seed, const std::string& frame_id, std::uint64_t epoch);

// Online stage: with flip probability mirror along a uniformly chosen axis,
// independently with blur probability blur with sigma ~ U[lo, hi]. Masks are
// flipped but never blurred. Consumes a fixed number of draws from rng.
FrameData online_sample(const FrameData& frame, const AugmentationConfig& cfg,
                        CounterRng& rng);

}  // namespace segeval
