#include "segeval/augment.hpp"

#include "segeval/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace segeval {

namespace {

// Exact sin/cos at the quarter turns so those rotations stay pixel
// permutations instead of picking up sin(pi) rounding.
void sincos_deg(double deg, double& s, double& c) {
  const double norm = std::fmod(deg, 360.0);
  if (norm == 0) { s = 0; c = 1; return; }
  if (norm == 90 || norm == -270) { s = 1; c = 0; return; }
  if (norm == 180 || norm == -180) { s = 0; c = -1; return; }
  if (norm == 270 || norm == -90) { s = -1; c = 0; return; }
  const double rad = deg * std::numbers::pi / 180.0;
  s = std::sin(rad);
  c = std::cos(rad);
}

Eigen::Matrix3d spec_matrix(const TransformSpec& t, int w, int h) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  const double cx = w / 2.0, cy = h / 2.0;
  switch (t.kind) {
    case TransformKind::identity:
      return m;
    case TransformKind::rotation: {
      double s, c;
      sincos_deg(t.rotation_deg, s, c);
      m(0, 0) = c; m(0, 1) = -s; m(0, 2) = cx - c * cx + s * cy;
      m(1, 0) = s; m(1, 1) = c;  m(1, 2) = cy - s * cx - c * cy;
      return m;
    }
    case TransformKind::scale: {
      const double c = t.scale_factor;
      m(0, 0) = c; m(0, 2) = cx * (1 - c);
      m(1, 1) = c; m(1, 2) = cy * (1 - c);
      return m;
    }
    case TransformKind::translation:
      m(0, 2) = t.shift_x_frac * w;
      m(1, 2) = t.shift_y_frac * h;
      return m;
    case TransformKind::mirror:
      if (t.mirror_axis == MirrorAxis::horizontal) {
        m(0, 0) = -1; m(0, 2) = w;  // left-right
      } else {
        m(1, 1) = -1; m(1, 2) = h;  // top-bottom
      }
      return m;
    case TransformKind::blur:
      throw std::invalid_argument("chain_matrix: blur is not an affine transform");
  }
  throw std::invalid_argument("chain_matrix: unknown transform kind");
}

}  // namespace

Eigen::Matrix3d chain_matrix(const TransformChain& chain, int width, int height) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  for (const auto& t : chain) m = spec_matrix(t, width, height) * m;
  return m;
}

Image warp_image(const Image& img, const Eigen::Matrix3d& forward, Rgb fill) {
  const int w = img.width(), h = img.height();
  const Eigen::Matrix3d inv = forward.inverse();
  Image out = Image::filled(w, h, fill);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = inv(0, 0) * (x + 0.5) + inv(0, 1) * (y + 0.5) + inv(0, 2);
      const double sy = inv(1, 0) * (x + 0.5) + inv(1, 1) * (y + 0.5) + inv(1, 2);
      if (sx < 0 || sx > w || sy < 0 || sy > h) continue;
      const double gx = sx - 0.5, gy = sy - 0.5;
      const int x0 = static_cast<int>(std::floor(gx));
      const int y0 = static_cast<int>(std::floor(gy));
      const double fx = gx - x0, fy = gy - y0;
      auto cl = [](int v, int hi) { return v < 0 ? 0 : (v >= hi ? hi - 1 : v); };
      const int xa = cl(x0, w), xb = cl(x0 + 1, w);
      const int ya = cl(y0, h), yb = cl(y0 + 1, h);
      auto lerp2 = [&](const Plane<std::uint8_t>& p) {
        const double top = (1 - fx) * p(ya, xa) + fx * p(ya, xb);
        const double bot = (1 - fx) * p(yb, xa) + fx * p(yb, xb);
        const double v = (1 - fy) * top + fy * bot;
        return static_cast<std::uint8_t>(std::lround(std::min(std::max(v, 0.0), 255.0)));
      };
      out.set(x, y, {lerp2(img.r), lerp2(img.g), lerp2(img.b)});
    }
  }
  return out;
}

Mask warp_mask(const Mask& mask, const Eigen::Matrix3d& forward) {
  const int w = static_cast<int>(mask.cols()), h = static_cast<int>(mask.rows());
  const Eigen::Matrix3d inv = forward.inverse();
  Mask out = Mask::Zero(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = inv(0, 0) * (x + 0.5) + inv(0, 1) * (y + 0.5) + inv(0, 2);
      const double sy = inv(1, 0) * (x + 0.5) + inv(1, 1) * (y + 0.5) + inv(1, 2);
      const int ix = static_cast<int>(std::floor(sx));
      const int iy = static_cast<int>(std::floor(sy));
      if (ix < 0 || ix >= w || iy < 0 || iy >= h) continue;
      out(y, x) = mask(iy, ix) ? 1 : 0;
    }
  }
  return out;
}

FrameData apply_affine(const FrameData& frame, const TransformChain& chain, Rgb fill) {
  for (const auto& t : chain)
    if (t.kind == TransformKind::blur)
      throw std::invalid_argument("apply_affine: blur is handled by apply_blur");
  if (chain.empty()) return frame;

  const Eigen::Matrix3d m = chain_matrix(chain, frame.meta.width, frame.meta.height);
  FrameData out;
  out.meta = frame.meta;
  out.meta.provenance.insert(out.meta.provenance.end(), chain.begin(), chain.end());
  out.image = warp_image(frame.image, m, fill);
  for (auto& inst : out.meta.instances) {
    const Mask warped = warp_mask(rle_decode(inst.mask), m);
    inst = InstanceMask::from_rle(inst.category, rle_encode(warped), inst.score);
  }
  return out;
}

FrameData apply_affine(const FrameData& frame, const TransformSpec& t, Rgb fill) {
  return apply_affine(frame, TransformChain{t}, fill);
}

FrameData apply_blur(const FrameData& frame, double sigma) {
  FrameData out;
  out.meta = frame.meta;
  out.meta.provenance.push_back(TransformSpec::blur(sigma));
  out.image = blur_image(frame.image, sigma);
  return out;
}

double preservation_ratio(const InstanceMask& original, const InstanceMask& transformed,
                          const TransformChain& chain) {
  double expected = static_cast<double>(original.area);
  for (const auto& t : chain)
    if (t.kind == TransformKind::scale) expected *= t.scale_factor * t.scale_factor;
  if (expected <= 0) return 0;
  return static_cast<double>(transformed.area) / expected;
}

double preservation_ratio(const InstanceMask& original, const InstanceMask& transformed,
                          const TransformSpec& t) {
  return preservation_ratio(original, transformed, TransformChain{t});
}

AugmentResult offline_augment(const Dataset& ds, const AugmentationConfig& cfg,
                              const ImageLoader& load, const FrameSink& sink,
                              int threads) {
  cfg.validate();
  const std::vector<TransformChain> grid = enumerate_offline_grid(cfg);

  AugmentResult result;
  result.dataset.taxonomy = ds.taxonomy;

  struct Output {
    AnnotatedFrame meta;
    Image image;
    bool kept = true;
    std::string chain;
  };

  // Frames are processed in chunks: compute in parallel, emit in order.
  const std::size_t chunk = std::max<std::size_t>(4, static_cast<std::size_t>(std::max(threads, 1)) * 2);
  for (std::size_t base = 0; base < ds.frames.size(); base += chunk) {
    const std::size_t count = std::min(chunk, ds.frames.size() - base);
    std::vector<std::vector<Output>> slots(count);
    parallel_for(count, threads, [&](std::size_t i) {
      const AnnotatedFrame& src = ds.frames[base + i];
      FrameData original{src, load(src)};
      const bool augment = !src.split || *src.split == Split::train;
      const Rgb fill = cfg.fill_policy == FillPolicy::mean_rgb ? mean_rgb(original.image)
                                                               : cfg.fill_color;
      auto& outs = slots[i];
      for (const auto& chain : grid) {
        if (chain.empty()) {
          outs.push_back({original.meta, original.image, true, ""});
          continue;
        }
        if (!augment) continue;
        FrameData warped = apply_affine(original, chain, fill);
        bool keep = true;
        for (std::size_t k = 0; k < src.instances.size(); ++k) {
          if (preservation_ratio(src.instances[k], warped.meta.instances[k], chain) <
              cfg.preservation_threshold) {
            keep = false;
            break;
          }
        }
        Output out;
        out.kept = keep;
        out.chain = chain_slug(chain);
        if (keep) {
          warped.meta.frame_id = src.frame_id + "/" + out.chain;
          out.meta = std::move(warped.meta);
          out.image = std::move(warped.image);
        }
        outs.push_back(std::move(out));
      }
    });
    for (auto& outs : slots) {
      for (auto& out : outs) {
        if (!out.kept) {
          ++result.dropped;
          ++result.dropped_by_chain[out.chain];
          continue;
        }
        if (!out.chain.empty()) ++result.kept;
        out.meta.image_ref = sink(out.meta, out.image);
        result.dataset.frames.push_back(std::move(out.meta));
      }
    }
  }
  return result;
}

CounterRng online_rng(std::uint64_t seed, const std::string& frame_id, std::uint64_t epoch) {
  return CounterRng(seed).fork(frame_id).fork(epoch);
}

FrameData online_sample(const FrameData& frame, const AugmentationConfig& cfg,
                        CounterRng& rng) {
  cfg.validate();
  // Fixed draw count per sample keeps streams aligned regardless of outcome.
  const double u_flip = rng.next_unit();
  const bool horizontal = rng.next_unit() < 0.5;
  const double u_blur = rng.next_unit();
  const double sigma = rng.uniform(cfg.online_sigma_lo, cfg.online_sigma_hi);

  FrameData out = frame;
  if (u_flip < cfg.online_flip_prob) {
    out = apply_affine(out, TransformSpec::mirror(horizontal ? MirrorAxis::horizontal
                                                             : MirrorAxis::vertical),
                       Rgb{0, 0, 0});
  }
  if (u_blur < cfg.online_blur_prob) out = apply_blur(out, sigma);
  return out;
}

}  // namespace segeval
