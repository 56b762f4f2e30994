#include "segeval/synth.hpp"

#include "segeval/parallel.hpp"
#include "segeval/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace segeval {

namespace {

constexpr Rgb kBackground{35, 38, 42};

Rgb class_color(CategoryId id) {
  // Fixed palette cycled by id; distinct enough for visual inspection.
  static constexpr Rgb palette[] = {
      {190, 190, 200}, {220, 170, 90},  {120, 200, 140}, {90, 150, 220},
      {210, 110, 110}, {170, 140, 210}, {140, 200, 210}, {230, 210, 120},
      {150, 170, 120}, {200, 140, 180}, {120, 130, 160}, {180, 180, 140},
  };
  return palette[static_cast<std::size_t>(id - 1) % std::size(palette)];
}

struct Shape {
  // Capsule: segment from a to b with radius r. Rotated rect: center at
  // (a+b)/2, half-length |b-a|/2 + r along the axis, half-width r.
  double ax, ay, bx, by, r;
  ShapeFamily family;
};

bool inside(const Shape& s, double px, double py) {
  if (s.family == ShapeFamily::capsule) {
    const double dx = s.bx - s.ax, dy = s.by - s.ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - s.ax) * dx + (py - s.ay) * dy) / len2 : 0;
    t = std::clamp(t, 0.0, 1.0);
    const double qx = s.ax + t * dx - px, qy = s.ay + t * dy - py;
    return qx * qx + qy * qy <= s.r * s.r;
  }
  const double cx = (s.ax + s.bx) / 2, cy = (s.ay + s.by) / 2;
  double ux = s.bx - s.ax, uy = s.by - s.ay;
  const double len = std::hypot(ux, uy);
  if (len > 0) { ux /= len; uy /= len; }
  const double half_len = len / 2 + s.r;
  const double along = (px - cx) * ux + (py - cy) * uy;
  const double across = -(px - cx) * uy + (py - cy) * ux;
  return std::abs(along) <= half_len && std::abs(across) <= s.r;
}

Mask rasterize(const Shape& s, int w, int h) {
  Mask mask = Mask::Zero(h, w);
  const double reach = std::hypot(s.bx - s.ax, s.by - s.ay) / 2 + s.r + 1;
  const double cx = (s.ax + s.bx) / 2, cy = (s.ay + s.by) / 2;
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - reach)));
  const int x1 = std::min(w - 1, static_cast<int>(std::ceil(cx + reach)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - reach)));
  const int y1 = std::min(h - 1, static_cast<int>(std::ceil(cy + reach)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (inside(s, x + 0.5, y + 0.5)) mask(y, x) = 1;
  return mask;
}

Shape draw_shape(CounterRng& rng, const SceneConfig& cfg) {
  Shape s;
  s.family = cfg.shape;
  s.r = rng.uniform(cfg.min_radius, cfg.max_radius);
  const double len = rng.uniform(cfg.min_length, cfg.max_length);
  const double theta = rng.uniform(0, std::numbers::pi);

  double region_x0 = cfg.margin, region_y0 = cfg.margin;
  double region_x1 = cfg.width - cfg.margin, region_y1 = cfg.height - cfg.margin;
  if (cfg.central_square_only) {
    const double side = std::min(cfg.width, cfg.height) - 2.0 * cfg.margin;
    region_x0 = (cfg.width - side) / 2;
    region_x1 = region_x0 + side;
    region_y0 = (cfg.height - side) / 2;
    region_y1 = region_y0 + side;
  }

  // Shrink until the oriented extent fits the placement region.
  double half = len / 2;
  for (int tries = 0; tries < 64; ++tries) {
    const double ex = std::abs(std::cos(theta)) * half + s.r + 1;
    const double ey = std::abs(std::sin(theta)) * half + s.r + 1;
    if (region_x0 + ex < region_x1 - ex && region_y0 + ey < region_y1 - ey) {
      const double cx = rng.uniform(region_x0 + ex, region_x1 - ex);
      const double cy = rng.uniform(region_y0 + ey, region_y1 - ey);
      s.ax = cx - std::cos(theta) * half;
      s.ay = cy - std::sin(theta) * half;
      s.bx = cx + std::cos(theta) * half;
      s.by = cy + std::sin(theta) * half;
      return s;
    }
    half = std::max(half * 0.7, 1.0);
    s.r = std::max(s.r * 0.8, 1.0);
  }
  throw std::invalid_argument("scene region too small for the configured shapes");
}

CategoryId draw_class(CounterRng& rng, const SceneConfig& cfg, const Taxonomy& taxonomy) {
  if (cfg.class_weights.empty())
    return taxonomy[rng.uniform_int(0, static_cast<std::int64_t>(taxonomy.size()) - 1)].id;
  double total = 0;
  for (std::size_t i = 0; i < taxonomy.size(); ++i)
    total += i < cfg.class_weights.size() ? cfg.class_weights[i] : 0;
  double u = rng.next_unit() * total;
  for (std::size_t i = 0; i < taxonomy.size(); ++i) {
    const double w = i < cfg.class_weights.size() ? cfg.class_weights[i] : 0;
    if (u < w) return taxonomy[i].id;
    u -= w;
  }
  return taxonomy.back().id;
}

}  // namespace

void SceneConfig::validate() const {
  if (width < 8 || height < 8) throw std::invalid_argument("scene frame too small");
  if (min_instruments < 1 || max_instruments < min_instruments)
    throw std::invalid_argument("bad instruments-per-frame range");
  if (min_radius < 1 || max_radius < min_radius || min_length <= 0 ||
      max_length < min_length)
    throw std::invalid_argument("bad shape size range");
}

void PerturbationConfig::validate() const {
  auto prob = [](double p, const char* what) {
    if (p < 0 || p > 1) throw std::invalid_argument(std::string(what) + " outside [0,1]");
  };
  prob(drop_prob, "drop probability");
  prob(class_flip_prob, "class-flip probability");
  prob(score_noise, "score noise");
  if (jitter_px < 0) throw std::invalid_argument("jitter amplitude must be >= 0");
  if (spurious_rate < 0) throw std::invalid_argument("spurious rate must be >= 0");
}

std::string scene_frame_id(std::uint64_t frame_index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "synth%05llu", static_cast<unsigned long long>(frame_index));
  return buf;
}

FrameData generate_scene(const SceneConfig& cfg, const Taxonomy& taxonomy,
                         std::uint64_t frame_index) {
  cfg.validate();
  if (taxonomy.empty()) throw std::invalid_argument("generate_scene: empty taxonomy");
  CounterRng rng = CounterRng(cfg.seed).fork("scene").fork(frame_index);

  FrameData frame;
  frame.meta.frame_id = scene_frame_id(frame_index);
  frame.meta.width = cfg.width;
  frame.meta.height = cfg.height;
  frame.image = Image::filled(cfg.width, cfg.height, kBackground);

  const int n = static_cast<int>(rng.uniform_int(cfg.min_instruments, cfg.max_instruments));
  for (int i = 0; i < n; ++i) {
    const CategoryId cls = draw_class(rng, cfg, taxonomy);
    const Shape shape = draw_shape(rng, cfg);
    const Mask mask = rasterize(shape, cfg.width, cfg.height);
    if (mask_area(mask) < 1) continue;  // degenerate draw; keep the stream aligned

    Rgb color = class_color(cls);
    const int wobble = static_cast<int>(rng.uniform_int(-12, 12));
    for (auto& ch : color)
      ch = static_cast<std::uint8_t>(std::clamp(int(ch) + wobble, 0, 255));
    for (int y = 0; y < cfg.height; ++y)
      for (int x = 0; x < cfg.width; ++x)
        if (mask(y, x)) frame.image.set(x, y, color);

    frame.meta.instances.push_back(InstanceMask::from_dense(cls, mask));
  }
  return frame;
}

Dataset generate_dataset(const SceneConfig& cfg, const Taxonomy& taxonomy, int frames,
                         int threads) {
  Dataset ds;
  ds.taxonomy = taxonomy;
  ds.frames.resize(frames);
  parallel_for(frames, threads, [&](std::size_t i) {
    ds.frames[i] = generate_scene(cfg, taxonomy, i).meta;
  });
  return ds;
}

ImageLoader scene_image_loader(const SceneConfig& cfg, const Taxonomy& taxonomy) {
  return [cfg, taxonomy](const AnnotatedFrame& frame) {
    unsigned long long index = 0;
    if (std::sscanf(frame.frame_id.c_str(), "synth%llu", &index) != 1)
      throw std::invalid_argument("not a generated frame id: " + frame.frame_id);
    return generate_scene(cfg, taxonomy, index).image;
  };
}

std::vector<InstanceMask> perturb_predictions(const AnnotatedFrame& frame,
                                              const Taxonomy& taxonomy,
                                              const PerturbationConfig& pcfg) {
  pcfg.validate();
  CounterRng rng = CounterRng(pcfg.seed).fork("perturb").fork(frame.frame_id);
  std::vector<InstanceMask> preds;

  const int jitter = static_cast<int>(std::lround(pcfg.jitter_px));
  for (const auto& inst : frame.instances) {
    // Fixed draw count per instance keeps the stream aligned across configs.
    const double u_drop = rng.next_unit();
    const int dx = jitter > 0 ? static_cast<int>(rng.uniform_int(-jitter, jitter)) : 0;
    const int dy = jitter > 0 ? static_cast<int>(rng.uniform_int(-jitter, jitter)) : 0;
    if (jitter == 0) { rng.next_u64(); rng.next_u64(); }
    const double u_flip = rng.next_unit();
    const std::int64_t flip_pick = rng.uniform_int(0, std::max<std::int64_t>(1, taxonomy.size()) - 1);
    const double score = 1.0 - pcfg.score_noise * rng.next_unit();
    if (u_drop < pcfg.drop_prob) continue;

    Mask dense = rle_decode(inst.mask);
    if (dx != 0 || dy != 0) {
      Mask shifted = Mask::Zero(dense.rows(), dense.cols());
      const int h = static_cast<int>(dense.rows()), w = static_cast<int>(dense.cols());
      const int sy = std::max(0, dy), ey = std::min(h, h + dy);
      const int sx = std::max(0, dx), ex = std::min(w, w + dx);
      if (ey > sy && ex > sx)
        shifted.block(sy, sx, ey - sy, ex - sx) =
            dense.block(sy - dy, sx - dx, ey - sy, ex - sx);
      dense = std::move(shifted);
    }
    if (mask_area(dense) < 1) continue;  // jittered fully out of frame

    CategoryId cls = inst.category;
    if (u_flip < pcfg.class_flip_prob && taxonomy.size() > 1) {
      CategoryId other = taxonomy[flip_pick].id;
      if (other == cls) other = taxonomy[(flip_pick + 1) % taxonomy.size()].id;
      cls = other;
    }
    preds.push_back(InstanceMask::from_dense(cls, dense, score));
  }

  // Spurious detections at a low score band.
  const double expect = pcfg.spurious_rate;
  int spurious = static_cast<int>(std::floor(expect));
  if (rng.next_unit() < expect - std::floor(expect)) ++spurious;
  for (int i = 0; i < spurious; ++i) {
    SceneConfig blob;
    blob.width = frame.width;
    blob.height = frame.height;
    blob.min_length = 20;
    blob.max_length = 60;
    blob.min_radius = 4;
    blob.max_radius = 8;
    CounterRng blob_rng = rng.fork(i);
    const Shape shape = draw_shape(blob_rng, blob);
    const Mask mask = rasterize(shape, frame.width, frame.height);
    if (mask_area(mask) < 1) continue;
    const CategoryId cls =
        taxonomy[blob_rng.uniform_int(0, static_cast<std::int64_t>(taxonomy.size()) - 1)].id;
    const double score = 0.05 + 0.5 * blob_rng.next_unit();
    preds.push_back(InstanceMask::from_dense(cls, mask, score));
  }
  return preds;
}

PredictionSet perturb_dataset(const Dataset& ds, const PerturbationConfig& pcfg) {
  PredictionSet preds;
  for (const auto& frame : ds.frames)
    preds[frame.frame_id] = perturb_predictions(frame, ds.taxonomy, pcfg);
  return preds;
}

double expected_iou_under_shift(double w, double h, double d) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("rectangle sides must be positive");
  if (d < 0 || d >= w) throw std::invalid_argument("shift must satisfy 0 <= d < w");
  return ((w - d) * h) / ((w + d) * h);
}

}  // namespace segeval
