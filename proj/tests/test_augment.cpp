#include "segeval/augment.hpp"

#include "segeval/rng.hpp"

#include <doctest.h>

#include <map>

namespace {

using namespace segeval;

Mask blob(int w, int h, int x0, int y0, int bw, int bh) {
  Mask m = Mask::Zero(h, w);
  m.block(y0, x0, bh, bw).setConstant(1);
  return m;
}

FrameData make_frame(int w = 64, int h = 64) {
  FrameData fd;
  fd.meta.frame_id = "f000";
  fd.meta.width = w;
  fd.meta.height = h;
  fd.meta.instances.push_back(InstanceMask::from_dense(2, blob(w, h, w / 4, h / 4, 10, 6)));
  fd.image = Image::filled(w, h, {40, 40, 40});
  CounterRng rng(11);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      fd.image.set(x, y, {std::uint8_t(rng.uniform_int(0, 255)),
                          std::uint8_t(rng.uniform_int(0, 255)),
                          std::uint8_t(rng.uniform_int(0, 255))});
  return fd;
}

bool same_masks(const AnnotatedFrame& a, const AnnotatedFrame& b) {
  if (a.instances.size() != b.instances.size()) return false;
  for (std::size_t i = 0; i < a.instances.size(); ++i)
    if (!(a.instances[i].mask == b.instances[i].mask)) return false;
  return true;
}

}  // namespace

TEST_CASE("identity transform is bit-exact") {
  const FrameData fd = make_frame();
  const FrameData out = apply_affine(fd, TransformSpec::identity(), {0, 0, 0});
  CHECK(out.image == fd.image);
  CHECK(same_masks(out.meta, fd.meta));
}

TEST_CASE("mirrors are involutions") {
  const FrameData fd = make_frame(37, 21);  // odd sizes included
  for (MirrorAxis axis : {MirrorAxis::horizontal, MirrorAxis::vertical}) {
    const auto spec = TransformSpec::mirror(axis);
    const FrameData once = apply_affine(fd, spec, {0, 0, 0});
    CHECK_FALSE(once.image == fd.image);
    const FrameData twice = apply_affine(once, spec, {0, 0, 0});
    CHECK(twice.image == fd.image);
    CHECK(same_masks(twice.meta, fd.meta));
    CHECK(twice.meta.provenance.size() == 2);
  }
}

TEST_CASE("180 degree rotation is an involution on masks") {
  const FrameData fd = make_frame(48, 32);
  const auto spec = TransformSpec::rotation(180);
  const FrameData twice =
      apply_affine(apply_affine(fd, spec, {9, 9, 9}), spec, {9, 9, 9});
  CHECK(same_masks(twice.meta, fd.meta));
}

TEST_CASE("four quarter turns reproduce masks bit-exactly") {
  FrameData fd = make_frame(64, 64);
  FrameData cur = fd;
  for (int i = 0; i < 4; ++i) cur = apply_affine(cur, TransformSpec::rotation(90), {0, 0, 0});
  CHECK(same_masks(cur.meta, fd.meta));
  CHECK(cur.meta.provenance.size() == 4);
}

TEST_CASE("area-preserving transforms keep unclipped areas within 5 percent") {
  FrameData fd = make_frame(128, 128);
  fd.meta.instances[0] = InstanceMask::from_dense(2, blob(128, 128, 40, 50, 30, 20));
  const std::int64_t original = fd.meta.instances[0].area;
  for (const auto& spec :
       {TransformSpec::rotation(45), TransformSpec::rotation(135),
        TransformSpec::translation(0.1, -0.1), TransformSpec::mirror(MirrorAxis::vertical)}) {
    const FrameData out = apply_affine(fd, spec, {0, 0, 0});
    const double rel =
        std::abs(double(out.meta.instances[0].area) - double(original)) / double(original);
    CAPTURE(spec.slug());
    CHECK(rel <= 0.05);
  }
}

TEST_CASE("scaling scales areas by c squared") {
  FrameData fd = make_frame(256, 256);
  fd.meta.instances[0] = InstanceMask::from_dense(2, blob(256, 256, 100, 110, 50, 40));
  const double original = static_cast<double>(fd.meta.instances[0].area);
  for (double c : {1.25, 1.5, 1.75}) {
    const FrameData out = apply_affine(fd, TransformSpec::scale(c), {0, 0, 0});
    const double ratio = double(out.meta.instances[0].area) / (original * c * c);
    CHECK(ratio == doctest::Approx(1.0).epsilon(0.05));
    CHECK(preservation_ratio(fd.meta.instances[0], out.meta.instances[0],
                             TransformSpec::scale(c)) == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("corner-anchored scale clipping matches the analytic overlap") {
  // A square anchored at the frame corner: scaling about the center pushes
  // part of it out, and the kept ratio equals the in-frame fraction of the
  // scaled rectangle.
  const int W = 200, H = 200;
  FrameData fd;
  fd.meta.frame_id = "corner";
  fd.meta.width = W;
  fd.meta.height = H;
  fd.meta.instances.push_back(InstanceMask::from_dense(1, blob(W, H, 0, 0, 60, 60)));
  fd.image = Image::filled(W, H, {0, 0, 0});

  const double c = 1.75;
  const auto spec = TransformSpec::scale(c);
  const FrameData out = apply_affine(fd, spec, {0, 0, 0});

  // Scaled rectangle: [cx + (0-cx)c, cx + (60-cx)c) = [-75, 30) along each
  // axis; the in-frame part is [0, 30) x [0, 30).
  const double visible = 30.0 * 30.0;
  const double expected_ratio = visible / (60.0 * 60.0 * c * c);
  const double ratio =
      preservation_ratio(fd.meta.instances[0], out.meta.instances[0], spec);
  CHECK(ratio == doctest::Approx(expected_ratio).epsilon(0.05));
  CHECK(out.meta.instances[0].area ==
        mask_area(rle_decode(out.meta.instances[0].mask)));  // pixel-count oracle
}

TEST_CASE("empty grid passes the dataset through unchanged") {
  Dataset ds;
  ds.taxonomy = default_taxonomy();
  AnnotatedFrame frame;
  frame.frame_id = "solo";
  frame.width = 32;
  frame.height = 32;
  frame.instances.push_back(InstanceMask::from_dense(4, blob(32, 32, 8, 8, 6, 6)));
  ds.frames.push_back(frame);

  AugmentationConfig cfg;  // no grid configured
  const ImageLoader loader = [](const AnnotatedFrame& f) {
    return Image::filled(f.width, f.height, {5, 6, 7});
  };
  int sunk = 0;
  const FrameSink sink = [&sunk](const AnnotatedFrame&, const Image&) {
    ++sunk;
    return std::string();
  };
  const AugmentResult result = offline_augment(ds, cfg, loader, sink);
  CHECK(result.dataset.frames.size() == 1);
  CHECK(result.kept == 0);
  CHECK(result.dropped == 0);
  CHECK(sunk == 1);
  CHECK(result.dataset.frames[0].frame_id == "solo");
  CHECK(result.dataset.frames[0].provenance.empty());
  CHECK(result.dataset.frames[0].instances[0].mask == frame.instances[0].mask);
}

TEST_CASE("blur in a chain is rejected") {
  const FrameData fd = make_frame();
  CHECK_THROWS(apply_affine(fd, TransformSpec::blur(1.0), {0, 0, 0}));
}

TEST_CASE("preservation ratio of a full exit is exactly zero") {
  FrameData fd;
  fd.meta.frame_id = "edge";
  fd.meta.width = 100;
  fd.meta.height = 50;
  fd.meta.instances.push_back(InstanceMask::from_dense(1, blob(100, 50, 0, 10, 8, 8)));
  fd.image = Image::filled(100, 50, {10, 10, 10});
  // 10% of width = 10 px leftward pushes the 8 px wide blob fully out.
  const auto spec = TransformSpec::translation(-0.1, 0.1);
  const FrameData out = apply_affine(fd, spec, {0, 0, 0});
  CHECK(out.meta.instances[0].area == 0);
  CHECK(preservation_ratio(fd.meta.instances[0], out.meta.instances[0], spec) == 0.0);
}

TEST_CASE("offline augment keeps/drops by the area threshold") {
  // Instance hugging the left edge, 30 px wide in a 100 px frame: a -10%
  // translation keeps 20/30 of it.
  Dataset ds;
  ds.taxonomy = default_taxonomy();
  AnnotatedFrame frame;
  frame.frame_id = "edge";
  frame.width = 100;
  frame.height = 60;
  frame.instances.push_back(InstanceMask::from_dense(3, blob(100, 60, 0, 20, 30, 10)));
  ds.frames.push_back(frame);

  AugmentationConfig cfg;
  cfg.offline_grid = {{TransformSpec::translation(-0.1, 0.1)}};
  const ImageLoader loader = [](const AnnotatedFrame& f) {
    return Image::filled(f.width, f.height, {0, 0, 0});
  };
  const FrameSink sink = [](const AnnotatedFrame&, const Image&) { return std::string(); };

  cfg.preservation_threshold = 0.9;
  auto strict = offline_augment(ds, cfg, loader, sink);
  CHECK(strict.dataset.frames.size() == 1);  // original only
  CHECK(strict.dropped == 1);

  cfg.preservation_threshold = 0.1;
  auto lax = offline_augment(ds, cfg, loader, sink);
  CHECK(lax.dataset.frames.size() == 2);
  CHECK(lax.dataset.frames[1].frame_id == "edge/trlmp");
  CHECK(lax.dataset.frames[1].provenance.size() == 1);
}

TEST_CASE("offline augment emits the full grid for interior masks") {
  Dataset ds;
  ds.taxonomy = default_taxonomy();
  AnnotatedFrame frame;
  frame.frame_id = "center";
  frame.width = 120;
  frame.height = 120;
  frame.instances.push_back(InstanceMask::from_dense(5, blob(120, 120, 55, 55, 10, 10)));
  ds.frames.push_back(frame);

  AugmentationConfig cfg;
  cfg.offline_grid = default_offline_grid();
  cfg.preservation_threshold = 1e-9;
  const ImageLoader loader = [](const AnnotatedFrame& f) {
    return Image::filled(f.width, f.height, {50, 60, 70});
  };
  const FrameSink sink = [](const AnnotatedFrame&, const Image&) { return std::string(); };
  const auto result = offline_augment(ds, cfg, loader, sink);
  CHECK(result.dataset.frames.size() == 15);
  CHECK(result.dropped == 0);
  // Label preservation: same category multiset everywhere.
  for (const auto& f : result.dataset.frames) {
    REQUIRE(f.instances.size() == 1);
    CHECK(f.instances[0].category == 5);
    CHECK(f.instances[0].area >= 1);
  }
  // The identity output is the original, bit for bit.
  CHECK(result.dataset.frames[0].frame_id == "center");
  CHECK(result.dataset.frames[0].provenance.empty());
  CHECK(result.dataset.frames[0].instances[0].mask == frame.instances[0].mask);
}

TEST_CASE("offline augment only touches train or untagged frames") {
  Dataset ds;
  ds.taxonomy = default_taxonomy();
  for (int i = 0; i < 3; ++i) {
    AnnotatedFrame f;
    f.frame_id = "f" + std::to_string(i);
    f.width = 64;
    f.height = 64;
    f.instances.push_back(InstanceMask::from_dense(1, blob(64, 64, 24, 24, 8, 8)));
    ds.frames.push_back(f);
  }
  ds.frames[0].split = Split::train;
  ds.frames[1].split = Split::val;
  ds.frames[2].split = Split::test;

  AugmentationConfig cfg;
  cfg.offline_grid = {{TransformSpec::rotation(90)}};
  const ImageLoader loader = [](const AnnotatedFrame& f) {
    return Image::filled(f.width, f.height, {0, 0, 0});
  };
  const FrameSink sink = [](const AnnotatedFrame&, const Image&) { return std::string(); };
  const auto result = offline_augment(ds, cfg, loader, sink);
  REQUIRE(result.dataset.frames.size() == 4);
  CHECK(result.dataset.frames[0].frame_id == "f0");
  CHECK(result.dataset.frames[1].frame_id == "f0/rot090");
  CHECK(result.dataset.frames[1].split == Split::train);
  CHECK(result.dataset.frames[2].frame_id == "f1");
  CHECK(result.dataset.frames[3].frame_id == "f2");
}

TEST_CASE("offline augment output is identical across thread counts") {
  Dataset ds;
  ds.taxonomy = default_taxonomy();
  CounterRng rng(3);
  for (int i = 0; i < 6; ++i) {
    AnnotatedFrame f;
    f.frame_id = "f" + std::to_string(i);
    f.width = 80;
    f.height = 80;
    const int x = static_cast<int>(rng.uniform_int(5, 50));
    const int y = static_cast<int>(rng.uniform_int(5, 50));
    f.instances.push_back(InstanceMask::from_dense(1 + i % 3, blob(80, 80, x, y, 12, 9)));
    ds.frames.push_back(f);
  }
  AugmentationConfig cfg;
  cfg.offline_grid = default_offline_grid();
  const ImageLoader loader = [](const AnnotatedFrame& f) {
    return Image::filled(f.width, f.height, {1, 2, 3});
  };

  auto run = [&](int threads) {
    std::vector<std::pair<std::string, std::int64_t>> order;
    const FrameSink sink = [&order](const AnnotatedFrame& meta, const Image& img) {
      order.emplace_back(meta.frame_id, std::int64_t(img.r.sum()));
      return std::string();
    };
    auto result = offline_augment(ds, cfg, loader, sink, threads);
    return std::make_pair(order, result.dataset.frames.size());
  };
  const auto ref = run(1);
  CHECK(run(4) == ref);
  CHECK(run(8) == ref);
}

TEST_CASE("online sampling with zero probabilities is the identity") {
  const FrameData fd = make_frame();
  AugmentationConfig cfg;
  cfg.online_flip_prob = 0;
  cfg.online_blur_prob = 0;
  CounterRng rng = online_rng(1, fd.meta.frame_id, 0);
  const FrameData out = online_sample(fd, cfg, rng);
  CHECK(out.image == fd.image);
  CHECK(same_masks(out.meta, fd.meta));
}

TEST_CASE("online sampling replays identically for a seed") {
  const FrameData fd = make_frame();
  AugmentationConfig cfg;
  cfg.online_flip_prob = 1;
  cfg.online_blur_prob = 0;
  CounterRng r1 = online_rng(9, fd.meta.frame_id, 4);
  CounterRng r2 = online_rng(9, fd.meta.frame_id, 4);
  const FrameData a = online_sample(fd, cfg, r1);
  const FrameData b = online_sample(fd, cfg, r2);
  CHECK(a.image == b.image);
  CHECK_FALSE(a.image == fd.image);  // flipped
  CHECK(a.meta.provenance.size() == 1);
  CHECK(a.meta.provenance[0].kind == TransformKind::mirror);
}

TEST_CASE("online flip frequency tracks the configured probability") {
  FrameData fd;
  fd.meta.frame_id = "mc";
  fd.meta.width = 4;
  fd.meta.height = 4;
  fd.image = Image::filled(4, 4, {0, 0, 0});
  fd.image.set(0, 0, {255, 255, 255});  // asymmetry to detect flips

  AugmentationConfig cfg;
  cfg.online_flip_prob = 0.5;
  cfg.online_blur_prob = 0.5;
  cfg.seed = 123;
  int flips = 0;
  const int n = 10000;
  for (int epoch = 0; epoch < n; ++epoch) {
    CounterRng rng = online_rng(cfg.seed, fd.meta.frame_id, epoch);
    const FrameData out = online_sample(fd, cfg, rng);
    if (!out.meta.provenance.empty() &&
        out.meta.provenance[0].kind == TransformKind::mirror)
      ++flips;
  }
  CHECK(std::abs(flips / double(n) - 0.5) < 0.02);
}

TEST_CASE("blur never changes any mask bit and masks are never blurred") {
  const FrameData fd = make_frame();
  const FrameData out = apply_blur(fd, 2.0);
  CHECK(same_masks(out.meta, fd.meta));
  CHECK_FALSE(out.image == fd.image);
}
