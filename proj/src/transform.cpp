#include "segeval/transform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace segeval {

namespace {

bool in_set(double v, std::initializer_list<double> set) {
  return std::any_of(set.begin(), set.end(),
                     [v](double s) { return std::abs(v - s) < 1e-12; });
}

bool is_noop(const TransformSpec& t) {
  switch (t.kind) {
    case TransformKind::identity: return true;
    case TransformKind::rotation: return t.rotation_deg == 0;
    case TransformKind::scale: return t.scale_factor == 1;
    case TransformKind::translation: return t.shift_x_frac == 0 && t.shift_y_frac == 0;
    case TransformKind::blur: return t.blur_sigma == 0;
    case TransformKind::mirror: return false;
  }
  return false;
}

TransformChain canonical_chain(const TransformChain& chain) {
  TransformChain out;
  for (const auto& t : chain)
    if (!is_noop(t)) out.push_back(t);
  return out;
}

}  // namespace

TransformSpec TransformSpec::identity() { return {}; }

TransformSpec TransformSpec::rotation(double deg) {
  TransformSpec t;
  t.kind = TransformKind::rotation;
  t.rotation_deg = deg;
  return t;
}

TransformSpec TransformSpec::scale(double factor) {
  TransformSpec t;
  t.kind = TransformKind::scale;
  t.scale_factor = factor;
  return t;
}

TransformSpec TransformSpec::translation(double u, double v) {
  TransformSpec t;
  t.kind = TransformKind::translation;
  t.shift_x_frac = u;
  t.shift_y_frac = v;
  return t;
}

TransformSpec TransformSpec::mirror(MirrorAxis axis) {
  TransformSpec t;
  t.kind = TransformKind::mirror;
  t.mirror_axis = axis;
  return t;
}

TransformSpec TransformSpec::blur(double sigma) {
  TransformSpec t;
  t.kind = TransformKind::blur;
  t.blur_sigma = sigma;
  return t;
}

void TransformSpec::validate() const {
  switch (kind) {
    case TransformKind::identity:
      return;
    case TransformKind::rotation:
      if (!in_set(rotation_deg, {0, 45, 90, 135, 180, 225, 270, 315}))
        throw std::invalid_argument("rotation angle outside {0,45,...,315}");
      return;
    case TransformKind::scale:
      if (!in_set(scale_factor, {1.25, 1.50, 1.75}))
        throw std::invalid_argument("scale factor outside {1.25,1.50,1.75}");
      return;
    case TransformKind::translation:
      if (!in_set(shift_x_frac, {-0.1, 0.1}) || !in_set(shift_y_frac, {-0.1, 0.1}))
        throw std::invalid_argument("translation fraction outside {-0.1,+0.1}");
      return;
    case TransformKind::mirror:
      return;
    case TransformKind::blur:
      if (blur_sigma < 0 || blur_sigma > 3.0)
        throw std::invalid_argument("blur sigma outside [0,3]");
      return;
  }
  throw std::invalid_argument("unknown transform kind");
}

std::string TransformSpec::slug() const {
  char buf[32];
  switch (kind) {
    case TransformKind::identity:
      return "id";
    case TransformKind::rotation:
      std::snprintf(buf, sizeof buf, "rot%03d", static_cast<int>(std::lround(rotation_deg)));
      return buf;
    case TransformKind::scale:
      std::snprintf(buf, sizeof buf, "scl%03d", static_cast<int>(std::lround(scale_factor * 100)));
      return buf;
    case TransformKind::translation:
      std::snprintf(buf, sizeof buf, "trl%c%c", shift_x_frac < 0 ? 'm' : 'p',
                    shift_y_frac < 0 ? 'm' : 'p');
      return buf;
    case TransformKind::mirror:
      return mirror_axis == MirrorAxis::horizontal ? "mirh" : "mirv";
    case TransformKind::blur:
      std::snprintf(buf, sizeof buf, "blur%.2f", blur_sigma);
      return buf;
  }
  return "unknown";
}

std::string chain_slug(const TransformChain& chain) {
  if (chain.empty()) return "id";
  std::string out;
  for (const auto& t : chain) {
    if (!out.empty()) out += '+';
    out += t.slug();
  }
  return out;
}

void AugmentationConfig::validate() const {
  auto prob = [](double p, const char* what) {
    if (p < 0 || p > 1) throw std::invalid_argument(std::string(what) + " outside [0,1]");
  };
  prob(online_flip_prob, "flip probability");
  prob(online_blur_prob, "blur probability");
  if (preservation_threshold <= 0 || preservation_threshold > 1)
    throw std::invalid_argument("preservation threshold outside (0,1]");
  if (online_sigma_lo < 0 || online_sigma_hi > 3.0 || online_sigma_lo > online_sigma_hi)
    throw std::invalid_argument("sigma range outside [0,3]");
  for (const auto& chain : offline_grid)
    for (const auto& t : chain) t.validate();
}

std::vector<TransformChain> default_offline_grid() {
  std::vector<TransformChain> grid;
  for (double deg : {0, 45, 90, 135, 180, 225, 270, 315})
    grid.push_back({TransformSpec::rotation(deg)});
  for (double c : {1.25, 1.50, 1.75}) grid.push_back({TransformSpec::scale(c)});
  for (double u : {-0.1, 0.1})
    for (double v : {-0.1, 0.1}) grid.push_back({TransformSpec::translation(u, v)});
  return grid;
}

std::vector<TransformChain> rotation_scale_grid() {
  std::vector<TransformChain> grid;
  grid.push_back({TransformSpec::identity()});
  for (double deg : {0, 45, 90, 135, 180, 225, 270, 315})
    for (double c : {1.25, 1.50, 1.75})
      grid.push_back({TransformSpec::rotation(deg), TransformSpec::scale(c)});
  for (double u : {-0.1, 0.1})
    for (double v : {-0.1, 0.1}) grid.push_back({TransformSpec::translation(u, v)});
  return grid;
}

std::vector<TransformChain> enumerate_offline_grid(const AugmentationConfig& cfg) {
  cfg.validate();
  std::vector<TransformChain> out;
  bool have_identity = false;
  for (const auto& chain : cfg.offline_grid) {
    TransformChain canon = canonical_chain(chain);
    if (canon.empty()) {
      if (have_identity) continue;
      have_identity = true;
    }
    out.push_back(std::move(canon));
  }
  if (!have_identity) out.insert(out.begin(), TransformChain{});
  return out;
}

}  // namespace segeval
