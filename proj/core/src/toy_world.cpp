/* Copyright 2026 The latentface Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "latentface/toy_world.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <random>

namespace latentface {
namespace {

constexpr std::array<std::string_view, kNumAttrs> kKeys = {
    "face_x",      "face_y",       "face_width",  "face_height", "hair_volume", "hair_length",
    "eye_spacing", "eye_height",   "eye_size",    "mouth_height", "mouth_width", "mouth_open",
    "hair",        "skin",         "background",  "lips"};

using Rgb = std::array<double, 3>;

struct ColorFamily {
  Rgb from;
  Rgb to;
};

// One colour segment per class. Pairwise segment distance is >= 0.10, so the
// nearest-segment rule separates classes exactly for rendered pixels.
constexpr std::array<ColorFamily, kToyNumClasses> kFamilies = {{
    {{0.20, 0.35, 0.85}, {0.20, 0.75, 0.80}},  // background
    {{0.98, 0.86, 0.74}, {0.62, 0.42, 0.30}},  // skin
    {{0.10, 0.07, 0.05}, {0.96, 0.84, 0.40}},  // hair: dark -> blond
    {{0.92, 0.95, 1.00}, {0.92, 0.95, 1.00}},  // eyes
    {{0.86, 0.45, 0.50}, {0.60, 0.05, 0.12}},  // lips
}};

constexpr double kOffPaletteDistance = 0.05;

Rgb lerp(const ColorFamily& f, double t) {
  return {f.from[0] + (f.to[0] - f.from[0]) * t, f.from[1] + (f.to[1] - f.from[1]) * t,
          f.from[2] + (f.to[2] - f.from[2]) * t};
}

double segment_distance(const ColorFamily& f, const Rgb& p) {
  Rgb d{f.to[0] - f.from[0], f.to[1] - f.from[1], f.to[2] - f.from[2]};
  const double len2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((p[0] - f.from[0]) * d[0] + (p[1] - f.from[1]) * d[1] + (p[2] - f.from[2]) * d[2]) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  const Rgb q = lerp(f, t);
  return std::sqrt((p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) +
                   (p[2] - q[2]) * (p[2] - q[2]));
}

// Pixel-space geometry for one face, at the 64-pixel reference scale.
struct Geometry {
  double cx, cy, rx, ry;
  double hair_pad, hair_bottom;
  double eye_dx, eye_y, eye_r;
  double mouth_y, mouth_hw, mouth_hh;
};

Geometry geometry_of(const ToyAttributes& a, double scale) {
  using enum Attr;
  Geometry g{};
  g.cx = 32.0 + (a[kFaceX] - 0.5) * 8.0;
  g.cy = 34.0 + (a[kFaceY] - 0.5) * 6.0;
  g.rx = 13.0 + 6.0 * a[kFaceWidth];
  g.ry = 16.0 + 7.0 * a[kFaceHeight];
  g.hair_pad = 2.0 + 6.0 * a[kHairVolume];
  g.hair_bottom = g.cy + g.ry * (-0.3 + 1.1 * a[kHairLength]);
  g.eye_dx = g.rx * (0.30 + 0.20 * a[kEyeSpacing]);
  g.eye_y = g.cy - g.ry * (0.15 + 0.20 * a[kEyeHeight]);
  g.eye_r = 1.8 + 1.8 * a[kEyeSize];
  g.mouth_y = g.cy + g.ry * (0.35 + 0.25 * a[kMouthHeight]);
  g.mouth_hw = g.rx * (0.22 + 0.25 * a[kMouthWidth]);
  g.mouth_hh = 1.2 + 2.3 * a[kMouthOpen];
  for (double* v : {&g.cx, &g.cy, &g.rx, &g.ry, &g.hair_pad, &g.hair_bottom, &g.eye_dx, &g.eye_y,
                    &g.eye_r, &g.mouth_y, &g.mouth_hw, &g.mouth_hh})
    *v *= scale;
  return g;
}

bool parse_double(std::string_view s, double& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct Phrase {
  std::string_view text;
  Attr attr;
  double value;
};

// Matched longest first, so "light brown hair" wins over "brown hair".
constexpr Phrase kPhrases[] = {
    {"blond hair", Attr::kHairTone, 0.95},     {"blonde hair", Attr::kHairTone, 0.95},
    {"black hair", Attr::kHairTone, 0.03},     {"dark hair", Attr::kHairTone, 0.08},
    {"brown hair", Attr::kHairTone, 0.35},     {"light brown hair", Attr::kHairTone, 0.6},
    {"long hair", Attr::kHairLength, 0.92},    {"short hair", Attr::kHairLength, 0.08},
    {"voluminous hair", Attr::kHairVolume, 0.9}, {"thin hair", Attr::kHairVolume, 0.1},
    {"pale skin", Attr::kSkinTone, 0.05},      {"light skin", Attr::kSkinTone, 0.15},
    {"dark skin", Attr::kSkinTone, 0.9},       {"tanned skin", Attr::kSkinTone, 0.7},
    {"big eyes", Attr::kEyeSize, 0.92},        {"small eyes", Attr::kEyeSize, 0.08},
    {"wide face", Attr::kFaceWidth, 0.92},     {"narrow face", Attr::kFaceWidth, 0.08},
    {"long face", Attr::kFaceHeight, 0.92},    {"round face", Attr::kFaceHeight, 0.1},
    {"open mouth", Attr::kMouthOpen, 0.92},    {"closed mouth", Attr::kMouthOpen, 0.05},
    {"wide smile", Attr::kMouthWidth, 0.92},   {"red lips", Attr::kLipTone, 0.92},
    {"pink lips", Attr::kLipTone, 0.1},        {"green background", Attr::kBackgroundTone, 0.95},
    {"blue background", Attr::kBackgroundTone, 0.05},
    {"hair=blond", Attr::kHairTone, 0.95},     {"hair=blonde", Attr::kHairTone, 0.95},
    {"hair=black", Attr::kHairTone, 0.03},     {"hair=dark", Attr::kHairTone, 0.08},
    {"hair=brown", Attr::kHairTone, 0.35},     {"hair=long", Attr::kHairLength, 0.92},
    {"hair=short", Attr::kHairLength, 0.08},
};

}  // namespace

std::string_view attr_key(Attr a) { return kKeys[static_cast<int>(a)]; }

ToyAttributes ToyAttributes::neutral() {
  ToyAttributes a;
  a.u.fill(0.5);
  return a;
}

ToyWorld::ToyWorld(int resolution) : resolution_(resolution) {
  require(is_power_of_two(resolution) && resolution >= 16, ErrorKind::kInvalidArgument,
          "toy world resolution must be a power of two >= 16");
  std::mt19937_64 rng(0x3d3d3d3dULL);
  std::normal_distribution<double> n01(0.0, 1.0);
  shape_basis_.resize(kThreeDMMShapeDim, 7);
  expression_basis_.resize(kThreeDMMExpressionDim, 2);
  for (int i = 0; i < shape_basis_.size(); ++i) shape_basis_.data()[i] = n01(rng);
  for (int i = 0; i < expression_basis_.size(); ++i) expression_basis_.data()[i] = n01(rng);
}

namespace {

ToyClass classify(const Geometry& g, double x, double y) {
  auto sq = [](double v) { return v * v; };
  const double mx = (x - g.cx) / g.mouth_hw, my = (y - g.mouth_y) / g.mouth_hh;
  if (mx * mx + my * my <= 1.0) return ToyClass::kMouth;
  if (sq(x - (g.cx - g.eye_dx)) + sq(y - g.eye_y) <= sq(g.eye_r) ||
      sq(x - (g.cx + g.eye_dx)) + sq(y - g.eye_y) <= sq(g.eye_r))
    return ToyClass::kEyes;
  if (sq((x - g.cx) / g.rx) + sq((y - g.cy) / g.ry) <= 1.0) return ToyClass::kSkin;
  const double hy = g.cy - 0.5 * g.hair_pad;
  if (y <= g.hair_bottom && sq((x - g.cx) / (g.rx + g.hair_pad)) + sq((y - hy) / (g.ry + g.hair_pad)) <= 1.0)
    return ToyClass::kHair;
  return ToyClass::kBackground;
}

}  // namespace

MaskImage ToyWorld::render_mask(const ToyAttributes& attrs) const {
  const Geometry g = geometry_of(attrs, resolution_ / 64.0);
  MaskImage m(resolution_, resolution_, kToyNumClasses);
  for (int y = 0; y < resolution_; ++y)
    for (int x = 0; x < resolution_; ++x)
      m.at(y, x) = static_cast<std::uint8_t>(classify(g, x + 0.5, y + 0.5));
  return m;
}

RgbImage ToyWorld::render(const ToyAttributes& attrs) const {
  using enum Attr;
  std::array<Rgb, kToyNumClasses> colors = {
      lerp(kFamilies[0], attrs[kBackgroundTone]), lerp(kFamilies[1], attrs[kSkinTone]),
      lerp(kFamilies[2], attrs[kHairTone]), lerp(kFamilies[3], 0.0), lerp(kFamilies[4], attrs[kLipTone])};
  const MaskImage m = render_mask(attrs);
  RgbImage img(resolution_, resolution_);
  for (int y = 0; y < resolution_; ++y)
    for (int x = 0; x < resolution_; ++x) {
      const Rgb& c = colors[m.at(y, x)];
      for (int k = 0; k < 3; ++k) img.at(y, x, k) = static_cast<float>(c[k]);
    }
  return img;
}

MaskImage ToyWorld::parse(const RgbImage& image) const {
  require(image.height > 0 && image.width > 0, ErrorKind::kInvalidArgument, "cannot parse an empty image");
  MaskImage m(image.height, image.width, kToyNumClasses);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const Rgb p{image.at(y, x, 0), image.at(y, x, 1), image.at(y, x, 2)};
      int best = 0;
      double best_d = segment_distance(kFamilies[0], p);
      for (int c = 1; c < kToyNumClasses; ++c) {
        const double d = segment_distance(kFamilies[c], p);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      require(best_d <= kOffPaletteDistance, ErrorKind::kUnsupported,
              "pixel (" + std::to_string(y) + ", " + std::to_string(x) +
                  ") is not a toy-world colour; a face-parser adapter is required for this image");
      m.at(y, x) = static_cast<std::uint8_t>(best);
    }
  return m;
}

SketchImage ToyWorld::sketch(const MaskImage& mask) {
  SketchImage s(mask.height, mask.width);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      const auto l = mask.at(y, x);
      const bool edge = (x + 1 < mask.width && mask.at(y, x + 1) != l) ||
                        (y + 1 < mask.height && mask.at(y + 1, x) != l);
      s.at(y, x) = edge ? 1 : 0;
    }
  return s;
}

ThreeDMMParams ToyWorld::threedmm(const ToyAttributes& a) const {
  using enum Attr;
  Vec shape_in(7);
  shape_in << a[kFaceWidth], a[kFaceHeight], a[kEyeSpacing], a[kEyeHeight], a[kEyeSize],
      a[kMouthHeight], a[kMouthWidth];
  shape_in.array() -= 0.5;
  Vec expr_in(2);
  expr_in << a[kMouthOpen] - 0.5, a[kMouthWidth] - 0.5;
  ThreeDMMParams p;
  p.shape = shape_basis_ * shape_in;
  p.expression = expression_basis_ * expr_in;
  p.pose.setZero();
  p.pose[3] = a[kFaceX] - 0.5;
  p.pose[4] = a[kFaceY] - 0.5;
  p.pose[5] = 1.0;
  return p;
}

std::string ToyWorld::describe(const ToyAttributes& attrs) {
  std::string out = "a photo of a person";
  char buf[48];
  for (int i = 0; i < kNumAttrs; ++i) {
    std::snprintf(buf, sizeof(buf), ", %s=%.3f", kKeys[i].data(), attrs.u[i]);
    out += buf;
  }
  return out;
}

ToyAttributes ToyWorld::interpret(std::string_view text) {
  ToyAttributes a = ToyAttributes::neutral();
  const std::string lower = lowercase(text);
  std::vector<bool> explicit_key(kNumAttrs, false);

  // key=value tokens
  std::size_t pos = 0;
  while ((pos = lower.find('=', pos)) != std::string::npos) {
    std::size_t ks = pos;
    while (ks > 0 && (std::isalnum(static_cast<unsigned char>(lower[ks - 1])) || lower[ks - 1] == '_')) --ks;
    std::size_t ve = pos + 1;
    while (ve < lower.size() && (std::isdigit(static_cast<unsigned char>(lower[ve])) || lower[ve] == '.' ||
                                 lower[ve] == '-' || lower[ve] == 'e' || lower[ve] == '+'))
      ++ve;
    const std::string_view key(lower.data() + ks, pos - ks);
    const std::string_view val(lower.data() + pos + 1, ve - pos - 1);
    for (int i = 0; i < kNumAttrs; ++i) {
      double v;
      if (key == kKeys[i] && parse_double(val, v)) {
        a.u[i] = std::clamp(v, 0.0, 1.0);
        explicit_key[i] = true;
      }
    }
    pos = ve;
  }

  std::vector<bool> taken(lower.size(), false);
  std::vector<const Phrase*> phrases;
  for (const auto& p : kPhrases) phrases.push_back(&p);
  std::stable_sort(phrases.begin(), phrases.end(),
                   [](const Phrase* l, const Phrase* r) { return l->text.size() > r->text.size(); });
  for (const Phrase* p : phrases) {
    const int idx = static_cast<int>(p->attr);
    if (explicit_key[idx]) continue;
    std::size_t at = lower.find(p->text);
    while (at != std::string::npos) {
      if (!std::any_of(taken.begin() + at, taken.begin() + at + p->text.size(), [](bool b) { return b; })) {
        std::fill(taken.begin() + at, taken.begin() + at + p->text.size(), true);
        a.u[idx] = p->value;
        break;
      }
      at = lower.find(p->text, at + 1);
    }
  }
  return a;
}

const io::Palette& ToyWorld::palette() {
  static const io::Palette p = [] {
    io::Palette out;
    for (const auto& f : kFamilies) {
      const Rgb c = lerp(f, 0.5);
      out.push_back({static_cast<std::uint8_t>(std::lround(c[0] * 255)),
                     static_cast<std::uint8_t>(std::lround(c[1] * 255)),
                     static_cast<std::uint8_t>(std::lround(c[2] * 255))});
    }
    return out;
  }();
  return p;
}

const std::array<std::string_view, kToyNumClasses>& ToyWorld::class_names() {
  static const std::array<std::string_view, kToyNumClasses> names = {"background", "skin", "hair",
                                                                     "eyes", "mouth"};
  return names;
}

std::array<double, 3> ToyWorld::region_mean(const RgbImage& image, const MaskImage& mask, ToyClass cls) {
  require(image.height == mask.height && image.width == mask.width, ErrorKind::kShapeMismatch,
          "image and mask shapes differ");
  std::array<double, 3> sum{0, 0, 0};
  std::size_t n = 0;
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x)
      if (mask.at(y, x) == static_cast<std::uint8_t>(cls)) {
        for (int k = 0; k < 3; ++k) sum[k] += image.at(y, x, k);
        ++n;
      }
  if (n > 0)
    for (auto& s : sum) s /= static_cast<double>(n);
  return sum;
}

std::size_t ToyWorld::region_area(const MaskImage& mask, ToyClass cls) {
  return static_cast<std::size_t>(
      std::count(mask.labels.begin(), mask.labels.end(), static_cast<std::uint8_t>(cls)));
}

}  // namespace latentface
