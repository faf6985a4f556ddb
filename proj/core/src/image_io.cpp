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

#include "latentface/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <sstream>

namespace latentface::io {
namespace {

struct MemReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void read_cb(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
  if (r->pos + n > r->size) png_error(png, "truncated PNG stream");
  std::memcpy(out, r->data + r->pos, n);
  r->pos += n;
}

void write_cb(png_structp png, png_bytep in, png_size_t n) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + n);
}

void flush_cb(png_structp) {}

enum class ReadMode { kRgb, kIndexed, kGray };

struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int color_type = 0;
  std::vector<std::uint8_t> data;
};

RawPng decode_raw(std::span<const std::uint8_t> bytes, ReadMode mode) {
  require(bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0, ErrorKind::kIo,
          "not a PNG stream");
  RawPng out;
  std::vector<png_bytep> rows;
  MemReader reader{bytes.data(), bytes.size(), 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorKind::kIo, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(ErrorKind::kIo, "png_create_info_struct failed");
  }
  volatile bool bad_type = false;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::kIo, "malformed PNG stream");
  }
  png_set_read_fn(png, &reader, read_cb);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  out.color_type = color_type;
  if (bit_depth == 16) png_set_strip_16(png);
  switch (mode) {
    case ReadMode::kRgb:
      if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
      if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
        png_set_gray_to_rgb(png);
      }
      if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
      break;
    case ReadMode::kIndexed:
      if (color_type != PNG_COLOR_TYPE_PALETTE && color_type != PNG_COLOR_TYPE_GRAY) bad_type = true;
      if (bit_depth < 8) png_set_packing(png);
      break;
    case ReadMode::kGray:
      if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_PALETTE) bad_type = true;
      if (bit_depth < 8) png_set_packing(png);
      break;
  }
  if (bad_type) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorKind::kIo, "PNG color type not valid for this modality");
  }
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out.data.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = out.data.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

// 1-bit grayscale stored with packing gives 0/1; with palette the indices come straight through.
Bytes encode_raw(int width, int height, int color_type, int channels,
                 const std::vector<std::uint8_t>& data, const Palette* palette) {
  Bytes out;
  std::vector<png_bytep> rows(height);
  std::vector<png_color> pal;
  if (palette != nullptr) {
    for (const auto& c : *palette) pal.push_back(png_color{c[0], c[1], c[2]});
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorKind::kIo, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    fail(ErrorKind::kIo, "png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorKind::kIo, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, write_cb, flush_cb);
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (!pal.empty()) png_set_PLTE(png, info, pal.data(), static_cast<int>(pal.size()));
  png_write_info(png, info);
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(data.data() + rowbytes * y);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

Bytes encode_png(const RgbImage& image) {
  require(!image.empty(), ErrorKind::kInvalidArgument, "cannot encode an empty image");
  std::vector<std::uint8_t> data(image.pixels.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const float v = std::clamp(image.pixels[i], 0.0f, 1.0f);
    data[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return encode_raw(image.width, image.height, PNG_COLOR_TYPE_RGB, 3, data, nullptr);
}

RgbImage decode_png(std::span<const std::uint8_t> png) {
  const RawPng raw = decode_raw(png, ReadMode::kRgb);
  require(raw.channels == 3, ErrorKind::kIo, "expected an RGB PNG");
  RgbImage img(raw.height, raw.width);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = raw.data[i] / 255.0f;
  return img;
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  write_file(path, encode_png(image));
}

RgbImage read_png(const std::filesystem::path& path) { return decode_png(read_file(path)); }

Bytes encode_mask_png(const MaskImage& mask, const Palette& palette) {
  mask.validate();
  require(static_cast<int>(palette.size()) >= mask.num_classes, ErrorKind::kInvalidArgument,
          "palette has fewer entries than mask classes");
  return encode_raw(mask.width, mask.height, PNG_COLOR_TYPE_PALETTE, 1, mask.labels, &palette);
}

MaskImage decode_mask_png(std::span<const std::uint8_t> png, int num_classes) {
  const RawPng raw = decode_raw(png, ReadMode::kIndexed);
  require(raw.channels == 1, ErrorKind::kIo, "mask PNG must be single-channel");
  MaskImage m(raw.height, raw.width, num_classes);
  m.labels = raw.data;
  m.validate();
  return m;
}

void write_mask_png(const std::filesystem::path& path, const MaskImage& mask, const Palette& palette) {
  write_file(path, encode_mask_png(mask, palette));
}

MaskImage read_mask_png(const std::filesystem::path& path, int num_classes) {
  return decode_mask_png(read_file(path), num_classes);
}

void write_mask_grid(const std::filesystem::path& path, const MaskImage& mask) {
  mask.validate();
  std::ostringstream os;
  os << mask.height << ' ' << mask.width << ' ' << mask.num_classes << '\n';
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) os << (x ? " " : "") << static_cast<int>(mask.at(y, x));
    os << '\n';
  }
  write_text(path, os.str());
}

MaskImage read_mask_grid(const std::filesystem::path& path) {
  std::istringstream is(read_text(path));
  int h = 0, w = 0, c = 0;
  require(static_cast<bool>(is >> h >> w >> c), ErrorKind::kIo, "mask grid header unreadable");
  require(h > 0 && w > 0 && h <= 8192 && w <= 8192, ErrorKind::kIo, "mask grid shape out of range");
  MaskImage m(h, w, c);
  for (auto& l : m.labels) {
    int v = -1;
    require(static_cast<bool>(is >> v), ErrorKind::kIo, "mask grid truncated");
    require(v >= 0 && v < 256, ErrorKind::kInvalidArgument, "mask label out of range");
    l = static_cast<std::uint8_t>(v);
  }
  m.validate();
  return m;
}

MaskImage read_mask(const std::filesystem::path& path, int num_classes) {
  if (path.extension() == ".png") return read_mask_png(path, num_classes);
  return read_mask_grid(path);
}

Bytes encode_sketch_png(const SketchImage& sketch) {
  sketch.validate();
  std::vector<std::uint8_t> data(sketch.pixels.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = sketch.pixels[i] ? 255 : 0;
  return encode_raw(sketch.width, sketch.height, PNG_COLOR_TYPE_GRAY, 1, data, nullptr);
}

SketchImage decode_sketch_png(std::span<const std::uint8_t> png) {
  const RawPng raw = decode_raw(png, ReadMode::kGray);
  require(raw.channels == 1, ErrorKind::kIo, "sketch PNG must be single-channel");
  return SketchImage::from_raw(raw.height, raw.width, raw.data);
}

void write_sketch_png(const std::filesystem::path& path, const SketchImage& sketch) {
  write_file(path, encode_sketch_png(sketch));
}

SketchImage read_sketch_png(const std::filesystem::path& path) {
  return decode_sketch_png(read_file(path));
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kIo, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  require(out.good(), ErrorKind::kIo, "short write to " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                 text.size()));
}

std::string read_text(const std::filesystem::path& path) {
  const Bytes b = read_file(path);
  return std::string(b.begin(), b.end());
}

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> data) {
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < data.size(); i += 3) {
    const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
  }
  if (i < data.size()) {
    std::uint32_t v = data[i] << 16;
    if (i + 1 < data.size()) v |= data[i + 1] << 8;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += i + 1 < data.size() ? kB64[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

Bytes base64_decode(std::string_view text) {
  auto decode_char = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  Bytes out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const int v = decode_char(c);
    require(v >= 0, ErrorKind::kInvalidArgument, "invalid base64 character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace latentface::io
