// Copyright 2026 The DummyNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dummynet/core/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "dummynet/core/error.hpp"

namespace dummynet {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Tensor read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw Error(ErrorCode::IoError, "libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::FormatError, "bad PNG " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_packing(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  std::vector<png_byte> buffer(static_cast<std::size_t>(width) * height * channels);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + static_cast<std::size_t>(y) * width * channels;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  const int out_c = channels == 1 ? 1 : 3;
  Tensor out(1, out_c, height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < out_c; ++c)
        out(0, c, y, x) = buffer[(static_cast<std::size_t>(y) * width + x) * channels + c] / 255.0;
  return out;
}

void write_png(const std::filesystem::path& path, const Tensor& image) {
  const int channels = image.c();
  if (channels != 1 && channels != 3)
    throw Error(ErrorCode::ShapeMismatch, "write_png needs 1 or 3 channels, got " + std::to_string(channels));
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) throw Error(ErrorCode::IoError, "libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "PNG write failed " + path.string());
  }
  const int width = image.w();
  const int height = image.h();
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 8, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<std::size_t>(width) * channels);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < channels; ++c) {
        const double v = std::clamp(image(0, c, y, x), 0.0, 1.0);
        row[static_cast<std::size_t>(x) * channels + c] = static_cast<png_byte>(std::lround(v * 255.0));
      }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

double mean_intensity(const Tensor& image, int n) {
  const std::size_t count = image.shape().sample_size();
  if (count == 0) return 0.0;
  const double* p = image.sample(n);
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i) s += p[i];
  return s / static_cast<double>(count);
}

}  // namespace dummynet
