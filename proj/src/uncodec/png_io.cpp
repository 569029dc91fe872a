// Copyright 2026 The uncodec Authors. All Rights Reserved.
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

#include "uncodec/png_io.hpp"

#include <png.h>

#include <cstring>

#include "uncodec/error.hpp"

namespace uncodec {
namespace {

uint32_t png_format(int channels) {
  if (channels == 1) return PNG_FORMAT_GRAY;
  if (channels == 3) return PNG_FORMAT_RGB;
  fail(ErrorCode::kInvalidArgument, "PNG images must have 1 or 3 channels");
}

Image8 finish_read(png_image& image, int channels, const std::string& what) {
  image.format = png_format(channels);
  Image8 out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.channels = channels;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorCode::kIo, what + ": " + msg);
  }
  return out;
}

png_image make_write_image(const Image8& image) {
  require(image.width > 0 && image.height > 0, ErrorCode::kInvalidArgument, "empty image");
  require(image.pixels.size() == static_cast<std::size_t>(image.width) * image.height * image.channels,
          ErrorCode::kInvalidArgument, "image buffer size mismatch");
  png_image out;
  std::memset(&out, 0, sizeof(out));
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(image.width);
  out.height = static_cast<png_uint_32>(image.height);
  out.format = png_format(image.channels);
  return out;
}

}  // namespace

Image8 read_png(const std::string& path, int channels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    fail(ErrorCode::kIo, "cannot read PNG '" + path + "': " + image.message);
  return finish_read(image, channels, "cannot decode PNG '" + path + "'");
}

Image8 decode_png(std::span<const uint8_t> bytes, int channels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size()))
    fail(ErrorCode::kBitstream, std::string("corrupt embedded PNG: ") + image.message);
  return finish_read(image, channels, "corrupt embedded PNG");
}

void write_png(const std::string& path, const Image8& image) {
  png_image out = make_write_image(image);
  if (!png_image_write_to_file(&out, path.c_str(), 0, image.pixels.data(), 0, nullptr))
    fail(ErrorCode::kIo, "cannot write PNG '" + path + "': " + out.message);
}

std::vector<uint8_t> encode_png(const Image8& image) {
  png_image out = make_write_image(image);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&out, nullptr, &size, 0, image.pixels.data(), 0, nullptr))
    fail(ErrorCode::kIo, std::string("PNG encode failed: ") + out.message);
  std::vector<uint8_t> bytes(size);
  if (!png_image_write_to_memory(&out, bytes.data(), &size, 0, image.pixels.data(), 0, nullptr))
    fail(ErrorCode::kIo, std::string("PNG encode failed: ") + out.message);
  bytes.resize(size);
  return bytes;
}

void write_png_gray16(const std::string& path, int width, int height, const std::vector<uint16_t>& pixels) {
  require(pixels.size() == static_cast<std::size_t>(width) * height, ErrorCode::kInvalidArgument,
          "heat map buffer size mismatch");
  png_image out;
  std::memset(&out, 0, sizeof(out));
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(width);
  out.height = static_cast<png_uint_32>(height);
  out.format = PNG_FORMAT_LINEAR_Y;
  if (!png_image_write_to_file(&out, path.c_str(), 0, pixels.data(), 0, nullptr))
    fail(ErrorCode::kIo, "cannot write PNG '" + path + "': " + out.message);
}

}  // namespace uncodec
