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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace uncodec {

/// Interleaved 8-bit image, row-major, `channels` samples per pixel (1 or 3).
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<uint8_t> pixels;
};

Image8 read_png(const std::string& path, int channels);
Image8 decode_png(std::span<const uint8_t> bytes, int channels);
void write_png(const std::string& path, const Image8& image);
std::vector<uint8_t> encode_png(const Image8& image);

/// 16-bit grayscale output for heat maps.
void write_png_gray16(const std::string& path, int width, int height, const std::vector<uint16_t>& pixels);

}  // namespace uncodec
