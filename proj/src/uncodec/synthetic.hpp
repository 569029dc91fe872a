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
#include <vector>

#include "uncodec/frames.hpp"

namespace uncodec {

// "Moving shapes" generator: textured rectangles translating rigidly over a
// static textured background. Textures are continuous functions of position,
// so a translation by any real offset is exact.

struct SyntheticParams {
  int height = 64;
  int width = 64;
  int frames = 8;
  int shapes = 2;
  double max_speed = 3.0;
  int channels = 3;
  bool squares = false;  // shapes get equal sides
};

struct ShapeState {
  double x = 0;  // top-left corner, pixels
  double y = 0;
  double w = 0;
  double h = 0;
};

struct SyntheticClip {
  VideoSequence sequence;
  /// shapes[t][s]: placement of shape s in frame t.
  std::vector<std::vector<ShapeState>> shapes;
};

SyntheticClip generate_clip(const SyntheticParams& params, uint64_t seed);
std::vector<VideoSequence> generate_corpus(const SyntheticParams& params, int sequences, uint64_t seed);

}  // namespace uncodec
