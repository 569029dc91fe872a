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

#include <torch/torch.h>

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "uncodec/png_io.hpp"

namespace uncodec {

/// One image, stored channel-first as a float32 tensor [C, H, W] with values in
/// [0, 1]. C is 3 (RGB) or 1 (luma); H, W >= 8.
struct Frame {
  torch::Tensor data;

  int channels() const { return static_cast<int>(data.size(0)); }
  int height() const { return static_cast<int>(data.size(1)); }
  int width() const { return static_cast<int>(data.size(2)); }

  /// Throws kInvalidArgument unless the invariants above hold.
  void validate() const;
  /// Adds the batch dimension: [1, C, H, W].
  torch::Tensor batched() const { return data.unsqueeze(0); }
};

Frame frame_from_image(const Image8& image);
/// Quantizes to 8 bits with round-to-nearest; values are clamped to [0, 1].
Image8 frame_to_image(const Frame& frame);
/// Snaps every sample to the nearest multiple of 1/255.
torch::Tensor quantize_to_8bit(const torch::Tensor& t);

Frame load_frame(const std::string& path, int channels = 3);
void save_frame(const std::string& path, const Frame& frame);

struct VideoSequence {
  std::string name;
  std::vector<Frame> frames;

  std::size_t size() const { return frames.size(); }
  /// Length >= 2 (unless allow_single) and homogeneous shapes.
  void validate(bool allow_single = false) const;
};

/// Reads lexically ordered *.png files. Fewer than 2 frames, a missing
/// directory or mixed dimensions are errors.
VideoSequence load_sequence(const std::string& dir, int max_frames, int channels = 3);
/// Like load_sequence but accepts a single frame (for I-frame-only coding).
VideoSequence load_frames(const std::string& dir, int max_frames, int channels = 3);
/// Writes frames as %05d.png.
void save_sequence(const std::string& dir, const VideoSequence& seq);

struct CropPair {
  Frame reference;
  Frame current;
  int frame_index = 0;  // index of the reference frame
  int row = 0;
  int col = 0;
};

/// Co-located crops of two successive frames (reference first) at a uniformly
/// drawn frame index and offset.
CropPair random_crop_pair(const VideoSequence& seq, int size, std::mt19937_64& rng);
CropPair random_crop_pair(const VideoSequence& seq, int size, uint64_t seed);

struct GopGroup {
  int i_frame = 0;
  std::vector<int> p_frames;
};

struct GopStructure {
  int gop_size = 1;
  std::vector<GopGroup> groups;

  int frame_count() const;
  bool is_i_frame(int index) const { return index % gop_size == 0; }
};

GopStructure make_gop(int frame_count, int gop_size);
inline GopStructure make_gop(const VideoSequence& seq, int gop_size) {
  return make_gop(static_cast<int>(seq.size()), gop_size);
}

}  // namespace uncodec
