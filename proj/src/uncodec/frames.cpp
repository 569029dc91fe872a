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

#include "uncodec/frames.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "uncodec/error.hpp"

namespace fs = std::filesystem;

namespace uncodec {

void Frame::validate() const {
  require(data.defined() && data.dim() == 3, ErrorCode::kInvalidArgument, "frame must be a [C,H,W] tensor");
  require(channels() == 1 || channels() == 3, ErrorCode::kInvalidArgument, "frame must have 1 or 3 channels");
  require(height() >= 8 && width() >= 8, ErrorCode::kInvalidArgument, "frame must be at least 8x8");
  require(torch::isfinite(data).all().item<bool>(), ErrorCode::kInvalidArgument, "frame has non-finite values");
  require(data.min().item<double>() >= 0.0 && data.max().item<double>() <= 1.0, ErrorCode::kInvalidArgument,
          "frame values must lie in [0,1]");
}

Frame frame_from_image(const Image8& image) {
  auto hwc = torch::from_blob(const_cast<uint8_t*>(image.pixels.data()), {image.height, image.width, image.channels},
                              torch::kUInt8);
  return Frame{hwc.permute({2, 0, 1}).to(torch::kFloat32).div(255.0f).contiguous()};
}

torch::Tensor quantize_to_8bit(const torch::Tensor& t) {
  return t.clamp(0.0, 1.0).mul(255.0).round().div(255.0);
}

Image8 frame_to_image(const Frame& frame) {
  Image8 image;
  image.channels = frame.channels();
  image.height = frame.height();
  image.width = frame.width();
  auto hwc = frame.data.detach().to(torch::kFloat32).clamp(0.0, 1.0).mul(255.0).round().to(torch::kUInt8)
                 .permute({1, 2, 0}).contiguous();
  image.pixels.assign(hwc.data_ptr<uint8_t>(), hwc.data_ptr<uint8_t>() + hwc.numel());
  return image;
}

Frame load_frame(const std::string& path, int channels) { return frame_from_image(read_png(path, channels)); }

void save_frame(const std::string& path, const Frame& frame) { write_png(path, frame_to_image(frame)); }

void VideoSequence::validate(bool allow_single) const {
  require(allow_single ? !frames.empty() : frames.size() >= 2, ErrorCode::kInvalidArgument,
          "sequence '" + name + "' needs at least " + (allow_single ? "1 frame" : "2 frames"));
  for (const auto& f : frames) {
    require(f.data.sizes() == frames.front().data.sizes(), ErrorCode::kInvalidArgument,
            "sequence '" + name + "' has inconsistent frame dimensions");
  }
}

VideoSequence load_frames(const std::string& dir, int max_frames, int channels) {
  require(fs::is_directory(dir), ErrorCode::kIo, "no such frame directory '" + dir + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (max_frames > 0 && files.size() > static_cast<std::size_t>(max_frames)) files.resize(max_frames);

  VideoSequence seq;
  seq.name = fs::path(dir).filename().string();
  if (seq.name.empty()) seq.name = fs::path(dir).parent_path().filename().string();
  for (const auto& file : files) {
    seq.frames.push_back(load_frame(file.string(), channels));
    if (seq.frames.back().data.sizes() != seq.frames.front().data.sizes())
      fail(ErrorCode::kInvalidArgument, "inconsistent frame dimensions at '" + file.string() + "'");
  }
  seq.validate(/*allow_single=*/true);
  return seq;
}

VideoSequence load_sequence(const std::string& dir, int max_frames, int channels) {
  VideoSequence seq = load_frames(dir, max_frames, channels);
  seq.validate();
  return seq;
}

void save_sequence(const std::string& dir, const VideoSequence& seq) {
  fs::create_directories(dir);
  char name[32];
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    std::snprintf(name, sizeof(name), "%05zu.png", i);
    save_frame((fs::path(dir) / name).string(), seq.frames[i]);
  }
}

CropPair random_crop_pair(const VideoSequence& seq, int size, std::mt19937_64& rng) {
  require(seq.size() >= 2, ErrorCode::kInvalidArgument, "crop pairs need a sequence of at least 2 frames");
  const Frame& first = seq.frames.front();
  require(size > 0 && size <= first.height() && size <= first.width(), ErrorCode::kInvalidArgument,
          "crop size " + std::to_string(size) + " exceeds the frame");
  std::uniform_int_distribution<int> pick_t(0, static_cast<int>(seq.size()) - 2);
  std::uniform_int_distribution<int> pick_r(0, first.height() - size);
  std::uniform_int_distribution<int> pick_c(0, first.width() - size);
  CropPair pair;
  pair.frame_index = pick_t(rng);
  pair.row = pick_r(rng);
  pair.col = pick_c(rng);
  auto crop = [&](const Frame& f) {
    return Frame{f.data.slice(1, pair.row, pair.row + size).slice(2, pair.col, pair.col + size).contiguous()};
  };
  pair.reference = crop(seq.frames[pair.frame_index]);
  pair.current = crop(seq.frames[pair.frame_index + 1]);
  return pair;
}

CropPair random_crop_pair(const VideoSequence& seq, int size, uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_crop_pair(seq, size, rng);
}

int GopStructure::frame_count() const {
  int n = 0;
  for (const auto& g : groups) n += 1 + static_cast<int>(g.p_frames.size());
  return n;
}

GopStructure make_gop(int frame_count, int gop_size) {
  require(gop_size >= 1, ErrorCode::kInvalidArgument, "GoP size must be >= 1");
  require(frame_count >= 0, ErrorCode::kInvalidArgument, "negative frame count");
  GopStructure gop;
  gop.gop_size = gop_size;
  for (int start = 0; start < frame_count; start += gop_size) {
    GopGroup g;
    g.i_frame = start;
    for (int i = start + 1; i < std::min(frame_count, start + gop_size); ++i) g.p_frames.push_back(i);
    gop.groups.push_back(std::move(g));
  }
  return gop;
}

}  // namespace uncodec
