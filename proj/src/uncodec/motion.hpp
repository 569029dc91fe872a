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

#include <string>

#include "uncodec/png_io.hpp"

namespace uncodec {

// Motion fields are [N, 2, H, W] tensors holding (dx, dy) in pixels. Warping
// is backward: output(p) samples the reference at p + flow(p), bilinearly,
// with sample coordinates clamped to the frame (edge replication).

/// ref [N, C, H, W], flow [N, 2, H, W]. Differentiable w.r.t. both inputs.
torch::Tensor bilinear_warp(const torch::Tensor& ref, const torch::Tensor& flow);

/// MSE between `current` and the reference warped by `flow`.
torch::Tensor motion_mse_loss(const torch::Tensor& current, const torch::Tensor& ref, const torch::Tensor& flow);

/// Coarse-to-fine flow estimator: at each pyramid level a small conv stack
/// predicts a flow increment from (current, warped reference, upsampled flow).
class MotionNetImpl : public torch::nn::Module {
 public:
  MotionNetImpl(int channels, int width, int levels);

  /// current, ref: [N, C, H, W] with H, W divisible by 2^(levels-1).
  torch::Tensor forward(const torch::Tensor& current, const torch::Tensor& ref);
  int levels() const { return static_cast<int>(stacks_.size()); }

 private:
  std::vector<torch::nn::Sequential> stacks_;
};
TORCH_MODULE(MotionNet);

/// Middlebury .flo layout: tag 202021.25, int32 width, int32 height, then
/// interleaved float32 (dx, dy) in row-major order. `flow` is [2, H, W].
void write_flow(const std::string& path, const torch::Tensor& flow);
torch::Tensor read_flow(const std::string& path);

/// Color-wheel rendering (hue = direction, saturation = magnitude relative to
/// the largest magnitude, or `max_magnitude` when > 0).
Image8 flow_to_color(const torch::Tensor& flow, double max_magnitude = 0.0);

}  // namespace uncodec
