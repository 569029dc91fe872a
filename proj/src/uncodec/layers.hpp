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

namespace uncodec::nn {

inline constexpr double kLeakySlope = 0.1;

inline torch::nn::Conv2d conv(int64_t in, int64_t out, int64_t kernel, int64_t stride = 1) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, kernel).stride(stride).padding(kernel / 2));
}

/// Exact 2x upsampling for even kernels of size 5 (padding 2, output padding 1).
inline torch::nn::ConvTranspose2d deconv(int64_t in, int64_t out, int64_t kernel = 5) {
  return torch::nn::ConvTranspose2d(
      torch::nn::ConvTranspose2dOptions(in, out, kernel).stride(2).padding(kernel / 2).output_padding(1));
}

inline torch::nn::LeakyReLU leaky() {
  return torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(kLeakySlope));
}

/// `layers` 3x3 convolutions in -> width -> ... -> width -> out with leaky
/// ReLUs in between (none after the last).
inline torch::nn::Sequential conv_stack(int64_t in, int64_t width, int64_t out, int layers) {
  torch::nn::Sequential seq;
  int64_t c = in;
  for (int i = 0; i < layers - 1; ++i) {
    seq->push_back(conv(c, width, 3));
    seq->push_back(leaky());
    c = width;
  }
  seq->push_back(conv(c, out, 3));
  return seq;
}

/// Scales the last convolution of a stack; 0 turns the stack into a zero map.
inline void scale_last_conv(torch::nn::Sequential& seq, double factor) {
  torch::NoGradGuard guard;
  auto last = seq->ptr(seq->size() - 1)->as<torch::nn::Conv2dImpl>();
  last->weight.mul_(factor);
  if (last->bias.defined()) last->bias.mul_(factor);
}

}  // namespace uncodec::nn
