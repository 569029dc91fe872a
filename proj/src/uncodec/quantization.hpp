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

#include <span>

namespace uncodec {

inline constexpr double kQuantizedBound = 32768.0;  // 2^15

/// Training-time relaxation: latent + U(-1/2, 1/2) noise drawn from `gen`.
/// The noise lies strictly inside the open interval. Gradient is identity.
torch::Tensor quantize_train(const torch::Tensor& latent, torch::Generator& gen);

/// Round half away from zero. The result keeps the input dtype and holds exact
/// integers. Throws kInvalidArgument if any |value| exceeds `bound`.
torch::Tensor quantize_infer(const torch::Tensor& latent, double bound = kQuantizedBound);

/// code + fraction * (latent - code) where |latent - code| >= gap_threshold,
/// code elsewhere.
torch::Tensor perturb_quantized(const torch::Tensor& latent, const torch::Tensor& code, double gap_threshold = 0.1,
                                double fraction = 0.2);

/// Worst-case |w^T eta| over ||eta||_inf <= 1/2, i.e. ||w||_1 / 2.
double linear_noise_bound(std::span<const double> weights);

}  // namespace uncodec
