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
#include <vector>

namespace uncodec {

enum class EnsembleKind { kMv, kResidual, kPrediction, kReconstruction };

/// h same-shaped predictions, in member order.
struct EnsemblePrediction {
  std::vector<torch::Tensor> members;
  EnsembleKind kind = EnsembleKind::kMv;

  int size() const { return static_cast<int>(members.size()); }
  /// h >= 1, identical shapes.
  void validate() const;
  /// Members stacked on a new leading axis: [h, ...].
  torch::Tensor stacked() const { return torch::stack(members, 0); }
};

struct EnsembleDecoderConfig {
  int h = 4;
  int latent_channels = 64;
  int hidden_channels = 128;
  int backbone_channels = 64;
  int branch_channels = 32;
  int out_channels = 2;
};

/// Shared backbone (four stride-2 transposed convolutions, 16x upsampling)
/// followed by h lightweight branches of two 3x3 convolutions with one leaky
/// ReLU in between. The backbone runs once per call.
class EnsembleDecoderImpl : public torch::nn::Module {
 public:
  explicit EnsembleDecoderImpl(const EnsembleDecoderConfig& cfg);

  EnsemblePrediction forward(const torch::Tensor& code);
  torch::Tensor backbone_features(const torch::Tensor& code);

  const EnsembleDecoderConfig& config() const { return cfg_; }
  int64_t backbone_calls() const { return backbone_calls_; }
  /// Copies branch 0's parameters into every other branch.
  void tie_branches();
  int64_t branch_parameter_count() const;
  int64_t backbone_parameter_count() const;

 private:
  EnsembleDecoderConfig cfg_;
  torch::nn::Sequential backbone_{nullptr};
  std::vector<torch::nn::Sequential> branches_;
  int64_t backbone_calls_ = 0;
};
TORCH_MODULE(EnsembleDecoder);

/// Equal-weight Gaussian mixture mean: (1/h) sum_m member_m.
torch::Tensor mixture_mean(const EnsemblePrediction& pred);

/// Mixture variance (1/h) sum_m (sigma_m^2 + member_m^2) - mean^2 with every
/// component's sigma equal to `sigma` (1 by default).
torch::Tensor mixture_variance(const EnsemblePrediction& pred, double sigma = 1.0);
/// Per-member sigma tensors, broadcastable to the member shape.
torch::Tensor mixture_variance(const EnsemblePrediction& pred, std::span<const torch::Tensor> sigmas);

}  // namespace uncodec
