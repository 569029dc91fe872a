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

#include "uncodec/ensemble.hpp"

#include "uncodec/error.hpp"
#include "uncodec/layers.hpp"

namespace uncodec {

void EnsemblePrediction::validate() const {
  require(!members.empty(), ErrorCode::kInvalidArgument, "ensemble prediction needs at least one member");
  for (const auto& m : members)
    require(m.sizes() == members.front().sizes(), ErrorCode::kInvalidArgument, "ensemble members differ in shape");
}

EnsembleDecoderImpl::EnsembleDecoderImpl(const EnsembleDecoderConfig& cfg) : cfg_(cfg) {
  require(cfg.h >= 1, ErrorCode::kInvalidArgument, "ensemble size h must be >= 1");
  backbone_ = register_module(
      "backbone", torch::nn::Sequential(nn::deconv(cfg.latent_channels, cfg.hidden_channels), nn::leaky(),
                                        nn::deconv(cfg.hidden_channels, cfg.hidden_channels), nn::leaky(),
                                        nn::deconv(cfg.hidden_channels, cfg.hidden_channels), nn::leaky(),
                                        nn::deconv(cfg.hidden_channels, cfg.backbone_channels), nn::leaky()));
  for (int m = 0; m < cfg.h; ++m) {
    branches_.push_back(register_module(
        "branch" + std::to_string(m),
        torch::nn::Sequential(nn::conv(cfg.backbone_channels, cfg.branch_channels, 3), nn::leaky(),
                              nn::conv(cfg.branch_channels, cfg.out_channels, 3))));
  }
}

torch::Tensor EnsembleDecoderImpl::backbone_features(const torch::Tensor& code) {
  require(code.dim() == 4 && code.size(1) == cfg_.latent_channels, ErrorCode::kInvalidArgument,
          "ensemble decoder expects [N," + std::to_string(cfg_.latent_channels) + ",h,w] codes");
  ++backbone_calls_;
  return backbone_->forward(code);
}

EnsemblePrediction EnsembleDecoderImpl::forward(const torch::Tensor& code) {
  const auto features = backbone_features(code);
  EnsemblePrediction pred;
  pred.kind = cfg_.out_channels == 2 ? EnsembleKind::kMv : EnsembleKind::kResidual;
  for (auto& branch : branches_) pred.members.push_back(branch->forward(features));
  return pred;
}

void EnsembleDecoderImpl::tie_branches() {
  torch::NoGradGuard guard;
  const auto source = branches_.front()->parameters();
  for (std::size_t m = 1; m < branches_.size(); ++m) {
    auto target = branches_[m]->parameters();
    for (std::size_t i = 0; i < target.size(); ++i) target[i].copy_(source[i]);
  }
}

int64_t EnsembleDecoderImpl::branch_parameter_count() const {
  int64_t n = 0;
  for (const auto& p : branches_.front()->parameters()) n += p.numel();
  return n;
}

int64_t EnsembleDecoderImpl::backbone_parameter_count() const {
  int64_t n = 0;
  for (const auto& p : backbone_->parameters()) n += p.numel();
  return n;
}

torch::Tensor mixture_mean(const EnsemblePrediction& pred) {
  pred.validate();
  return pred.stacked().mean(0);
}

torch::Tensor mixture_variance(const EnsemblePrediction& pred, double sigma) {
  pred.validate();
  // Shifted-data form of E[x^2] - E[x]^2: exact zero spread for identical
  // members and no cancellation for large magnitudes.
  const auto d = pred.stacked() - pred.members.front().unsqueeze(0);
  return d.pow(2).mean(0) - d.mean(0).pow(2) + sigma * sigma;
}

torch::Tensor mixture_variance(const EnsemblePrediction& pred, std::span<const torch::Tensor> sigmas) {
  pred.validate();
  require(sigmas.size() == pred.members.size(), ErrorCode::kInvalidArgument, "one sigma per ensemble member");
  torch::Tensor second = torch::zeros_like(pred.members.front());
  for (std::size_t m = 0; m < sigmas.size(); ++m) second = second + sigmas[m].pow(2) + pred.members[m].pow(2);
  second = second / static_cast<double>(pred.members.size());
  return second - mixture_mean(pred).pow(2);
}

}  // namespace uncodec
