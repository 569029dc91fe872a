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
#include <string>
#include <vector>

#include "uncodec/ensemble.hpp"

namespace uncodec {

/// How the clipped term min(L_m, L_p) back-propagates for a member m whose
/// error exceeds the k-th smallest (member p):
///  - kRouteToKth: through its smaller argument, i.e. into member p;
///  - kDetachClipped: not at all (the clip value is a constant).
enum class ClipMode { kRouteToKth, kDetachClipped };

ClipMode parse_clip_mode(const std::string& name);

/// Index of the k-th smallest loss (k is 1-based); ties go to the lowest index.
int kth_smallest_index(std::span<const double> losses, int k);

/// Per-pixel squared error averaged over channels: [N, H, W]. Ranking on the
/// channel mean is the same as ranking on the channel sum.
torch::Tensor pixel_squared_error(const torch::Tensor& target, const torch::Tensor& prediction);

/// Ensemble-aware loss
///   sum_m mean_{n,i,j} min(e_m(n,i,j), e_p(n,i,j))
/// where e is pixel_squared_error and p is the member with the k-th smallest
/// error at that pixel. target and members are [N, C, H, W]. With h = 1 this
/// is the plain MSE.
torch::Tensor ensemble_aware_loss(const torch::Tensor& target, const EnsemblePrediction& preds, int k,
                                  ClipMode mode = ClipMode::kRouteToKth);

/// Closed-form gradient of ensemble_aware_loss w.r.t. each member, computed
/// pixel by pixel without autograd.
std::vector<torch::Tensor> ensemble_aware_loss_grad(const torch::Tensor& target, const EnsemblePrediction& preds,
                                                    int k, ClipMode mode = ClipMode::kRouteToKth);

struct LossReport {
  double total = 0;
  double rate_mv_bpp = 0;
  double rate_res_bpp = 0;
  /// Distortion term multiplied by lambda in `total`.
  double distortion_mse = 0;
  std::vector<double> per_member_mse;
  /// MSE of the single final reconstruction (equals distortion_mse for rd_loss).
  double final_mse = 0;
  double lambda = 0;
};

/// total = (rate_mv_bpp + rate_res_bpp) + lambda * MSE(x, x_hat).
LossReport rd_loss(double rate_mv_bpp, double rate_res_bpp, const torch::Tensor& x, const torch::Tensor& x_hat,
                   double lambda);

}  // namespace uncodec
