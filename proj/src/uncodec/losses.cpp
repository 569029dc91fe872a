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

#include "uncodec/losses.hpp"

#include <algorithm>
#include <numeric>

#include "uncodec/error.hpp"

namespace uncodec {

ClipMode parse_clip_mode(const std::string& name) {
  if (name == "route_to_kth") return ClipMode::kRouteToKth;
  if (name == "detach_clipped") return ClipMode::kDetachClipped;
  fail(ErrorCode::kConfig, "unknown clip mode '" + name + "'");
}

int kth_smallest_index(std::span<const double> losses, int k) {
  require(k >= 1 && k <= static_cast<int>(losses.size()), ErrorCode::kInvalidArgument,
          "k = " + std::to_string(k) + " out of range for " + std::to_string(losses.size()) + " members");
  std::vector<int> order(losses.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return losses[a] < losses[b]; });
  return order[k - 1];
}

torch::Tensor pixel_squared_error(const torch::Tensor& target, const torch::Tensor& prediction) {
  require(target.sizes() == prediction.sizes(), ErrorCode::kInvalidArgument, "prediction and target shapes differ");
  return (prediction - target).pow(2).mean(1);
}

namespace {

void check_ensemble(const torch::Tensor& target, const EnsemblePrediction& preds, int k) {
  preds.validate();
  require(k >= 1 && k <= preds.size(), ErrorCode::kInvalidArgument,
          "k = " + std::to_string(k) + " out of range for h = " + std::to_string(preds.size()));
  require(target.dim() == 4 && preds.members.front().sizes() == target.sizes(), ErrorCode::kInvalidArgument,
          "ensemble members must match the [N,C,H,W] target");
}

}  // namespace

torch::Tensor ensemble_aware_loss(const torch::Tensor& target, const EnsemblePrediction& preds, int k, ClipMode mode) {
  check_ensemble(target, preds, k);
  std::vector<torch::Tensor> errors;
  for (const auto& m : preds.members) errors.push_back(pixel_squared_error(target, m));
  auto e = torch::stack(errors, 0);  // [h, N, H, W]
  torch::Tensor kth;
  {
    torch::NoGradGuard guard;
    auto order = std::get<1>(e.sort(/*stable=*/true, /*dim=*/0, /*descending=*/false));
    kth = order.select(0, k - 1).unsqueeze(0);
  }
  auto e_p = e.gather(0, kth);  // [1, N, H, W]
  if (mode == ClipMode::kDetachClipped) e_p = e_p.detach();
  auto clipped = torch::where(e <= e_p, e, e_p.expand_as(e));
  return clipped.mean({1, 2, 3}).sum();
}

std::vector<torch::Tensor> ensemble_aware_loss_grad(const torch::Tensor& target, const EnsemblePrediction& preds,
                                                    int k, ClipMode mode) {
  check_ensemble(target, preds, k);
  const int h = preds.size();
  auto x = target.detach().to(torch::kFloat64).contiguous();
  std::vector<torch::Tensor> members, grads;
  for (const auto& m : preds.members) {
    members.push_back(m.detach().to(torch::kFloat64).contiguous());
    grads.push_back(torch::zeros_like(members.back()));
  }
  const int64_t n = x.size(0), c = x.size(1), hh = x.size(2), ww = x.size(3);
  const double scale = 2.0 / static_cast<double>(c * n * hh * ww);
  auto xa = x.accessor<double, 4>();
  std::vector<torch::TensorAccessor<double, 4>> ma, ga;
  for (int m = 0; m < h; ++m) {
    ma.push_back(members[m].accessor<double, 4>());
    ga.push_back(grads[m].accessor<double, 4>());
  }
  std::vector<double> err(h);
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t i = 0; i < hh; ++i) {
      for (int64_t j = 0; j < ww; ++j) {
        for (int m = 0; m < h; ++m) {
          double s = 0;
          for (int64_t ch = 0; ch < c; ++ch) {
            const double d = ma[m][b][ch][i][j] - xa[b][ch][i][j];
            s += d * d;
          }
          err[m] = s / static_cast<double>(c);
        }
        const int p = kth_smallest_index(err, k);
        int routed = 0;
        for (int m = 0; m < h; ++m) {
          if (err[m] <= err[p]) {
            for (int64_t ch = 0; ch < c; ++ch) ga[m][b][ch][i][j] += scale * (ma[m][b][ch][i][j] - xa[b][ch][i][j]);
          } else if (mode == ClipMode::kRouteToKth) {
            ++routed;
          }
        }
        for (int64_t ch = 0; ch < c; ++ch) ga[p][b][ch][i][j] += routed * scale * (ma[p][b][ch][i][j] - xa[b][ch][i][j]);
      }
    }
  }
  for (int m = 0; m < h; ++m) grads[m] = grads[m].to(preds.members[m].scalar_type());
  return grads;
}

LossReport rd_loss(double rate_mv_bpp, double rate_res_bpp, const torch::Tensor& x, const torch::Tensor& x_hat,
                   double lambda) {
  require(lambda > 0, ErrorCode::kInvalidArgument, "lambda must be positive");
  require(rate_mv_bpp >= 0 && rate_res_bpp >= 0, ErrorCode::kInvalidArgument, "rates must be non-negative");
  require(x.sizes() == x_hat.sizes(), ErrorCode::kInvalidArgument, "rd_loss: frame shapes differ");
  LossReport r;
  r.rate_mv_bpp = rate_mv_bpp;
  r.rate_res_bpp = rate_res_bpp;
  r.distortion_mse = (x.detach().to(torch::kFloat64) - x_hat.detach().to(torch::kFloat64)).pow(2).mean().item<double>();
  r.final_mse = r.distortion_mse;
  r.lambda = lambda;
  r.total = (rate_mv_bpp + rate_res_bpp) + lambda * r.distortion_mse;
  return r;
}

}  // namespace uncodec
