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

#include "uncodec/quantization.hpp"

#include <cmath>

#include "uncodec/error.hpp"

namespace uncodec {

torch::Tensor quantize_train(const torch::Tensor& latent, torch::Generator& gen) {
  // (2k + 1 - 2^24) / 2^25 for k in [0, 2^24): odd numerators keep every value
  // exactly representable in float32 and strictly inside (-1/2, 1/2).
  constexpr int64_t kLevels = int64_t{1} << 24;
  auto k = torch::randint(0, kLevels, latent.sizes(), gen, torch::TensorOptions().dtype(torch::kLong));
  auto noise = (k * 2 + 1 - kLevels).to(torch::kFloat64).div(static_cast<double>(2 * kLevels));
  return latent + noise.to(latent.scalar_type());
}

torch::Tensor quantize_infer(const torch::Tensor& latent, double bound) {
  auto x = latent.detach();
  require(torch::isfinite(x).all().item<bool>(), ErrorCode::kInvalidArgument, "quantize_infer: non-finite latent");
  auto whole = x.trunc();
  auto frac = x - whole;  // exact
  auto q = whole + torch::where(frac.abs() >= 0.5, x.sign(), torch::zeros_like(x));
  if (q.numel() > 0) {
    const double peak = q.abs().max().item<double>();
    require(peak <= bound, ErrorCode::kInvalidArgument,
            "quantized magnitude " + std::to_string(peak) + " exceeds the bound " + std::to_string(bound));
  }
  return q;
}

torch::Tensor perturb_quantized(const torch::Tensor& latent, const torch::Tensor& code, double gap_threshold,
                                double fraction) {
  require(latent.sizes() == code.sizes(), ErrorCode::kInvalidArgument, "perturb_quantized: shape mismatch");
  auto gap = latent - code;
  return code + torch::where(gap.abs() >= gap_threshold, fraction * gap, torch::zeros_like(gap));
}

double linear_noise_bound(std::span<const double> weights) {
  double sum = 0.0;
  for (double w : weights) sum += std::abs(w);
  return 0.5 * sum;
}

}  // namespace uncodec
