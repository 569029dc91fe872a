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

#include "uncodec/adversarial.hpp"

#include <cmath>

#include "uncodec/error.hpp"

namespace uncodec {

FgsmScope parse_fgsm_scope(const std::string& name) {
  if (name == "both") return FgsmScope::kBoth;
  if (name == "input_only") return FgsmScope::kInputOnly;
  fail(ErrorCode::kConfig, "unknown fgsm scope '" + name + "'");
}

void FgsmConfig::validate() const {
  require(std::isfinite(epsilon) && epsilon >= 0.0 && epsilon < 1.0, ErrorCode::kConfig,
          "fgsm.epsilon must lie in [0, 1)");
}

torch::Tensor fgsm_eta(const torch::Tensor& grad, double epsilon) {
  require(epsilon >= 0.0, ErrorCode::kInvalidArgument, "fgsm: epsilon must be non-negative");
  torch::NoGradGuard guard;
  // sign() already maps 0 to 0.
  return grad.sign() * epsilon;
}

torch::Tensor fgsm_perturb(const torch::Tensor& x, const torch::Tensor& grad_x, double epsilon) {
  require(x.sizes() == grad_x.sizes(), ErrorCode::kInvalidArgument, "fgsm: gradient shape differs from frame");
  torch::NoGradGuard guard;
  return (x + fgsm_eta(grad_x, epsilon).to(x.scalar_type())).clamp(0.0, 1.0);
}

}  // namespace uncodec
