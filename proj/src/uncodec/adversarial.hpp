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

namespace uncodec {

enum class FgsmScope {
  kBoth,       // perturbed frame is both the network input and the distortion target
  kInputOnly,  // perturbed input, clean target
};

FgsmScope parse_fgsm_scope(const std::string& name);

struct FgsmConfig {
  bool enabled = true;
  double epsilon = 4.0 / 255.0;
  FgsmScope scope = FgsmScope::kBoth;

  void validate() const;
};

/// epsilon * sign(grad), sign(0) = 0.
torch::Tensor fgsm_eta(const torch::Tensor& grad, double epsilon);

/// clamp(x + epsilon * sign(grad_x), 0, 1) with sign(0) = 0.
torch::Tensor fgsm_perturb(const torch::Tensor& x, const torch::Tensor& grad_x, double epsilon);

}  // namespace uncodec
