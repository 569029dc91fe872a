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

// Independent reference computations shared by the unit and acceptance tests.
// They are deliberately naive: scalar loops in double precision.

#pragma once

#include <torch/torch.h>

#include <vector>

#include "uncodec/evaluation.hpp"

namespace uncodec::oracle {

/// Ensemble-aware loss by per-pixel enumeration: for every pixel the member
/// errors are sorted, the k-th value clips the others, and the clipped values
/// are summed over members and averaged over pixels.
double ensemble_aware_loss(const torch::Tensor& x, const std::vector<torch::Tensor>& preds, int k);

/// out[n,c,y,x] = ref[n,c,clamp(y+dy),clamp(x+dx)] for per-pixel integer flow.
torch::Tensor shift_by_integer_flow(const torch::Tensor& ref, const torch::Tensor& flow);

/// Mixture moments element by element: mean of the members and
/// (1/h) sum(sigma^2 + mu_m^2) - mean^2.
torch::Tensor mixture_mean(const std::vector<torch::Tensor>& members);
torch::Tensor mixture_variance(const std::vector<torch::Tensor>& members, double sigma);

/// Least-squares polynomial of degree 3 through torch's lstsq on the raw
/// Vandermonde matrix. Coefficients c0..c3.
std::vector<double> polyfit3(const std::vector<double>& x, const std::vector<double>& y);

/// BD-rate with a dense trapezoid rule (`samples` intervals) over the PSNR
/// overlap. Cubic fits come from polyfit3; PCHIP reuses the library
/// interpolant so only the integration is checked.
double bd_rate_dense(const RDCurve& test, const RDCurve& anchor, BdMethod method, int samples = 10000);

}  // namespace uncodec::oracle
