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

#include "uncodec/codec_model.hpp"
#include "uncodec/ensemble.hpp"

namespace uncodec {

enum class FlowNorm { kL2, kL1 };
FlowNorm parse_flow_norm(const std::string& name);

/// Non-negative per-pixel map, float64 [H, W].
struct HeatMap {
  torch::Tensor values;
  int64_t height() const { return values.size(0); }
  int64_t width() const { return values.size(1); }
  double mean() const { return values.mean().item<double>(); }
};

/// Per-pixel distance between two flows ([2, H, W] or [1, 2, H, W]).
HeatMap flow_distance_map(const torch::Tensor& a, const torch::Tensor& b, FlowNorm norm);

/// Quantization (aleatoric) sensitivity: the MV latent of the estimated flow
/// is rounded, then perturbed by `fraction` of its quantization gap wherever
/// that gap is >= gap_threshold; the map is the distance between the
/// mixture-mean flows decoded from the two codes. Frames are [C, H, W].
HeatMap aleatoric_map(CodecModelImpl& model, const torch::Tensor& x_t, const torch::Tensor& x_ref,
                      FlowNorm norm = FlowNorm::kL2, double gap_threshold = 0.1, double fraction = 0.2);

/// Channel-mean squared error between x_t and the reference warped by `flow`;
/// its mean is motion_mse_loss.
HeatMap epistemic_map(const torch::Tensor& x_t, const torch::Tensor& x_ref, const torch::Tensor& flow);
/// Same, with the flow estimated by the model's motion network.
HeatMap epistemic_map(CodecModelImpl& model, const torch::Tensor& x_t, const torch::Tensor& x_ref);

/// Mixture variance of a single MV ensemble ([1, 2, H, W] members), summed over
/// the two flow components. With remove_floor the unit-sigma floor (2) is
/// subtracted, leaving the spread of the members.
HeatMap predictive_map(const EnsemblePrediction& mv, bool remove_floor = true);
/// Same, decoding the MV ensemble of the pair with the model (inference mode).
HeatMap predictive_map(CodecModelImpl& model, const torch::Tensor& x_t, const torch::Tensor& x_ref,
                       bool remove_floor = true);

/// Min-max normalization to [0, 1]; a constant map becomes all zeros.
torch::Tensor normalize_minmax(const HeatMap& map);

/// 16-bit grayscale PNG of the min-max normalized map.
void write_heatmap_png(const std::string& path, const HeatMap& map);
/// Raw little-endian float32, row-major, no header.
void write_heatmap_raw(const std::string& path, const HeatMap& map);
HeatMap read_heatmap_raw(const std::string& path, int64_t height, int64_t width);

}  // namespace uncodec
