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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uncodec/config.hpp"
#include "uncodec/ensemble.hpp"
#include "uncodec/entropy_model.hpp"
#include "uncodec/motion.hpp"

namespace uncodec {

struct CodecConfig {
  int channels = 3;
  int h = 4;
  int latent_channels_mv = 64;
  int latent_channels_res = 96;
  int hidden_channels = 128;
  int backbone_channels = 64;
  int branch_channels = 32;
  int motion_channels = 32;
  int motion_levels = 3;
  int refine_channels = 64;
  double tail_mass = 1e-9;
  int64_t max_support = 4096;

  static CodecConfig from_config(const Config& config);
  void validate() const;
  /// Canonical text; part of the model identifier.
  std::string echo() const;
};

/// Spatial granularity of the auto-encoders; frames are edge-padded to it.
inline constexpr int kPadMultiple = 16;

enum class CodingMode {
  kTrain,  // additive-noise quantization, differentiable rates
  kInfer,  // rounding, codes clamped into the coded support, output clamped to [0, 1]
};

enum class CodingStage {
  kInterOnly,  // stop after the refined motion-compensated predictions
  kFull,
};

struct PFrameResult {
  /// Final reconstruction [N, C, H, W] (undefined for kInterOnly).
  torch::Tensor reconstruction;
  /// Scalar rate tensors in bits, summed over the batch.
  torch::Tensor bits_mv, bits_res;
  torch::Tensor flow;  // estimated motion [N, 2, H, W]
  EnsemblePrediction mv_ensemble, refined_mc, res_ensemble, reconstructions;
  /// Quantized (or noisy) latents at the padded resolution.
  torch::Tensor mv_code, res_code;
  /// Unquantized latents.
  torch::Tensor mv_latent, res_latent;
};

/// Output of the decoder-side synthesis, shared by encoder and decoder.
struct Synthesis {
  EnsemblePrediction mv_ensemble, refined_mc, res_ensemble, reconstructions;
  torch::Tensor reconstruction;
};

struct ModelSizeReport {
  int h = 0;
  int64_t total = 0;
  int64_t motion = 0, mv_encoder = 0, mv_decoder = 0, res_encoder = 0, res_decoder = 0;
  int64_t prediction_refine = 0, reconstruction_refine = 0, entropy_models = 0;
  /// One branch (two conv layers) of each ensemble decoder.
  int64_t mv_branch = 0, res_branch = 0;
  std::string to_string() const;
};

class CodecModelImpl : public torch::nn::Module {
 public:
  explicit CodecModelImpl(const CodecConfig& cfg);

  const CodecConfig& config() const { return cfg_; }

  /// x_t, x_ref: [N, C, H, W] in [0, 1]. `gen` supplies the quantization
  /// noise in kTrain mode and is unused otherwise.
  PFrameResult forward(const torch::Tensor& x_t, const torch::Tensor& x_ref, CodingMode mode,
                       torch::Generator* gen = nullptr, CodingStage stage = CodingStage::kFull);

  torch::Tensor estimate_motion(const torch::Tensor& x_t, const torch::Tensor& x_ref);
  torch::Tensor encode_mv(const torch::Tensor& flow);
  torch::Tensor encode_residual(const torch::Tensor& residual);
  /// h warps of the reference followed by the Prediction Refine Net.
  EnsemblePrediction predict(const EnsemblePrediction& mv, const torch::Tensor& x_ref);
  /// h reconstructions (refined prediction + residual) and the Reconstruction
  /// Refine Net output.
  torch::Tensor reconstruct(const EnsemblePrediction& refined, const EnsemblePrediction& residuals,
                            EnsemblePrediction* members);

  /// Decoder: all tensors at the padded resolution, codes [1, C, h, w].
  Synthesis synthesize(const torch::Tensor& mv_code, const torch::Tensor& res_code, const torch::Tensor& x_ref);

  /// Integer codes for coding: rounding followed by clamping into the support.
  torch::Tensor code_mv(const torch::Tensor& latent);
  torch::Tensor code_residual(const torch::Tensor& latent);

  /// CDF tables, computed on first use. Call invalidate_tables() after any
  /// parameter change.
  const std::vector<CdfTable>& mv_tables();
  const std::vector<CdfTable>& res_tables();
  void invalidate_tables();

  /// Hash of the configuration echo and every parameter.
  uint32_t model_id() const;

  /// Motion, MV coding, MV decoder, MV prior and Prediction Refine Net.
  std::vector<torch::Tensor> inter_parameters() const;
  /// Residual coding, residual decoder and prior, Reconstruction Refine Net.
  std::vector<torch::Tensor> residual_parameters() const;

  ModelSizeReport size_report() const;

  /// Zeroes the last layer of both refine nets: refined = warp and
  /// final = mean of the h reconstructions.
  void make_refine_passthrough();

  MotionNet motion{nullptr};
  torch::nn::Sequential mv_encoder{nullptr}, res_encoder{nullptr};
  EnsembleDecoder mv_decoder{nullptr}, res_decoder{nullptr};
  torch::nn::Sequential prediction_refine{nullptr}, reconstruction_refine{nullptr};
  FactorizedPrior mv_prior{nullptr}, res_prior{nullptr};

 private:
  CodecConfig cfg_;
  std::optional<std::vector<CdfTable>> mv_tables_, res_tables_;
};
TORCH_MODULE(CodecModel);

/// Edge-replicates the bottom/right border up to multiples of kPadMultiple.
torch::Tensor pad_frame(const torch::Tensor& x);
torch::Tensor crop_frame(const torch::Tensor& x, int64_t height, int64_t width);

int64_t count_parameters(const std::vector<torch::Tensor>& params);

}  // namespace uncodec
