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
#include <span>
#include <vector>

namespace uncodec {

inline constexpr int kCdfPrecision = 16;
inline constexpr uint32_t kCdfTotal = uint32_t{1} << kCdfPrecision;

/// Quantized CDF of one channel over the integer support
/// [offset, offset + cdf.size() - 2]. cdf[0] = 0, cdf.back() = kCdfTotal and
/// every symbol has a frequency of at least 1.
struct CdfTable {
  int32_t offset = 0;
  std::vector<uint32_t> cdf;

  int32_t min_symbol() const { return offset; }
  int32_t max_symbol() const { return offset + static_cast<int32_t>(cdf.size()) - 2; }
  std::size_t symbols() const { return cdf.size() - 1; }
  uint32_t frequency(int32_t symbol) const { return cdf[symbol - offset + 1] - cdf[symbol - offset]; }

  bool operator==(const CdfTable&) const = default;
};

/// Frequencies proportional to `pmf` (need not be normalized), each >= 1,
/// summing to exactly kCdfTotal. Deterministic.
CdfTable quantize_pmf(std::span<const double> pmf, int32_t offset);

/// Per-channel probability model over integer symbols. Latents are laid out
/// [N, C, H, W] (channel axis 1).
class EntropyModel {
 public:
  virtual ~EntropyModel() = default;
  virtual int64_t num_channels() const = 0;
  /// Probability mass of the unit bin centred on each value. Same shape as
  /// `values`; differentiable where the implementation allows.
  virtual torch::Tensor likelihood(const torch::Tensor& values) const = 0;
  virtual std::vector<CdfTable> cdf_tables() const = 0;
  virtual uint32_t model_id() const = 0;
};

/// -sum log2(p). Differentiable; no validation (training path).
torch::Tensor rate_bits(const torch::Tensor& likelihoods);

/// -sum log2(p) in double. Throws kInvalidArgument on non-finite or
/// non-positive likelihoods.
double estimate_bits(const torch::Tensor& likelihoods);
double estimate_bits(const torch::Tensor& code, const EntropyModel& model);

/// Clamps each channel of `code` ([N, C, ...]) into its table's support.
torch::Tensor clamp_to_support(const torch::Tensor& code, std::span<const CdfTable> tables);

/// Fully factorized learned prior: per channel, a monotone small network maps
/// x to the logit of its CDF. Bin probability is
///   tail_mass + (1 - max_support * tail_mass) * (CDF(x + 1/2) - CDF(x - 1/2)),
/// so every coded bin has probability >= tail_mass and any support of at most
/// max_support bins has total mass <= 1.
class FactorizedPriorImpl : public torch::nn::Module, public EntropyModel {
 public:
  FactorizedPriorImpl(int64_t channels, double tail_mass = 1e-9, int64_t max_support = 4096, double init_scale = 10.0);

  int64_t num_channels() const override { return channels_; }
  torch::Tensor likelihood(const torch::Tensor& values) const override;
  std::vector<CdfTable> cdf_tables() const override;
  uint32_t model_id() const override;

  /// Same bin probability as likelihood(), evaluated in double precision one
  /// value at a time. Independent scalar path used for tables and checks.
  double bin_probability(int64_t channel, double value) const;
  /// Logit of the CDF of `channel` at x, in double precision.
  double logits_cumulative(int64_t channel, double x) const;

  double tail_mass() const { return tail_mass_; }
  int64_t max_support() const { return max_support_; }

 private:
  torch::Tensor logits_cumulative(const torch::Tensor& x) const;  // x [C, 1, M]

  int64_t channels_;
  double tail_mass_;
  int64_t max_support_;
  std::vector<torch::Tensor> matrices_, biases_, factors_;
};
TORCH_MODULE(FactorizedPrior);

/// Fixed per-channel PMF over [offset, offset + n). Values outside the support
/// get likelihood `tail_mass` but cannot be coded.
class DiscretePmfModel : public EntropyModel {
 public:
  /// pmfs[c] is normalized on construction; every entry must end up >= tail_mass.
  DiscretePmfModel(std::vector<std::vector<double>> pmfs, std::vector<int32_t> offsets, double tail_mass = 1e-9);

  int64_t num_channels() const override { return static_cast<int64_t>(pmfs_.size()); }
  torch::Tensor likelihood(const torch::Tensor& values) const override;
  std::vector<CdfTable> cdf_tables() const override;
  uint32_t model_id() const override;

  double probability(int64_t channel, int32_t symbol) const;

 private:
  std::vector<std::vector<double>> pmfs_;
  std::vector<int32_t> offsets_;
  double tail_mass_;
};

/// FNV-1a, used for model identifiers.
uint32_t fnv1a(const void* data, std::size_t size, uint32_t seed = 2166136261u);
uint32_t hash_tensors(const std::vector<torch::Tensor>& tensors, uint32_t seed = 2166136261u);

}  // namespace uncodec
