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

#include "uncodec/entropy_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include "uncodec/error.hpp"
#include "uncodec/quantization.hpp"

namespace uncodec {
namespace {

constexpr int kFilters[] = {1, 3, 3, 3, 1};
constexpr int kLayers = 4;

double softplus(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Double-precision copy of one channel's density network.
struct ScalarNet {
  std::vector<std::vector<double>> mats, biases, factors;  // row-major [out][in]

  double logits(double x) const {
    std::vector<double> v{x};
    for (int i = 0; i < kLayers; ++i) {
      const int in = kFilters[i], out = kFilters[i + 1];
      std::vector<double> next(out);
      for (int o = 0; o < out; ++o) {
        double acc = biases[i][o];
        for (int j = 0; j < in; ++j) acc += mats[i][o * in + j] * v[j];
        if (i < kLayers - 1) acc += std::tanh(factors[i][o]) * std::tanh(acc);
        next[o] = acc;
      }
      v = std::move(next);
    }
    return v[0];
  }
};

ScalarNet scalar_net(const std::vector<torch::Tensor>& mats, const std::vector<torch::Tensor>& biases,
                     const std::vector<torch::Tensor>& factors, int64_t channel) {
  ScalarNet net;
  auto to_vec = [](const torch::Tensor& t) {
    auto d = t.detach().to(torch::kFloat64).contiguous();
    return std::vector<double>(d.data_ptr<double>(), d.data_ptr<double>() + d.numel());
  };
  for (int i = 0; i < kLayers; ++i) {
    auto m = to_vec(mats[i][channel]);
    for (auto& w : m) w = softplus(w);
    net.mats.push_back(std::move(m));
    net.biases.push_back(to_vec(biases[i][channel]));
    if (i < kLayers - 1) net.factors.push_back(to_vec(factors[i][channel]));
  }
  return net;
}

double bin_mass(const ScalarNet& net, double value, double tail_mass, int64_t max_support) {
  const double lower = net.logits(value - 0.5);
  const double upper = net.logits(value + 0.5);
  // Evaluate in the tail that keeps sigmoid away from 1.
  const double sign = (lower + upper) > 0 ? -1.0 : 1.0;
  const double p = std::abs(sigmoid(sign * upper) - sigmoid(sign * lower));
  return tail_mass + (1.0 - static_cast<double>(max_support) * tail_mass) * p;
}

}  // namespace

CdfTable quantize_pmf(std::span<const double> pmf, int32_t offset) {
  const std::size_t n = pmf.size();
  require(n >= 1 && n <= kCdfTotal / 2, ErrorCode::kInvalidArgument, "CDF support must have 1..32768 symbols");
  double sum = 0.0;
  for (double p : pmf) {
    require(std::isfinite(p) && p >= 0.0, ErrorCode::kInvalidArgument, "pmf entries must be finite and >= 0");
    sum += p;
  }
  require(sum > 0.0, ErrorCode::kInvalidArgument, "pmf has zero mass");

  std::vector<int64_t> freq(n);
  int64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    freq[i] = std::max<int64_t>(1, std::llround(pmf[i] / sum * kCdfTotal));
    total += freq[i];
  }
  // Settle the rounding surplus/deficit on the largest bins, where one count
  // costs the least.
  using Entry = std::pair<int64_t, int64_t>;  // (freq, -index): largest first, lowest index on ties
  std::priority_queue<Entry> heap;
  for (std::size_t i = 0; i < n; ++i) heap.push({freq[i], -static_cast<int64_t>(i)});
  while (total != static_cast<int64_t>(kCdfTotal)) {
    auto [f, neg_i] = heap.top();
    heap.pop();
    const auto i = static_cast<std::size_t>(-neg_i);
    if (total > static_cast<int64_t>(kCdfTotal)) {
      const int64_t take = std::min<int64_t>(f - 1, total - kCdfTotal);
      freq[i] -= take;
      total -= take;
      if (take == 0) continue;  // bin exhausted, try the next largest
    } else {
      freq[i] += kCdfTotal - total;
      total = kCdfTotal;
    }
    heap.push({freq[i], neg_i});
  }

  CdfTable table;
  table.offset = offset;
  table.cdf.resize(n + 1);
  table.cdf[0] = 0;
  for (std::size_t i = 0; i < n; ++i) table.cdf[i + 1] = table.cdf[i] + static_cast<uint32_t>(freq[i]);
  return table;
}

torch::Tensor rate_bits(const torch::Tensor& likelihoods) {
  return -likelihoods.log().sum() / std::numbers::ln2;
}

double estimate_bits(const torch::Tensor& likelihoods) {
  auto p = likelihoods.detach().to(torch::kFloat64);
  if (p.numel() == 0) return 0.0;
  require(torch::isfinite(p).all().item<bool>() && (p > 0).all().item<bool>(), ErrorCode::kInvalidArgument,
          "estimate_bits: likelihoods must be finite and positive");
  return -p.log2().sum().item<double>();
}

double estimate_bits(const torch::Tensor& code, const EntropyModel& model) {
  return estimate_bits(model.likelihood(code));
}

torch::Tensor clamp_to_support(const torch::Tensor& code, std::span<const CdfTable> tables) {
  require(code.dim() >= 2 && code.size(1) == static_cast<int64_t>(tables.size()), ErrorCode::kInvalidArgument,
          "clamp_to_support: channel count differs from the tables");
  std::vector<double> lo, hi;
  for (const auto& t : tables) {
    lo.push_back(t.min_symbol());
    hi.push_back(t.max_symbol());
  }
  std::vector<int64_t> shape(code.dim(), 1);
  shape[1] = code.size(1);
  auto lo_t = torch::tensor(lo, code.options()).view(shape);
  auto hi_t = torch::tensor(hi, code.options()).view(shape);
  return torch::max(torch::min(code, hi_t), lo_t);
}

FactorizedPriorImpl::FactorizedPriorImpl(int64_t channels, double tail_mass, int64_t max_support, double init_scale)
    : channels_(channels), tail_mass_(tail_mass), max_support_(max_support) {
  require(channels >= 1, ErrorCode::kInvalidArgument, "factorized prior needs >= 1 channel");
  require(tail_mass > 0 && tail_mass * max_support < 0.5, ErrorCode::kInvalidArgument,
          "tail mass too large for the support size");
  require(max_support >= 2 && max_support <= static_cast<int64_t>(kCdfTotal / 2), ErrorCode::kInvalidArgument,
          "max_support must be in [2, 32768]");
  const double scale = std::pow(init_scale, 1.0 / kLayers);
  for (int i = 0; i < kLayers; ++i) {
    const double init = std::log(std::expm1(1.0 / scale / kFilters[i + 1]));
    matrices_.push_back(register_parameter("matrix" + std::to_string(i),
                                           torch::full({channels, kFilters[i + 1], kFilters[i]}, init)));
    biases_.push_back(register_parameter("bias" + std::to_string(i),
                                         torch::rand({channels, kFilters[i + 1], 1}) - 0.5));
    if (i < kLayers - 1) {
      factors_.push_back(register_parameter("factor" + std::to_string(i), torch::zeros({channels, kFilters[i + 1], 1})));
    }
  }
}

torch::Tensor FactorizedPriorImpl::logits_cumulative(const torch::Tensor& x) const {
  auto v = x;
  for (int i = 0; i < kLayers; ++i) {
    v = torch::matmul(torch::softplus(matrices_[i]), v) + biases_[i];
    if (i < kLayers - 1) v = v + torch::tanh(factors_[i]) * torch::tanh(v);
  }
  return v;
}

torch::Tensor FactorizedPriorImpl::likelihood(const torch::Tensor& values) const {
  require(values.dim() >= 2 && values.size(1) == channels_, ErrorCode::kInvalidArgument,
          "likelihood: expected channel axis of size " + std::to_string(channels_));
  auto perm = values.transpose(0, 1);
  auto shape = perm.sizes().vec();
  auto v = perm.reshape({channels_, 1, -1});
  auto lower = logits_cumulative(v - 0.5);
  auto upper = logits_cumulative(v + 0.5);
  auto sign = -(lower + upper).sign().detach();
  sign = torch::where(sign == 0, torch::ones_like(sign), sign);
  auto p = (torch::sigmoid(sign * upper) - torch::sigmoid(sign * lower)).abs();
  auto mixed = tail_mass_ + (1.0 - static_cast<double>(max_support_) * tail_mass_) * p;
  return mixed.reshape(shape).transpose(0, 1);
}

double FactorizedPriorImpl::logits_cumulative(int64_t channel, double x) const {
  return scalar_net(matrices_, biases_, factors_, channel).logits(x);
}

double FactorizedPriorImpl::bin_probability(int64_t channel, double value) const {
  return bin_mass(scalar_net(matrices_, biases_, factors_, channel), value, tail_mass_, max_support_);
}

std::vector<CdfTable> FactorizedPriorImpl::cdf_tables() const {
  std::vector<CdfTable> tables;
  const auto bound = static_cast<int64_t>(kQuantizedBound);
  for (int64_t c = 0; c < channels_; ++c) {
    const auto net = scalar_net(matrices_, biases_, factors_, c);
    auto quantile_of = [&](double q) {
      const double target = std::log(q / (1.0 - q));
      double lo = -kQuantizedBound - 1, hi = kQuantizedBound + 1;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (net.logits(mid) < target ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    };
    int64_t lo = std::clamp<int64_t>(static_cast<int64_t>(std::floor(quantile_of(tail_mass_ / 2))), -bound, bound);
    int64_t hi = std::clamp<int64_t>(static_cast<int64_t>(std::ceil(quantile_of(1 - tail_mass_ / 2))), -bound, bound);
    if (hi < lo) std::swap(lo, hi);
    if (hi - lo + 1 > max_support_) {
      const auto median = static_cast<int64_t>(std::llround(quantile_of(0.5)));
      lo = std::clamp<int64_t>(median - max_support_ / 2, -bound, bound - max_support_ + 1);
      hi = lo + max_support_ - 1;
    }
    std::vector<double> pmf;
    pmf.reserve(hi - lo + 1);
    for (int64_t s = lo; s <= hi; ++s) pmf.push_back(bin_mass(net, static_cast<double>(s), tail_mass_, max_support_));
    tables.push_back(quantize_pmf(pmf, static_cast<int32_t>(lo)));
  }
  return tables;
}

uint32_t FactorizedPriorImpl::model_id() const {
  uint32_t h = hash_tensors(parameters());
  h = fnv1a(&tail_mass_, sizeof(tail_mass_), h);
  return fnv1a(&max_support_, sizeof(max_support_), h);
}

DiscretePmfModel::DiscretePmfModel(std::vector<std::vector<double>> pmfs, std::vector<int32_t> offsets,
                                   double tail_mass)
    : pmfs_(std::move(pmfs)), offsets_(std::move(offsets)), tail_mass_(tail_mass) {
  require(!pmfs_.empty() && pmfs_.size() == offsets_.size(), ErrorCode::kInvalidArgument,
          "DiscretePmfModel: one pmf and offset per channel");
  for (auto& pmf : pmfs_) {
    double sum = 0;
    for (double p : pmf) sum += p;
    require(!pmf.empty() && sum > 0, ErrorCode::kInvalidArgument, "DiscretePmfModel: empty pmf");
    for (auto& p : pmf) {
      p /= sum;
      require(p >= tail_mass_, ErrorCode::kInvalidArgument, "DiscretePmfModel: pmf entry below the tail mass");
    }
  }
}

double DiscretePmfModel::probability(int64_t channel, int32_t symbol) const {
  const auto& pmf = pmfs_.at(channel);
  const int64_t i = static_cast<int64_t>(symbol) - offsets_.at(channel);
  if (i < 0 || i >= static_cast<int64_t>(pmf.size())) return tail_mass_;
  return pmf[i];
}

torch::Tensor DiscretePmfModel::likelihood(const torch::Tensor& values) const {
  require(values.dim() >= 2 && values.size(1) == num_channels(), ErrorCode::kInvalidArgument,
          "likelihood: channel count mismatch");
  auto v = values.detach().to(torch::kFloat64).contiguous();
  auto out = torch::empty_like(v);
  const int64_t n = v.size(0), c = v.size(1), inner = v.numel() / std::max<int64_t>(1, n * c);
  const double* src = v.data_ptr<double>();
  double* dst = out.data_ptr<double>();
  for (int64_t b = 0; b < n; ++b)
    for (int64_t ch = 0; ch < c; ++ch)
      for (int64_t i = 0; i < inner; ++i) {
        const int64_t k = (b * c + ch) * inner + i;
        dst[k] = probability(ch, static_cast<int32_t>(std::llround(src[k])));
      }
  return out.to(values.scalar_type());
}

std::vector<CdfTable> DiscretePmfModel::cdf_tables() const {
  std::vector<CdfTable> tables;
  for (std::size_t c = 0; c < pmfs_.size(); ++c) tables.push_back(quantize_pmf(pmfs_[c], offsets_[c]));
  return tables;
}

uint32_t DiscretePmfModel::model_id() const {
  uint32_t h = 2166136261u;
  for (std::size_t c = 0; c < pmfs_.size(); ++c) {
    h = fnv1a(pmfs_[c].data(), pmfs_[c].size() * sizeof(double), h);
    h = fnv1a(&offsets_[c], sizeof(int32_t), h);
  }
  return h;
}

uint32_t fnv1a(const void* data, std::size_t size, uint32_t seed) {
  uint32_t h = seed;
  const auto* p = static_cast<const uint8_t*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 16777619u;
  }
  return h;
}

uint32_t hash_tensors(const std::vector<torch::Tensor>& tensors, uint32_t seed) {
  uint32_t h = seed;
  for (const auto& t : tensors) {
    auto c = t.detach().contiguous();
    h = fnv1a(c.data_ptr(), c.numel() * c.element_size(), h);
  }
  return h;
}

}  // namespace uncodec
