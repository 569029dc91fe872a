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

#include <cmath>

#include "test_util.hpp"
#include "uncodec/bitstream.hpp"
#include "uncodec/entropy_model.hpp"
#include "uncodec/quantization.hpp"
#include "uncodec/range_coder.hpp"

using namespace uncodec;
using test::expect_error;

namespace {

// Codes drawn from the coded distribution of each channel.
torch::Tensor sample_codes(const std::vector<CdfTable>& tables, int64_t h, int64_t w, std::mt19937_64& rng) {
  auto code = torch::empty({1, static_cast<int64_t>(tables.size()), h, w});
  std::uniform_int_distribution<uint32_t> u(0, kCdfTotal - 1);
  for (std::size_t c = 0; c < tables.size(); ++c) {
    const auto& cdf = tables[c].cdf;
    for (int64_t i = 0; i < h * w; ++i) {
      const uint32_t r = u(rng);
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
      code[0][c].view(-1)[i] = static_cast<float>(tables[c].offset + (it - cdf.begin()) - 1);
    }
  }
  return code;
}

DiscretePmfModel random_pmf_model(int channels, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 40), off(-20, 5);
  std::exponential_distribution<double> e(1.0);
  std::vector<std::vector<double>> pmfs;
  std::vector<int32_t> offsets;
  for (int c = 0; c < channels; ++c) {
    std::vector<double> p(len(rng));
    for (auto& v : p) v = 1e-3 + e(rng);
    pmfs.push_back(p);
    offsets.push_back(off(rng));
  }
  return DiscretePmfModel(pmfs, offsets);
}

}  // namespace

TEST_CASE("training noise lies strictly inside the open unit interval") {
  auto gen = at::detail::createCPUGenerator(7);
  auto noise = quantize_train(torch::zeros({100000}), gen);
  CHECK(noise.abs().max().item<double>() < 0.5);
  CHECK(std::abs(noise.mean().item<double>()) < 0.01);
  CHECK(noise.var().item<double>() == doctest::Approx(1.0 / 12).epsilon(0.02));

  auto gen2 = at::detail::createCPUGenerator(7);
  CHECK(torch::equal(quantize_train(torch::zeros({100000}), gen2), noise));

  auto y = torch::randn({10}).requires_grad_(true);
  quantize_train(y, gen).sum().backward();
  CHECK(torch::equal(y.grad(), torch::ones({10})));
}

TEST_CASE("inference rounding is half away from zero and idempotent") {
  auto x = torch::tensor({0.5, -0.5, 1.5, 2.5, -2.5, 0.49999, -1.2, 3.0}, torch::kFloat64);
  auto q = quantize_infer(x);
  CHECK(torch::equal(q, torch::tensor({1.0, -1.0, 2.0, 3.0, -3.0, 0.0, -1.0, 3.0}, torch::kFloat64)));
  auto r = torch::randn({1000}) * 50;
  CHECK(torch::equal(quantize_infer(quantize_infer(r)), quantize_infer(r)));
  expect_error(ErrorCode::kInvalidArgument, [] { quantize_infer(torch::tensor({40000.0})); });
  expect_error(ErrorCode::kInvalidArgument, [] { quantize_infer(torch::tensor({NAN})); });
}

TEST_CASE("perturbation of quantized values") {
  auto latent = torch::tensor({0.3, 0.05, -0.45, 2.0});
  auto code = quantize_infer(latent);
  auto p = perturb_quantized(latent, code, 0.1, 0.2);
  CHECK(p[0].item<double>() == doctest::Approx(0.06));
  CHECK(p[1].item<double>() == 0.0);
  CHECK(p[2].item<double>() == doctest::Approx(-0.09));
  CHECK(p[3].item<double>() == 2.0);
  const std::vector<double> w{1.0, -2.0, 0.5};
  CHECK(linear_noise_bound(w) == 1.75);
}

TEST_CASE("pmf quantization keeps every symbol codable") {
  const std::vector<double> pmf{1e-12, 0.5, 0.25, 1e-9, 0.25};
  auto t = quantize_pmf(pmf, -2);
  CHECK(t.cdf.front() == 0);
  CHECK(t.cdf.back() == kCdfTotal);
  for (int32_t s = t.min_symbol(); s <= t.max_symbol(); ++s) CHECK(t.frequency(s) >= 1);
  CHECK(t.min_symbol() == -2);
  CHECK(t.max_symbol() == 2);
  expect_error(ErrorCode::kInvalidArgument, [] { quantize_pmf(std::vector<double>{0.0, 0.0}, 0); });
}

TEST_CASE("range coder round trip") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto model = random_pmf_model(4, rng);
    const auto tables = model.cdf_tables();
    std::vector<std::pair<int, int32_t>> symbols;
    std::uniform_int_distribution<int> ch(0, 3);
    RangeEncoder enc;
    for (int i = 0; i < 500; ++i) {
      const int c = ch(rng);
      std::uniform_int_distribution<int32_t> s(tables[c].min_symbol(), tables[c].max_symbol());
      symbols.push_back({c, s(rng)});
      enc.encode(tables[c], symbols.back().second);
    }
    const auto bytes = enc.finish();
    RangeDecoder dec(bytes);
    bool same = true;
    for (auto [c, s] : symbols) same = same && dec.decode(tables[c]) == s;
    CHECK(same);
  }
  RangeEncoder enc;
  auto t = quantize_pmf(std::vector<double>{0.5, 0.5}, 0);
  expect_error(ErrorCode::kInvalidArgument, [&] { enc.encode(t, 2); });
}

TEST_CASE("factorized prior likelihoods and tables") {
  torch::manual_seed(1);
  FactorizedPrior prior(4);
  auto values = torch::arange(-30, 31, torch::kFloat32).view({1, 1, -1}).expand({1, 4, 61}).contiguous();
  auto p = prior->likelihood(values);
  CHECK((p > 0).all().item<bool>());
  CHECK(p.sum(2).max().item<double>() <= 1.0 + 1e-5);
  for (int c = 0; c < 4; ++c) {
    for (int v : {-3, 0, 7}) {
      CHECK(p[0][c][v + 30].item<double>() == doctest::Approx(prior->bin_probability(c, v)).epsilon(1e-4));
    }
  }
  const auto tables = prior->cdf_tables();
  REQUIRE(tables.size() == 4);
  for (const auto& t : tables) {
    CHECK(t.symbols() <= 4096);
    CHECK(t.min_symbol() <= 0);
    CHECK(t.max_symbol() >= 0);
  }

  auto code = torch::tensor({-100000.0f, 0.0f, 100000.0f, 1.0f}).view({1, 4, 1, 1});
  auto clamped = clamp_to_support(code, tables);
  CHECK(clamped[0][0][0][0].item<float>() == tables[0].min_symbol());
  CHECK(clamped[0][2][0][0].item<float>() == tables[2].max_symbol());
  CHECK(clamped[0][1][0][0].item<float>() == 0.0f);

  const auto id = prior->model_id();
  {
    torch::NoGradGuard g;
    prior->parameters()[0].add_(0.01);
  }
  CHECK(prior->model_id() != id);
}

TEST_CASE("entropy coding is lossless and close to the estimate") {
  std::mt19937_64 rng(9);
  torch::manual_seed(2);
  FactorizedPrior prior(6);
  for (int trial = 0; trial < 10; ++trial) {
    auto pmf_model = random_pmf_model(5, rng);
    for (const EntropyModel* model : std::initializer_list<const EntropyModel*>{&pmf_model, prior.get()}) {
      const auto tables = model->cdf_tables();
      auto code = sample_codes(tables, 12, 10, rng);
      const auto bytes = entropy_encode(code, *model, StreamKind::kResidual);
      const auto decoded = entropy_decode(bytes, *model);
      CHECK(torch::equal(decoded.code, code.squeeze(0)));
      CHECK(decoded.bytes_consumed == bytes.size());
      CHECK(decoded.header.kind == StreamKind::kResidual);
      const double est = estimate_bits(code, *model) / 8;
      CHECK(std::abs(static_cast<double>(bytes.size()) - est) <= 0.02 * est + 64);
    }
  }
}

TEST_CASE("entropy decoding rejects damaged streams") {
  std::mt19937_64 rng(3);
  auto model = random_pmf_model(3, rng);
  auto code = sample_codes(model.cdf_tables(), 16, 16, rng);
  auto bytes = entropy_encode(code, model, StreamKind::kMv);
  const auto tables = model.cdf_tables();

  auto truncated = std::vector<uint8_t>(bytes.begin(), bytes.end() - 8);
  expect_error(ErrorCode::kBitstream, [&] { entropy_decode(truncated, model); });
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  expect_error(ErrorCode::kBitstream, [&] { entropy_decode(bad_magic, model); });
  expect_error(ErrorCode::kBitstream, [&] { entropy_decode(bytes, tables, model.model_id() + 1); });
  auto header_only = std::vector<uint8_t>(bytes.begin(), bytes.begin() + 10);
  expect_error(ErrorCode::kBitstream, [&] { entropy_decode(header_only, model); });
  CHECK(bytes.size() >= kStreamHeaderBytes);

  auto outside = code.clone();
  outside[0][0][0][0] = 1000;
  expect_error(ErrorCode::kInvalidArgument, [&] { entropy_encode(outside, model, StreamKind::kMv); });
  expect_error(ErrorCode::kInvalidArgument, [&] { entropy_encode(code + 0.5, model, StreamKind::kMv); });
}

TEST_CASE("empty codes produce header-only streams") {
  std::mt19937_64 rng(1);
  auto model = random_pmf_model(2, rng);
  auto bytes = entropy_encode(torch::zeros({2, 0, 4}), model, StreamKind::kMv);
  CHECK(bytes.size() == kStreamHeaderBytes);
  CHECK(entropy_decode(bytes, model).code.numel() == 0);
}
