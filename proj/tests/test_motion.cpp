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

#include "oracles.hpp"
#include "test_util.hpp"
#include "uncodec/motion.hpp"

using namespace uncodec;

TEST_CASE("zero flow is the identity") {
  auto ref = torch::rand({2, 3, 11, 17});
  CHECK(torch::equal(bilinear_warp(ref, torch::zeros({2, 2, 11, 17})), ref));
}

TEST_CASE("integer flow equals the clamped index shift") {
  torch::manual_seed(3);
  auto ref = torch::rand({2, 3, 9, 12});
  auto flow = torch::randint(-5, 6, {2, 2, 9, 12}).to(torch::kFloat32);
  CHECK(torch::equal(bilinear_warp(ref, flow), oracle::shift_by_integer_flow(ref, flow)));

  auto uniform = torch::zeros({1, 2, 9, 12});
  uniform.select(1, 0).fill_(2);
  auto shifted = bilinear_warp(ref.slice(0, 0, 1), uniform);
  CHECK(torch::equal(shifted.slice(3, 0, 10), ref.slice(0, 0, 1).slice(3, 2, 12)));
}

TEST_CASE("fractional flow interpolates") {
  auto ref = torch::arange(16, torch::kFloat64).view({1, 1, 4, 4});
  auto flow = torch::zeros({1, 2, 4, 4}, torch::kFloat64);
  flow.select(1, 0).fill_(0.25);
  flow.select(1, 1).fill_(0.5);
  auto out = bilinear_warp(ref, flow);
  // Linear ramp: value = 4y + x.
  CHECK(out[0][0][1][1].item<double>() == doctest::Approx(4 * 1.5 + 1.25));
  auto constant = torch::full({1, 2, 5, 5}, 0.3, torch::kFloat64);
  CHECK(test::max_abs_diff(bilinear_warp(constant, torch::randn({1, 2, 5, 5}, torch::kFloat64) * 3), constant) < 1e-15);
}

TEST_CASE("warp gradient matches finite differences") {
  torch::manual_seed(11);
  for (int trial = 0; trial < 5; ++trial) {
    auto ref = torch::rand({1, 2, 6, 7}, torch::kFloat64).requires_grad_(true);
    // Keep samples inside the frame and away from integer positions.
    auto flow = (torch::rand({1, 2, 6, 7}, torch::kFloat64) * 0.8 + 0.1).requires_grad_(true);
    auto weights = torch::randn({1, 2, 6, 7}, torch::kFloat64);
    auto f = [&](const torch::Tensor& r, const torch::Tensor& fl) {
      return (bilinear_warp(r, fl) * weights).sum();
    };
    f(ref, flow).backward();
    for (auto* which : {&ref, &flow}) {
      auto base = which->detach();
      auto fd = torch::zeros_like(base);
      const double step = 1e-6;
      for (int64_t i = 0; i < base.numel(); ++i) {
        auto plus = base.clone(), minus = base.clone();
        plus.view(-1)[i] += step;
        minus.view(-1)[i] -= step;
        const bool is_ref = which == &ref;
        const double fp = f(is_ref ? plus : ref.detach(), is_ref ? flow.detach() : plus).item<double>();
        const double fm = f(is_ref ? minus : ref.detach(), is_ref ? flow.detach() : minus).item<double>();
        fd.view(-1)[i] = (fp - fm) / (2 * step);
      }
      const auto g = which->grad();
      CHECK((g - fd).norm().item<double>() <= 1e-6 * std::max(1.0, fd.norm().item<double>()));
    }
  }
}

TEST_CASE("motion loss and network shapes") {
  auto x = torch::rand({1, 3, 16, 16});
  CHECK(motion_mse_loss(x, x, torch::zeros({1, 2, 16, 16})).item<double>() == 0.0);
  MotionNet net(3, 8, 3);
  auto flow = net->forward(x, x);
  CHECK(flow.sizes() == torch::IntArrayRef{1, 2, 16, 16});
  test::expect_error(ErrorCode::kInvalidArgument, [&] { net->forward(torch::rand({1, 3, 18, 18}), torch::rand({1, 3, 18, 18})); });
}

TEST_CASE("flow files and visualisation") {
  test::TempDir dir("flow");
  auto flow = torch::randn({2, 5, 7});
  write_flow(dir / "f.flo", flow);
  CHECK(torch::equal(read_flow(dir / "f.flo"), flow));
  auto img = flow_to_color(flow);
  CHECK(img.width == 7);
  CHECK(img.height == 5);
  CHECK(img.channels == 3);
}
