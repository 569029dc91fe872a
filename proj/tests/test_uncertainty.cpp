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

#include <filesystem>

#include "oracles.hpp"
#include "test_util.hpp"
#include "uncodec/codec_model.hpp"
#include "uncodec/motion.hpp"
#include "uncodec/synthetic.hpp"
#include "uncodec/uncertainty.hpp"

using namespace uncodec;

TEST_CASE("flow distance maps") {
  auto a = torch::zeros({1, 2, 2, 2});
  auto b = torch::zeros({1, 2, 2, 2});
  b[0][0][0][0] = 3;
  b[0][1][0][0] = -4;
  auto l2 = flow_distance_map(a, b, FlowNorm::kL2);
  auto l1 = flow_distance_map(a, b, FlowNorm::kL1);
  CHECK(l2.values.sizes() == torch::IntArrayRef{2, 2});
  CHECK(l2.values[0][0].item<double>() == doctest::Approx(5.0));
  CHECK(l1.values[0][0].item<double>() == doctest::Approx(7.0));
  CHECK(l1.values[1][1].item<double>() == 0.0);
  CHECK(parse_flow_norm("l1") == FlowNorm::kL1);
  test::expect_error(ErrorCode::kConfig, [] { parse_flow_norm("linf"); });
}

TEST_CASE("predictive map is the summed mixture variance") {
  torch::manual_seed(2);
  EnsemblePrediction mv;
  for (int m = 0; m < 4; ++m) mv.members.push_back(torch::randn({1, 2, 5, 6}, torch::kFloat64));
  auto var = oracle::mixture_variance(mv.members, 1.0);
  auto expect = (var[0][0] + var[0][1]).to(torch::kFloat64);
  CHECK(test::max_abs_diff(predictive_map(mv, false).values, expect) < 1e-12);
  CHECK(test::max_abs_diff(predictive_map(mv, true).values, (expect - 2).clamp_min(0)) < 1e-12);

  EnsemblePrediction same;
  for (int m = 0; m < 3; ++m) same.members.push_back(mv.members[0]);
  CHECK(predictive_map(same, true).values.abs().max().item<double>() == 0.0);
  CHECK(torch::equal(predictive_map(same, false).values, torch::full({5, 6}, 2.0, torch::kFloat64)));
}

TEST_CASE("epistemic map is the motion-compensation error") {
  auto ref = torch::rand({3, 8, 8}, torch::kFloat64);
  auto flow = torch::rand({1, 2, 8, 8}, torch::kFloat64) * 2 - 1;
  auto cur = bilinear_warp(ref.unsqueeze(0), flow)[0];
  CHECK(epistemic_map(cur, ref, flow).values.abs().max().item<double>() < 1e-12);
  auto other = torch::rand({3, 8, 8}, torch::kFloat64);
  CHECK(epistemic_map(other, ref, flow).mean() ==
        doctest::Approx(motion_mse_loss(other.unsqueeze(0), ref.unsqueeze(0), flow).item<double>()));
}

TEST_CASE("model-driven maps") {
  torch::manual_seed(0);
  Config c;
  c.set("codec.latent_channels_mv", "8");
  c.set("codec.latent_channels_res", "8");
  c.set("codec.hidden_channels", "16");
  CodecModel model(CodecConfig::from_config(c));
  model->eval();
  SyntheticParams p;
  p.height = 24;
  p.width = 40;
  p.frames = 2;
  auto seq = generate_clip(p, 4).sequence;
  auto ref = seq.frames[0].data, cur = seq.frames[1].data;
  for (const auto& map : {aleatoric_map(*model, cur, ref), epistemic_map(*model, cur, ref), predictive_map(*model, cur, ref)}) {
    CHECK(map.height() == 24);
    CHECK(map.width() == 40);
    CHECK(map.values.min().item<double>() >= 0);
  }
  // No perturbation at all gives a zero aleatoric map.
  CHECK(aleatoric_map(*model, cur, ref, FlowNorm::kL2, 1.0, 0.2).values.abs().max().item<double>() == 0.0);
}

TEST_CASE("heat map files") {
  test::TempDir dir("heat");
  HeatMap m{torch::rand({6, 9}, torch::kFloat64) * 5};
  write_heatmap_raw(dir / "m.f32", m);
  auto back = read_heatmap_raw(dir / "m.f32", 6, 9);
  CHECK(test::max_abs_diff(back.values, m.values) < 1e-5);
  test::expect_error(ErrorCode::kIo, [&] { read_heatmap_raw(dir / "m.f32", 7, 9); });
  write_heatmap_png(dir / "m.png", m);
  CHECK(std::filesystem::file_size(dir / "m.png") > 0);
  auto n = normalize_minmax(m);
  CHECK(n.min().item<double>() == 0.0);
  CHECK(n.max().item<double>() == 1.0);
  auto flat = normalize_minmax(HeatMap{torch::ones({3, 3}, torch::kFloat64)});
  CHECK(flat.abs().max().item<double>() == 0.0);
}
