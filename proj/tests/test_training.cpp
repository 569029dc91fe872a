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
#include <fstream>

#include "test_util.hpp"
#include "uncodec/training.hpp"

using namespace uncodec;
using test::expect_error;

namespace {

Config tiny(int warmup = 2, int total = 4) {
  Config c;
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"codec.h", "2"},
           {"codec.latent_channels_mv", "8"},
           {"codec.latent_channels_res", "8"},
           {"codec.hidden_channels", "8"},
           {"codec.backbone_channels", "8"},
           {"codec.branch_channels", "4"},
           {"codec.motion_channels", "4"},
           {"codec.motion_levels", "2"},
           {"codec.refine_channels", "4"},
           {"synth.sequences", "3"},
           {"synth.frames", "3"},
           {"synth.height", "32"},
           {"synth.width", "32"},
           {"data.crop", "16"},
           {"train.batch", "2"},
           {"train.log_every", "1"},
           {"train.checkpoint_every", "2"},
           {"eval.pairs", "2"},
           {"fgsm.enabled", "false"},
       })
    c.set(k, v);
  c.set("train.warmup_steps", std::to_string(warmup));
  c.set("train.total_steps", std::to_string(total));
  return c;
}

std::vector<torch::Tensor> snapshot(const std::vector<torch::Tensor>& params) {
  std::vector<torch::Tensor> out;
  for (const auto& p : params) out.push_back(p.detach().clone());
  return out;
}

bool all_equal(const std::vector<torch::Tensor>& a, const std::vector<torch::Tensor>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!torch::equal(a[i], b[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("learning-rate schedule") {
  TrainConfig c;
  c.lr_initial = 1e-3;
  c.lr_decayed = 3e-5;
  c.lr_decay_step = 10;
  CHECK(learning_rate_at(c, 0) == 1e-3);
  CHECK(learning_rate_at(c, 9) == 1e-3);
  CHECK(learning_rate_at(c, 10) == 3e-5);
  CHECK(learning_rate_at(c, 1000) == 3e-5);

  auto cfg = tiny(0, 3);
  cfg.set("train.lr_decay_step", "1");
  cfg.set("train.lr_decayed", "3e-5");
  Trainer t(cfg);
  CHECK(t.step().lr == cfg.get_real("train.lr_initial"));
  CHECK(t.step().lr == 3e-5);
  for (const auto& g : t.optimizer().param_groups())
    CHECK(static_cast<const torch::optim::AdamWOptions&>(g.options()).lr() == 3e-5);
}

TEST_CASE("train config validation") {
  auto c = tiny(5, 4);
  expect_error(ErrorCode::kConfig, [&] { TrainConfig::from_config(c).validate(2); });
  c = tiny();
  c.set("loss.k", "3");
  expect_error(ErrorCode::kConfig, [&] { TrainConfig::from_config(c).validate(2); });
  c = tiny();
  c.set("train.lr_initial", "0");
  expect_error(ErrorCode::kConfig, [&] { TrainConfig::from_config(c).validate(2); });
  c = tiny();
  c.set("data.crop", "20");
  expect_error(ErrorCode::kConfig, [&] { TrainConfig::from_config(c).validate(2); });
  c = tiny();
  c.set("data.crop", "48");
  expect_error(ErrorCode::kConfig, [&] { Trainer t(c); });
}

TEST_CASE("same seed gives identical loss curves") {
  auto run = [](uint64_t seed) {
    auto c = tiny(2, 4);
    c.set("seed", std::to_string(seed));
    c.set("fgsm.enabled", "true");
    Trainer t(c);
    std::vector<double> losses;
    for (int i = 0; i < 4; ++i) losses.push_back(t.step().loss);
    return losses;
  };
  const auto a = run(0), b = run(0), c = run(1);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("phase 1 leaves the residual path untouched") {
  Trainer t(tiny(3, 6));
  auto& model = *t.model();
  const auto res0 = snapshot(model.residual_parameters());
  const auto inter0 = snapshot(model.inter_parameters());
  for (int i = 0; i < 3; ++i) CHECK_FALSE(t.step().phase2);
  CHECK(all_equal(res0, snapshot(model.residual_parameters())));
  CHECK_FALSE(all_equal(inter0, snapshot(model.inter_parameters())));
  auto s = t.step();
  CHECK(s.phase2);
  CHECK(s.bpp_res > 0);
  CHECK_FALSE(all_equal(res0, snapshot(model.residual_parameters())));
}

TEST_CASE("fgsm instrumentation and the zero-epsilon step") {
  auto plain_cfg = tiny(1, 3);
  Trainer plain(plain_cfg);
  for (int i = 0; i < 3; ++i) plain.step();
  CHECK(plain.fgsm_calls() == 0);
  CHECK(plain.forward_passes() == 3);

  auto adv_cfg = plain_cfg;
  adv_cfg.set("fgsm.enabled", "true");
  adv_cfg.set("fgsm.epsilon", "0");
  Trainer zero(adv_cfg);
  for (int i = 0; i < 3; ++i) zero.step();
  CHECK(zero.fgsm_calls() == 3);
  CHECK(zero.forward_passes() == 6);
  CHECK(all_equal(snapshot(plain.model()->parameters()), snapshot(zero.model()->parameters())));

  adv_cfg.set("fgsm.epsilon", "0.05");
  Trainer adv(adv_cfg);
  for (int i = 0; i < 3; ++i) adv.step();
  CHECK_FALSE(all_equal(snapshot(plain.model()->parameters()), snapshot(adv.model()->parameters())));
}

TEST_CASE("non-finite input aborts with a divergence error") {
  Trainer t(tiny());
  Batch b{torch::rand({2, 3, 16, 16}), torch::full({2, 3, 16, 16}, NAN)};
  expect_error(ErrorCode::kDivergence, [&] { t.step_on(b); });
}

TEST_CASE("run writes metrics, config echo and checkpoints") {
  test::TempDir dir("train");
  auto c = tiny(1, 3);
  Trainer t(c);
  int seen = 0;
  t.run(dir.str(), [&](const StepStats&) { ++seen; });
  CHECK(seen == 3);
  std::ifstream metrics(dir / "metrics.csv");
  std::string header;
  std::getline(metrics, header);
  CHECK(header == "step,loss,ema_loss,bpp_mv,bpp_res,psnr");
  int rows = 0;
  for (std::string line; std::getline(metrics, line);) ++rows;
  CHECK(rows == 3);
  CHECK(Config::from_file(dir / "config.cfg") == c);
  CHECK(std::filesystem::exists(dir / "ckpt/step_00000002/model.bin"));
  CHECK(std::filesystem::exists(dir / "ckpt/step_00000003/model.bin"));
  CHECK(std::filesystem::exists(dir / "ckpt/step_00000003/config.cfg"));
}

TEST_CASE("held-out evaluation") {
  auto c = tiny();
  const auto held = load_held_out_data(c);
  const auto train = load_training_data(c);
  CHECK_FALSE(torch::equal(held[0].frames[0].data, train[0].frames[0].data));
  auto pairs = held_out_pairs(held, 3, 2);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].current.size(0) == 2);
  CHECK(pairs[1].current.size(0) == 1);
  Trainer t(c);
  auto r = evaluate_held_out(*t.model(), pairs, 1024);
  CHECK(r.rd_loss == doctest::Approx(r.bpp_mv + r.bpp_res + 1024 * r.mse));
  CHECK(r.psnr_db > 0);
}

TEST_CASE("ablation anchors on h = 1") {
  test::TempDir dir("ablate");
  auto res = ablate(tiny(1, 2), {1, 2}, {1}, {false}, {1024}, dir.str());
  REQUIRE(res.cells.size() == 2);
  CHECK(res.cells[0].h == 1);
  const auto summary = res.summary_csv();
  CHECK(summary.find("1,1,0,0,") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "ablation_cells.csv"));
  CHECK(std::filesystem::exists(dir / "ablation_summary.csv"));
}
