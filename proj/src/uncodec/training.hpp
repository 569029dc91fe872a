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
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "uncodec/adversarial.hpp"
#include "uncodec/codec_model.hpp"
#include "uncodec/config.hpp"
#include "uncodec/frames.hpp"
#include "uncodec/losses.hpp"

namespace uncodec {

struct TrainConfig {
  int64_t warmup_steps = 2000;
  int64_t total_steps = 20000;
  double lr_initial = 1e-4;
  double lr_decayed = 1e-5;
  int64_t lr_decay_step = 16000;
  double lambda = 1024;
  int k = 1;
  ClipMode clip_mode = ClipMode::kRouteToKth;
  FgsmConfig fgsm;
  int batch = 8;
  int crop = 64;
  double weight_decay = 1e-4;
  double grad_clip = 1.0;
  int64_t checkpoint_every = 5000;
  int64_t log_every = 100;
  int64_t ema_window = 200;
  int eval_pairs = 64;
  uint64_t seed = 0;
  uint64_t data_seed = 0;

  static TrainConfig from_config(const Config& config);
  void validate(int h) const;
};

double learning_rate_at(const TrainConfig& cfg, int64_t step);

/// Data seed: `data.seed`, or a value derived from `seed` when it is -1.
uint64_t resolve_data_seed(const Config& config);

/// Training corpus: the sequences under `data.path` (a frame directory or a
/// directory of frame directories), else the synthetic corpus. Synthetic
/// corpora are cached as PNG directories under $UNCODEC_CACHE when set.
std::vector<VideoSequence> load_training_data(const Config& config);
/// Held-out synthetic clips drawn with a seed disjoint from the training
/// corpus; for `data.path` corpora, the last sequence when there are several.
std::vector<VideoSequence> load_held_out_data(const Config& config);

struct Batch {
  torch::Tensor reference, current;  // [B, C, crop, crop]
};

Batch sample_batch(const std::vector<VideoSequence>& data, int batch, int crop, std::mt19937_64& rng);

/// Consecutive full-frame pairs, cycling over clips then frame positions.
std::vector<Batch> held_out_pairs(const std::vector<VideoSequence>& data, int pairs, int batch = 8);

struct HeldOutReport {
  double rd_loss = 0;  // mean over pairs of bpp + lambda * MSE
  double bpp_mv = 0, bpp_res = 0, mse = 0, psnr_db = 0;
};

/// Inference-mode evaluation with rounded latents; rates are the learned
/// model's code lengths (-log2 likelihood) of the coded symbols.
HeldOutReport evaluate_held_out(CodecModelImpl& model, const std::vector<Batch>& pairs, double lambda);

struct StepStats {
  int64_t step = 0;
  bool phase2 = false;
  double loss = 0, bpp_mv = 0, bpp_res = 0, psnr_db = 0, lr = 0;
};

class Trainer {
 public:
  /// Builds the model (seeded by `seed`) and the data from `config`.
  explicit Trainer(const Config& config);
  Trainer(const Config& config, std::vector<VideoSequence> data);

  /// One optimizer step on a freshly sampled batch.
  StepStats step();
  /// One optimizer step on `batch`.
  StepStats step_on(const Batch& batch);

  /// Runs to train.total_steps, writing <out>/metrics.csv, <out>/config.cfg
  /// and <out>/ckpt/step_%08d checkpoints. `progress` sees every step.
  void run(const std::string& out_dir, const std::function<void(const StepStats&)>& progress = {});

  CodecModel& model() { return model_; }
  torch::optim::AdamW& optimizer() { return *optimizer_; }
  const Config& config() const { return config_; }
  const TrainConfig& train_config() const { return cfg_; }
  int64_t step_index() const { return step_; }
  double ema_loss() const { return ema_; }
  torch::Generator& generator() { return gen_; }
  const std::vector<VideoSequence>& data() const { return data_; }

  /// Instrumentation: model forward passes and FGSM branch executions.
  int64_t forward_passes() const { return forward_passes_; }
  int64_t fgsm_calls() const { return fgsm_calls_; }

 private:
  struct LossTerms {
    torch::Tensor loss;
    torch::Tensor bits_mv, bits_res;
    torch::Tensor output;  // final reconstruction, or the mean refined prediction in phase 1
  };
  LossTerms compute_loss(const torch::Tensor& input, const torch::Tensor& reference, const torch::Tensor& target,
                         bool phase2);

  Config config_;
  TrainConfig cfg_;
  CodecModel model_{nullptr};
  std::unique_ptr<torch::optim::AdamW> optimizer_;
  std::vector<VideoSequence> data_;
  std::mt19937_64 rng_;
  torch::Generator gen_;
  int64_t step_ = 0;
  double ema_ = 0;
  int64_t forward_passes_ = 0, fgsm_calls_ = 0;
};

/// Trains with `config` and returns the trained model; thin wrapper for the
/// command-line tool.
CodecModel train(const Config& config, const std::string& out_dir,
                 const std::function<void(const StepStats&)>& progress = {});

struct AblationCell {
  int h = 1, k = 1;
  bool fgsm = false;
  double lambda = 0;
  HeldOutReport report;
};

struct AblationResult {
  std::vector<AblationCell> cells;
  /// CSV `h,k,fgsm,lambda,rd_loss,bpp,psnr_db`.
  std::string cells_csv() const;
  /// CSV `h,k,fgsm,delta_rd_loss,bd_rate_percent` against the h=1, k=1 cell
  /// with the same FGSM setting; BD-rate needs >= 4 lambdas (else empty).
  std::string summary_csv() const;
};

/// One model per (h, k, fgsm, lambda) cell, trained with `base` otherwise.
AblationResult ablate(const Config& base, const std::vector<int>& hs, const std::vector<int>& ks,
                      const std::vector<bool>& fgsm_modes, const std::vector<double>& lambdas,
                      const std::string& out_dir, const std::function<void(const std::string&)>& log = {});

}  // namespace uncodec
