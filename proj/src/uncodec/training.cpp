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

#include "uncodec/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "uncodec/checkpoint.hpp"
#include "uncodec/error.hpp"
#include "uncodec/evaluation.hpp"
#include "uncodec/synthetic.hpp"

namespace uncodec {
namespace fs = std::filesystem;
namespace {

constexpr uint64_t kHeldOutSalt = 0x9E3779B97F4A7C15ull;

SyntheticParams synth_params(const Config& c) {
  SyntheticParams p;
  p.height = static_cast<int>(c.get_int("synth.height"));
  p.width = static_cast<int>(c.get_int("synth.width"));
  p.frames = static_cast<int>(c.get_int("synth.frames"));
  p.shapes = static_cast<int>(c.get_int("synth.shapes"));
  p.max_speed = c.get_real("synth.max_speed");
  return p;
}

std::vector<VideoSequence> synthetic_corpus(const Config& c, int count, uint64_t seed) {
  const auto p = synth_params(c);
  const char* cache = std::getenv("UNCODEC_CACHE");
  if (cache == nullptr || *cache == '\0') return generate_corpus(p, count, seed);
  std::ostringstream key;
  key << "synth_" << p.height << "x" << p.width << "_f" << p.frames << "_s" << p.shapes << "_v" << p.max_speed << "_n"
      << count << "_seed" << seed;
  const auto dir = fs::path(cache) / key.str();
  std::vector<VideoSequence> out;
  if (fs::is_directory(dir)) {
    for (int i = 0; i < count; ++i) out.push_back(load_frames((dir / ("clip_" + std::to_string(i))).string(), 0));
    return out;
  }
  out = generate_corpus(p, count, seed);
  const auto tmp = fs::path(cache) / (key.str() + ".tmp");
  fs::remove_all(tmp);
  for (std::size_t i = 0; i < out.size(); ++i) save_sequence((tmp / ("clip_" + std::to_string(i))).string(), out[i]);
  std::error_code ec;
  fs::rename(tmp, dir, ec);  // another process may have won the race; either copy is identical
  if (ec) fs::remove_all(tmp);
  return out;
}

std::vector<VideoSequence> path_corpus(const std::string& path, int max_frames) {
  require(fs::is_directory(path), ErrorCode::kConfig, "data.path '" + path + "' is not a directory");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(path))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<VideoSequence> out;
  if (dirs.empty()) {
    out.push_back(load_sequence(path, max_frames));
  } else {
    for (const auto& d : dirs) out.push_back(load_sequence(d.string(), max_frames));
  }
  return out;
}

double ema_alpha(int64_t window) { return 2.0 / (static_cast<double>(window) + 1.0); }

bool finite(const torch::Tensor& t) { return std::isfinite(t.item<double>()); }

}  // namespace

TrainConfig TrainConfig::from_config(const Config& c) {
  TrainConfig t;
  t.warmup_steps = c.get_int("train.warmup_steps");
  t.total_steps = c.get_int("train.total_steps");
  t.lr_initial = c.get_real("train.lr_initial");
  t.lr_decayed = c.get_real("train.lr_decayed");
  t.lr_decay_step = c.get_int("train.lr_decay_step");
  t.lambda = c.get_real("loss.lambda");
  t.k = static_cast<int>(c.get_int("loss.k"));
  t.clip_mode = parse_clip_mode(c.get_string("loss.clip_mode"));
  t.fgsm.enabled = c.get_bool("fgsm.enabled");
  t.fgsm.epsilon = c.get_real("fgsm.epsilon");
  t.fgsm.scope = parse_fgsm_scope(c.get_string("fgsm.scope"));
  t.batch = static_cast<int>(c.get_int("train.batch"));
  t.crop = static_cast<int>(c.get_int("data.crop"));
  t.weight_decay = c.get_real("train.weight_decay");
  t.grad_clip = c.get_real("train.grad_clip");
  t.checkpoint_every = c.get_int("train.checkpoint_every");
  t.log_every = c.get_int("train.log_every");
  t.ema_window = c.get_int("train.ema_window");
  t.eval_pairs = static_cast<int>(c.get_int("eval.pairs"));
  t.seed = static_cast<uint64_t>(c.get_int("seed"));
  t.data_seed = resolve_data_seed(c);
  t.validate(static_cast<int>(c.get_int("codec.h")));
  return t;
}

void TrainConfig::validate(int h) const {
  require(total_steps >= 0 && warmup_steps >= 0 && warmup_steps <= total_steps, ErrorCode::kConfig,
          "train.warmup_steps must lie in [0, train.total_steps]");
  require(lr_initial > 0 && lr_decayed > 0, ErrorCode::kConfig, "learning rates must be positive");
  require(lr_decay_step >= 0, ErrorCode::kConfig, "train.lr_decay_step must be >= 0");
  require(lambda > 0, ErrorCode::kConfig, "loss.lambda must be positive");
  require(k >= 1 && k <= h, ErrorCode::kConfig, "loss.k must lie in [1, codec.h]");
  fgsm.validate();
  require(batch >= 1, ErrorCode::kConfig, "train.batch must be >= 1");
  require(crop >= 16 && crop % kPadMultiple == 0, ErrorCode::kConfig, "data.crop must be a positive multiple of 16");
  require(weight_decay >= 0 && grad_clip >= 0, ErrorCode::kConfig, "weight decay and grad clip must be >= 0");
  require(checkpoint_every >= 0 && log_every >= 1 && ema_window >= 1, ErrorCode::kConfig,
          "checkpoint/log/EMA periods out of range");
  require(eval_pairs >= 1, ErrorCode::kConfig, "eval.pairs must be >= 1");
}

double learning_rate_at(const TrainConfig& cfg, int64_t step) {
  return step < cfg.lr_decay_step ? cfg.lr_initial : cfg.lr_decayed;
}

uint64_t resolve_data_seed(const Config& config) {
  const int64_t s = config.get_int("data.seed");
  if (s >= 0) return static_cast<uint64_t>(s);
  std::seed_seq seq{static_cast<uint32_t>(config.get_int("seed")), 0x64617461u};
  uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<uint64_t>(out[0]) << 32) | out[1];
}

std::vector<VideoSequence> load_training_data(const Config& config) {
  const auto& path = config.get_string("data.path");
  if (!path.empty()) return path_corpus(path, static_cast<int>(config.get_int("data.max_frames")));
  return synthetic_corpus(config, static_cast<int>(config.get_int("synth.sequences")), resolve_data_seed(config));
}

std::vector<VideoSequence> load_held_out_data(const Config& config) {
  const auto& path = config.get_string("data.path");
  if (!path.empty()) {
    auto all = path_corpus(path, static_cast<int>(config.get_int("data.max_frames")));
    return {all.back()};
  }
  const int n = std::max<int>(1, static_cast<int>(config.get_int("synth.sequences")) / 4);
  return synthetic_corpus(config, n, resolve_data_seed(config) ^ kHeldOutSalt);
}

Batch sample_batch(const std::vector<VideoSequence>& data, int batch, int crop, std::mt19937_64& rng) {
  require(!data.empty(), ErrorCode::kInvalidArgument, "empty training corpus");
  std::vector<torch::Tensor> refs, curs;
  for (int b = 0; b < batch; ++b) {
    const auto& seq = data[std::uniform_int_distribution<std::size_t>(0, data.size() - 1)(rng)];
    auto pair = random_crop_pair(seq, crop, rng);
    refs.push_back(pair.reference.data);
    curs.push_back(pair.current.data);
  }
  return {torch::stack(refs), torch::stack(curs)};
}

std::vector<Batch> held_out_pairs(const std::vector<VideoSequence>& data, int pairs, int batch) {
  require(!data.empty(), ErrorCode::kInvalidArgument, "empty held-out corpus");
  std::vector<Batch> out;
  std::vector<torch::Tensor> refs, curs;
  const auto n = data.size();
  for (int i = 0; i < pairs; ++i) {
    const auto& seq = data[i % n];
    require(seq.size() >= 2, ErrorCode::kInvalidArgument, "held-out sequence '" + seq.name + "' has one frame");
    const std::size_t t = (static_cast<std::size_t>(i) / n) % (seq.size() - 1);
    refs.push_back(seq.frames[t].data);
    curs.push_back(seq.frames[t + 1].data);
    const bool shape_change = refs.size() > 1 && refs.back().sizes() != refs.front().sizes();
    if (static_cast<int>(refs.size()) == batch || shape_change || i + 1 == pairs) {
      if (shape_change) {
        auto r = refs.back(), c = curs.back();
        refs.pop_back();
        curs.pop_back();
        out.push_back({torch::stack(refs), torch::stack(curs)});
        refs = {r};
        curs = {c};
        if (i + 1 < pairs) continue;
      }
      out.push_back({torch::stack(refs), torch::stack(curs)});
      refs.clear();
      curs.clear();
    }
  }
  return out;
}

HeldOutReport evaluate_held_out(CodecModelImpl& model, const std::vector<Batch>& pairs, double lambda) {
  torch::NoGradGuard guard;
  const bool was_training = model.is_training();
  model.eval();
  HeldOutReport r;
  int64_t count = 0;
  for (const auto& b : pairs) {
    const auto res = model.forward(b.current, b.reference, CodingMode::kInfer);
    const int64_t n = b.current.size(0);
    const double pixels = static_cast<double>(b.current.size(2) * b.current.size(3));
    const auto mse = (res.reconstruction.to(torch::kFloat64) - b.current.to(torch::kFloat64)).pow(2).mean({1, 2, 3});
    // Per-pair rates come from the per-sample likelihoods.
    const auto bits_mv = -model.mv_prior->likelihood(res.mv_code).to(torch::kFloat64).log2().sum({1, 2, 3});
    const auto bits_res = -model.res_prior->likelihood(res.res_code).to(torch::kFloat64).log2().sum({1, 2, 3});
    for (int64_t i = 0; i < n; ++i) {
      const double m = mse[i].item<double>();
      const double bm = bits_mv[i].item<double>() / pixels, br = bits_res[i].item<double>() / pixels;
      r.bpp_mv += bm;
      r.bpp_res += br;
      r.mse += m;
      r.psnr_db += m < 1e-10 ? kPsnrCapDb : 10.0 * std::log10(1.0 / m);
      r.rd_loss += bm + br + lambda * m;
      ++count;
    }
  }
  require(count > 0, ErrorCode::kInvalidArgument, "no held-out pairs");
  for (double* v : {&r.rd_loss, &r.bpp_mv, &r.bpp_res, &r.mse, &r.psnr_db}) *v /= static_cast<double>(count);
  if (was_training) model.train();
  return r;
}

Trainer::Trainer(const Config& config) : Trainer(config, load_training_data(config)) {}

Trainer::Trainer(const Config& config, std::vector<VideoSequence> data)
    : config_(config), cfg_(TrainConfig::from_config(config)), data_(std::move(data)), rng_(cfg_.data_seed),
      gen_(at::detail::createCPUGenerator(cfg_.seed ^ 0x5155414E54ull)) {
  torch::manual_seed(cfg_.seed);
  model_ = CodecModel(CodecConfig::from_config(config));
  model_->train();
  torch::optim::AdamWOptions opts(cfg_.lr_initial);
  opts.weight_decay(cfg_.weight_decay);
  optimizer_ = std::make_unique<torch::optim::AdamW>(model_->parameters(), opts);
  require(!data_.empty(), ErrorCode::kConfig, "training corpus is empty");
  for (const auto& s : data_) {
    require(s.size() >= 2, ErrorCode::kConfig, "training sequence '" + s.name + "' has fewer than 2 frames");
    require(s.frames.front().height() >= cfg_.crop && s.frames.front().width() >= cfg_.crop, ErrorCode::kConfig,
            "training sequence '" + s.name + "' is smaller than data.crop");
  }
}

Trainer::LossTerms Trainer::compute_loss(const torch::Tensor& input, const torch::Tensor& reference,
                                         const torch::Tensor& target, bool phase2) {
  ++forward_passes_;
  const auto r = model_->forward(input, reference, CodingMode::kTrain, &gen_,
                                 phase2 ? CodingStage::kFull : CodingStage::kInterOnly);
  const double pixels = static_cast<double>(input.size(0) * input.size(2) * input.size(3));
  LossTerms t;
  t.bits_mv = r.bits_mv;
  if (!phase2) {
    t.bits_res = torch::zeros({}, input.options());
    t.loss = r.bits_mv / pixels + cfg_.lambda * ensemble_aware_loss(target, r.refined_mc, cfg_.k, cfg_.clip_mode);
    t.output = mixture_mean(r.refined_mc);
    return t;
  }
  t.bits_res = r.bits_res;
  const auto distortion = ensemble_aware_loss(target, r.reconstructions, cfg_.k, cfg_.clip_mode) +
                          (r.reconstruction - target).pow(2).mean();
  t.loss = (r.bits_mv + r.bits_res) / pixels + cfg_.lambda * distortion;
  t.output = r.reconstruction;
  return t;
}

StepStats Trainer::step() { return step_on(sample_batch(data_, cfg_.batch, cfg_.crop, rng_)); }

StepStats Trainer::step_on(const Batch& batch) {
  const bool phase2 = step_ >= cfg_.warmup_steps;
  const double lr = learning_rate_at(cfg_, step_);
  for (auto& group : optimizer_->param_groups()) static_cast<torch::optim::AdamWOptions&>(group.options()).lr(lr);

  torch::Tensor input = batch.current, target = batch.current;
  if (cfg_.fgsm.enabled) {
    ++fgsm_calls_;
    // The probe pass must not shift the quantization noise of the real step.
    const auto noise_state = gen_.get_state();
    auto x = batch.current.detach().clone().requires_grad_(true);
    ++forward_passes_;
    const auto probe = model_->forward(x, batch.reference, CodingMode::kTrain, &gen_,
                                       phase2 ? CodingStage::kFull : CodingStage::kInterOnly);
    const auto& members = phase2 ? probe.reconstructions.members : probe.refined_mc.members;
    torch::Tensor mse = torch::zeros({}, x.options());
    for (const auto& m : members) mse = mse + (m - x).pow(2).mean();
    const auto grad = torch::autograd::grad({mse}, {x})[0];
    require(torch::isfinite(grad).all().item<bool>(), ErrorCode::kDivergence,
            "non-finite FGSM input gradient at step " + std::to_string(step_));
    gen_.set_state(noise_state);
    input = fgsm_perturb(batch.current, grad, cfg_.fgsm.epsilon);
    if (cfg_.fgsm.scope == FgsmScope::kBoth) target = input;
  }

  optimizer_->zero_grad();
  auto terms = compute_loss(input, batch.reference, target, phase2);
  if (!finite(terms.loss))
    fail(ErrorCode::kDivergence, "non-finite training loss at step " + std::to_string(step_) +
                                     " (bits_mv=" + std::to_string(terms.bits_mv.item<double>()) +
                                     ", bits_res=" + std::to_string(terms.bits_res.item<double>()) + ")");
  terms.loss.backward();
  if (cfg_.grad_clip > 0) torch::nn::utils::clip_grad_norm_(model_->parameters(), cfg_.grad_clip);
  optimizer_->step();
  model_->invalidate_tables();

  StepStats s;
  s.step = step_;
  s.phase2 = phase2;
  s.lr = lr;
  s.loss = terms.loss.item<double>();
  const double pixels = static_cast<double>(input.size(0) * input.size(2) * input.size(3));
  s.bpp_mv = terms.bits_mv.item<double>() / pixels;
  s.bpp_res = terms.bits_res.item<double>() / pixels;
  s.psnr_db = psnr(terms.output.detach().clamp(0, 1), target);
  ema_ = step_ == 0 ? s.loss : ema_ + ema_alpha(cfg_.ema_window) * (s.loss - ema_);
  ++step_;
  return s;
}

void Trainer::run(const std::string& out_dir, const std::function<void(const StepStats&)>& progress) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  require(!ec, ErrorCode::kIo, "cannot create '" + out_dir + "'");
  {
    std::ofstream cfg(fs::path(out_dir) / "config.cfg");
    cfg << config_.dump();
  }
  std::ofstream metrics(fs::path(out_dir) / "metrics.csv");
  require(static_cast<bool>(metrics), ErrorCode::kIo, "cannot write metrics in '" + out_dir + "'");
  metrics << "step,loss,ema_loss,bpp_mv,bpp_res,psnr\n" << std::setprecision(9);
  const auto ckpt_root = (fs::path(out_dir) / "ckpt").string();
  while (step_ < cfg_.total_steps) {
    const auto s = step();
    if (progress) progress(s);
    const int64_t done = step_;
    if (done % cfg_.log_every == 0 || done == cfg_.total_steps) {
      metrics << done << ',' << s.loss << ',' << ema_ << ',' << s.bpp_mv << ',' << s.bpp_res << ',' << s.psnr_db << '\n';
      metrics.flush();
    }
    if (cfg_.checkpoint_every > 0 && done % cfg_.checkpoint_every == 0 && done != cfg_.total_steps)
      save_checkpoint(checkpoint_dir(ckpt_root, done), *model_, config_, done);
  }
  save_checkpoint(checkpoint_dir(ckpt_root, step_), *model_, config_, step_);
}

CodecModel train(const Config& config, const std::string& out_dir,
                 const std::function<void(const StepStats&)>& progress) {
  Trainer trainer(config);
  trainer.run(out_dir, progress);
  return trainer.model();
}

std::string AblationResult::cells_csv() const {
  std::ostringstream os;
  os << "h,k,fgsm,lambda,rd_loss,bpp,psnr_db\n" << std::setprecision(9);
  for (const auto& c : cells)
    os << c.h << ',' << c.k << ',' << (c.fgsm ? 1 : 0) << ',' << c.lambda << ',' << c.report.rd_loss << ','
       << c.report.bpp_mv + c.report.bpp_res << ',' << c.report.psnr_db << '\n';
  return os.str();
}

std::string AblationResult::summary_csv() const {
  struct Key {
    int h, k;
    bool fgsm;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::vector<const AblationCell*>> groups;
  for (const auto& c : cells) groups[{c.h, c.k, c.fgsm}].push_back(&c);
  auto curve = [](const std::vector<const AblationCell*>& g) {
    RDCurve rc;
    for (const auto* c : g) rc.points.push_back({c->report.bpp_mv + c->report.bpp_res, c->report.psnr_db, c->lambda});
    rc.sort_by_bpp();
    return rc;
  };
  auto mean_rd = [](const std::vector<const AblationCell*>& g) {
    double s = 0;
    for (const auto* c : g) s += c->report.rd_loss;
    return s / static_cast<double>(g.size());
  };
  std::ostringstream os;
  os << "h,k,fgsm,delta_rd_loss,bd_rate_percent\n" << std::setprecision(9);
  for (const auto& [key, group] : groups) {
    const auto anchor = groups.find({1, 1, key.fgsm});
    os << key.h << ',' << key.k << ',' << (key.fgsm ? 1 : 0) << ',';
    if (anchor == groups.end()) {
      os << ",\n";
      continue;
    }
    os << mean_rd(group) - mean_rd(anchor->second) << ',';
    try {
      os << bd_rate(curve(group), curve(anchor->second));
    } catch (const Error&) {
      // Fewer than 4 rate points or no PSNR overlap: no BD-rate.
    }
    os << '\n';
  }
  return os.str();
}

AblationResult ablate(const Config& base, const std::vector<int>& hs, const std::vector<int>& ks,
                      const std::vector<bool>& fgsm_modes, const std::vector<double>& lambdas,
                      const std::string& out_dir, const std::function<void(const std::string&)>& log) {
  require(!hs.empty() && !ks.empty() && !fgsm_modes.empty() && !lambdas.empty(), ErrorCode::kConfig,
          "ablation grid is empty");
  std::vector<std::pair<int, int>> grid{{1, 1}};
  for (int h : hs)
    for (int k : ks)
      if (k <= h && !(h == 1 && k == 1)) grid.emplace_back(h, k);
  const auto train_data = load_training_data(base);
  const auto held_out = held_out_pairs(load_held_out_data(base), static_cast<int>(base.get_int("eval.pairs")));
  AblationResult result;
  for (bool fgsm : fgsm_modes) {
    for (const auto& [h, k] : grid) {
      for (double lambda : lambdas) {
        Config c = base;
        c.set("codec.h", std::to_string(h));
        c.set("loss.k", std::to_string(k));
        c.set("fgsm.enabled", fgsm ? "true" : "false");
        std::ostringstream lam;
        lam << std::setprecision(17) << lambda;
        c.set("loss.lambda", lam.str());
        std::ostringstream name;
        name << "h" << h << "_k" << k << "_fgsm" << (fgsm ? 1 : 0) << "_lambda" << lambda;
        if (log) log("training " + name.str());
        Trainer trainer(c, train_data);
        trainer.run((fs::path(out_dir) / name.str()).string());
        AblationCell cell{h, k, fgsm, lambda, evaluate_held_out(*trainer.model(), held_out, lambda)};
        if (log) {
          std::ostringstream os;
          os << name.str() << ": rd_loss=" << cell.report.rd_loss << " psnr=" << cell.report.psnr_db
             << " bpp=" << cell.report.bpp_mv + cell.report.bpp_res;
          log(os.str());
        }
        result.cells.push_back(cell);
      }
    }
  }
  std::ofstream(fs::path(out_dir) / "ablation_cells.csv") << result.cells_csv();
  std::ofstream(fs::path(out_dir) / "ablation_summary.csv") << result.summary_csv();
  return result;
}

}  // namespace uncodec
