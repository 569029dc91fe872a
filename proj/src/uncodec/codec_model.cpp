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

#include "uncodec/codec_model.hpp"

#include <sstream>

#include "uncodec/error.hpp"
#include "uncodec/layers.hpp"
#include "uncodec/quantization.hpp"

namespace uncodec {
namespace {

torch::nn::Sequential analysis(int64_t in, int64_t hidden, int64_t latent) {
  return torch::nn::Sequential(nn::conv(in, hidden, 5, 2), nn::leaky(), nn::conv(hidden, hidden, 5, 2), nn::leaky(),
                               nn::conv(hidden, hidden, 5, 2), nn::leaky(), nn::conv(hidden, latent, 5, 2));
}

int64_t numel_of(const torch::nn::Module& m) { return count_parameters(m.parameters()); }

}  // namespace

CodecConfig CodecConfig::from_config(const Config& config) {
  CodecConfig c;
  c.h = static_cast<int>(config.get_int("codec.h"));
  c.latent_channels_mv = static_cast<int>(config.get_int("codec.latent_channels_mv"));
  c.latent_channels_res = static_cast<int>(config.get_int("codec.latent_channels_res"));
  c.hidden_channels = static_cast<int>(config.get_int("codec.hidden_channels"));
  c.backbone_channels = static_cast<int>(config.get_int("codec.backbone_channels"));
  c.branch_channels = static_cast<int>(config.get_int("codec.branch_channels"));
  c.motion_channels = static_cast<int>(config.get_int("codec.motion_channels"));
  c.motion_levels = static_cast<int>(config.get_int("codec.motion_levels"));
  c.refine_channels = static_cast<int>(config.get_int("codec.refine_channels"));
  c.tail_mass = config.get_real("codec.tail_mass");
  c.max_support = config.get_int("codec.max_support");
  c.validate();
  return c;
}

void CodecConfig::validate() const {
  require(channels == 1 || channels == 3, ErrorCode::kConfig, "frames must have 1 or 3 channels");
  require(h >= 1 && h <= 64, ErrorCode::kConfig, "codec.h must be in [1, 64]");
  require(latent_channels_mv >= 1 && latent_channels_res >= 1 && hidden_channels >= 1 && backbone_channels >= 1 &&
              branch_channels >= 1 && motion_channels >= 1 && refine_channels >= 1,
          ErrorCode::kConfig, "codec widths must be positive");
  require(motion_levels >= 1 && (1 << (motion_levels - 1)) <= kPadMultiple, ErrorCode::kConfig,
          "codec.motion_levels must be in [1, 5]");
  require(tail_mass > 0 && tail_mass * static_cast<double>(max_support) < 0.5, ErrorCode::kConfig,
          "codec.tail_mass too large for codec.max_support");
  require(max_support >= 2 && max_support <= 32768, ErrorCode::kConfig, "codec.max_support must be in [2, 32768]");
}

std::string CodecConfig::echo() const {
  std::ostringstream os;
  os.precision(17);
  os << "channels=" << channels << "\nh=" << h << "\nlatent_channels_mv=" << latent_channels_mv
     << "\nlatent_channels_res=" << latent_channels_res << "\nhidden_channels=" << hidden_channels
     << "\nbackbone_channels=" << backbone_channels << "\nbranch_channels=" << branch_channels
     << "\nmotion_channels=" << motion_channels << "\nmotion_levels=" << motion_levels
     << "\nrefine_channels=" << refine_channels << "\ntail_mass=" << tail_mass << "\nmax_support=" << max_support
     << "\n";
  return os.str();
}

std::string ModelSizeReport::to_string() const {
  std::ostringstream os;
  os << "h=" << h << " total=" << total << "\n"
     << "  motion=" << motion << " mv_encoder=" << mv_encoder << " mv_decoder=" << mv_decoder << "\n"
     << "  res_encoder=" << res_encoder << " res_decoder=" << res_decoder << "\n"
     << "  prediction_refine=" << prediction_refine << " reconstruction_refine=" << reconstruction_refine
     << " entropy_models=" << entropy_models << "\n"
     << "  per-member branch: mv=" << mv_branch << " res=" << res_branch << "\n";
  return os.str();
}

CodecModelImpl::CodecModelImpl(const CodecConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int c = cfg.channels, h = cfg.h;
  motion = register_module("motion", MotionNet(c, cfg.motion_channels, cfg.motion_levels));
  mv_encoder = register_module("mv_encoder", analysis(2, cfg.hidden_channels, cfg.latent_channels_mv));
  EnsembleDecoderConfig dec{h, cfg.latent_channels_mv, cfg.hidden_channels, cfg.backbone_channels, cfg.branch_channels, 2};
  mv_decoder = register_module("mv_decoder", EnsembleDecoder(dec));
  mv_prior = register_module("mv_prior", FactorizedPrior(cfg.latent_channels_mv, cfg.tail_mass, cfg.max_support));
  prediction_refine =
      register_module("prediction_refine", nn::conv_stack((h + 1) * c, cfg.refine_channels, h * c, 5));
  res_encoder = register_module("res_encoder", analysis(c, cfg.hidden_channels, cfg.latent_channels_res));
  dec.latent_channels = cfg.latent_channels_res;
  dec.out_channels = c;
  res_decoder = register_module("res_decoder", EnsembleDecoder(dec));
  res_prior = register_module("res_prior", FactorizedPrior(cfg.latent_channels_res, cfg.tail_mass, cfg.max_support));
  reconstruction_refine =
      register_module("reconstruction_refine", nn::conv_stack(2 * h * c, cfg.refine_channels, c, 5));
  // Start both refine nets close to the identity path.
  nn::scale_last_conv(prediction_refine, 0.1);
  nn::scale_last_conv(reconstruction_refine, 0.1);
}

torch::Tensor CodecModelImpl::estimate_motion(const torch::Tensor& x_t, const torch::Tensor& x_ref) {
  return motion->forward(x_t, x_ref);
}

torch::Tensor CodecModelImpl::encode_mv(const torch::Tensor& flow) { return mv_encoder->forward(flow); }

torch::Tensor CodecModelImpl::encode_residual(const torch::Tensor& residual) {
  return res_encoder->forward(residual);
}

EnsemblePrediction CodecModelImpl::predict(const EnsemblePrediction& mv, const torch::Tensor& x_ref) {
  const int h = mv.size();
  const int64_t n = x_ref.size(0);
  // All h warps in one batched call: [h*N, C, H, W].
  auto refs = x_ref.repeat({h, 1, 1, 1});
  auto warps = bilinear_warp(refs, torch::cat(mv.members, 0));
  auto warp_list = warps.split(n, 0);
  std::vector<torch::Tensor> inputs(warp_list.begin(), warp_list.end());
  inputs.push_back(x_ref);
  auto correction = prediction_refine->forward(torch::cat(inputs, 1)).split(cfg_.channels, 1);
  EnsemblePrediction refined;
  refined.kind = EnsembleKind::kPrediction;
  for (int m = 0; m < h; ++m) refined.members.push_back(warp_list[m] + correction[m]);
  return refined;
}

torch::Tensor CodecModelImpl::reconstruct(const EnsemblePrediction& refined, const EnsemblePrediction& residuals,
                                          EnsemblePrediction* members) {
  EnsemblePrediction recon;
  recon.kind = EnsembleKind::kReconstruction;
  for (int m = 0; m < refined.size(); ++m) recon.members.push_back(refined.members[m] + residuals.members[m]);
  std::vector<torch::Tensor> inputs = recon.members;
  inputs.insert(inputs.end(), refined.members.begin(), refined.members.end());
  auto final_frame = mixture_mean(recon) + reconstruction_refine->forward(torch::cat(inputs, 1));
  if (members != nullptr) *members = std::move(recon);
  return final_frame;
}

Synthesis CodecModelImpl::synthesize(const torch::Tensor& mv_code, const torch::Tensor& res_code,
                                     const torch::Tensor& x_ref) {
  Synthesis s;
  s.mv_ensemble = mv_decoder->forward(mv_code);
  s.refined_mc = predict(s.mv_ensemble, x_ref);
  s.res_ensemble = res_decoder->forward(res_code);
  s.reconstruction = reconstruct(s.refined_mc, s.res_ensemble, &s.reconstructions).clamp(0.0, 1.0);
  return s;
}

torch::Tensor CodecModelImpl::code_mv(const torch::Tensor& latent) {
  return clamp_to_support(quantize_infer(latent), mv_tables());
}

torch::Tensor CodecModelImpl::code_residual(const torch::Tensor& latent) {
  return clamp_to_support(quantize_infer(latent), res_tables());
}

PFrameResult CodecModelImpl::forward(const torch::Tensor& x_t, const torch::Tensor& x_ref, CodingMode mode,
                                     torch::Generator* gen, CodingStage stage) {
  require(x_t.dim() == 4 && x_t.sizes() == x_ref.sizes(), ErrorCode::kInvalidArgument,
          "pframe_forward: current and reference must be equal-shaped [N,C,H,W]");
  require(x_t.size(1) == cfg_.channels, ErrorCode::kInvalidArgument,
          "pframe_forward: model expects " + std::to_string(cfg_.channels) + "-channel frames");
  require(mode == CodingMode::kInfer || gen != nullptr, ErrorCode::kInvalidArgument,
          "pframe_forward: training mode needs a generator");
  const int64_t height = x_t.size(2), width = x_t.size(3);
  const auto x = pad_frame(x_t);
  const auto ref = pad_frame(x_ref);
  auto quantize = [&](const torch::Tensor& latent, bool is_mv) {
    if (mode == CodingMode::kTrain) return quantize_train(latent, *gen);
    return is_mv ? code_mv(latent) : code_residual(latent);
  };
  auto crop = [&](EnsemblePrediction e) {
    for (auto& m : e.members) m = crop_frame(m, height, width);
    return e;
  };

  PFrameResult r;
  const auto flow = estimate_motion(x, ref);
  r.flow = crop_frame(flow, height, width);
  r.mv_latent = encode_mv(flow);
  r.mv_code = quantize(r.mv_latent, true);
  r.bits_mv = rate_bits(mv_prior->likelihood(r.mv_code));
  const auto mv = mv_decoder->forward(r.mv_code);
  const auto refined = predict(mv, ref);
  r.mv_ensemble = crop(mv);
  r.refined_mc = crop(refined);
  if (stage == CodingStage::kInterOnly) return r;

  r.res_latent = encode_residual(x - mixture_mean(refined));
  r.res_code = quantize(r.res_latent, false);
  r.bits_res = rate_bits(res_prior->likelihood(r.res_code));
  const auto residuals = res_decoder->forward(r.res_code);
  EnsemblePrediction members;
  auto final_frame = reconstruct(refined, residuals, &members);
  if (mode == CodingMode::kInfer) final_frame = final_frame.clamp(0.0, 1.0);
  r.res_ensemble = crop(residuals);
  r.reconstructions = crop(std::move(members));
  r.reconstruction = crop_frame(final_frame, height, width);
  return r;
}

const std::vector<CdfTable>& CodecModelImpl::mv_tables() {
  if (!mv_tables_) mv_tables_ = mv_prior->cdf_tables();
  return *mv_tables_;
}

const std::vector<CdfTable>& CodecModelImpl::res_tables() {
  if (!res_tables_) res_tables_ = res_prior->cdf_tables();
  return *res_tables_;
}

void CodecModelImpl::invalidate_tables() {
  mv_tables_.reset();
  res_tables_.reset();
}

uint32_t CodecModelImpl::model_id() const {
  const auto echo = cfg_.echo();
  return hash_tensors(parameters(), fnv1a(echo.data(), echo.size()));
}

std::vector<torch::Tensor> CodecModelImpl::inter_parameters() const {
  std::vector<torch::Tensor> out;
  for (const torch::nn::Module* m : {static_cast<const torch::nn::Module*>(motion.get()),
                                     static_cast<const torch::nn::Module*>(mv_encoder.get()),
                                     static_cast<const torch::nn::Module*>(mv_decoder.get()),
                                     static_cast<const torch::nn::Module*>(mv_prior.get()),
                                     static_cast<const torch::nn::Module*>(prediction_refine.get())}) {
    auto p = m->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::vector<torch::Tensor> CodecModelImpl::residual_parameters() const {
  std::vector<torch::Tensor> out;
  for (const torch::nn::Module* m : {static_cast<const torch::nn::Module*>(res_encoder.get()),
                                     static_cast<const torch::nn::Module*>(res_decoder.get()),
                                     static_cast<const torch::nn::Module*>(res_prior.get()),
                                     static_cast<const torch::nn::Module*>(reconstruction_refine.get())}) {
    auto p = m->parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

ModelSizeReport CodecModelImpl::size_report() const {
  ModelSizeReport r;
  r.h = cfg_.h;
  r.total = count_parameters(parameters());
  r.motion = numel_of(*motion);
  r.mv_encoder = numel_of(*mv_encoder);
  r.mv_decoder = numel_of(*mv_decoder);
  r.res_encoder = numel_of(*res_encoder);
  r.res_decoder = numel_of(*res_decoder);
  r.prediction_refine = numel_of(*prediction_refine);
  r.reconstruction_refine = numel_of(*reconstruction_refine);
  r.entropy_models = numel_of(*mv_prior) + numel_of(*res_prior);
  r.mv_branch = mv_decoder->branch_parameter_count();
  r.res_branch = res_decoder->branch_parameter_count();
  return r;
}

void CodecModelImpl::make_refine_passthrough() {
  nn::scale_last_conv(prediction_refine, 0.0);
  nn::scale_last_conv(reconstruction_refine, 0.0);
  invalidate_tables();
}

torch::Tensor pad_frame(const torch::Tensor& x) {
  const int64_t h = x.size(-2), w = x.size(-1);
  const int64_t ph = (kPadMultiple - h % kPadMultiple) % kPadMultiple;
  const int64_t pw = (kPadMultiple - w % kPadMultiple) % kPadMultiple;
  if (ph == 0 && pw == 0) return x;
  namespace F = torch::nn::functional;
  return F::pad(x, F::PadFuncOptions({0, pw, 0, ph}).mode(torch::kReplicate));
}

torch::Tensor crop_frame(const torch::Tensor& x, int64_t height, int64_t width) {
  if (x.size(-2) == height && x.size(-1) == width) return x;
  return x.slice(-2, 0, height).slice(-1, 0, width);
}

int64_t count_parameters(const std::vector<torch::Tensor>& params) {
  int64_t n = 0;
  for (const auto& p : params) n += p.numel();
  return n;
}

}  // namespace uncodec
