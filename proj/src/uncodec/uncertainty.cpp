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

#include "uncodec/uncertainty.hpp"

#include <cmath>
#include <fstream>

#include "uncodec/error.hpp"
#include "uncodec/motion.hpp"
#include "uncodec/png_io.hpp"
#include "uncodec/quantization.hpp"

namespace uncodec {
namespace {

torch::Tensor as_batch(const torch::Tensor& t) { return t.dim() == 3 ? t.unsqueeze(0) : t; }

void check_pair(const torch::Tensor& x_t, const torch::Tensor& x_ref) {
  require(x_t.dim() == 3 && x_t.sizes() == x_ref.sizes(), ErrorCode::kInvalidArgument,
          "uncertainty maps expect two equal-shaped [C,H,W] frames");
}

}  // namespace

FlowNorm parse_flow_norm(const std::string& name) {
  if (name == "l2") return FlowNorm::kL2;
  if (name == "l1") return FlowNorm::kL1;
  fail(ErrorCode::kConfig, "unknown flow norm '" + name + "'");
}

HeatMap flow_distance_map(const torch::Tensor& a, const torch::Tensor& b, FlowNorm norm) {
  const auto fa = as_batch(a).detach().to(torch::kFloat64), fb = as_batch(b).detach().to(torch::kFloat64);
  require(fa.sizes() == fb.sizes() && fa.size(0) == 1 && fa.size(1) == 2, ErrorCode::kInvalidArgument,
          "flow_distance_map expects two [2,H,W] flows");
  const auto d = (fa - fb)[0];
  if (norm == FlowNorm::kL1) return {d.abs().sum(0)};
  return {d.pow(2).sum(0).sqrt()};
}

HeatMap aleatoric_map(CodecModelImpl& model, const torch::Tensor& x_t, const torch::Tensor& x_ref, FlowNorm norm,
                      double gap_threshold, double fraction) {
  check_pair(x_t, x_ref);
  torch::NoGradGuard guard;
  const auto x = pad_frame(x_t.unsqueeze(0)), ref = pad_frame(x_ref.unsqueeze(0));
  const auto latent = model.encode_mv(model.estimate_motion(x, ref));
  const auto code = quantize_infer(latent);
  const auto perturbed = perturb_quantized(latent, code, gap_threshold, fraction);
  const auto f0 = crop_frame(mixture_mean(model.mv_decoder->forward(code)), x_t.size(1), x_t.size(2));
  const auto f1 = crop_frame(mixture_mean(model.mv_decoder->forward(perturbed)), x_t.size(1), x_t.size(2));
  return flow_distance_map(f0, f1, norm);
}

HeatMap epistemic_map(const torch::Tensor& x_t, const torch::Tensor& x_ref, const torch::Tensor& flow) {
  check_pair(x_t, x_ref);
  torch::NoGradGuard guard;
  const auto warped = bilinear_warp(x_ref.unsqueeze(0).to(torch::kFloat64), as_batch(flow).to(torch::kFloat64));
  return {(x_t.to(torch::kFloat64) - warped[0]).pow(2).mean(0)};
}

HeatMap epistemic_map(CodecModelImpl& model, const torch::Tensor& x_t, const torch::Tensor& x_ref) {
  check_pair(x_t, x_ref);
  torch::NoGradGuard guard;
  const auto flow = model.estimate_motion(pad_frame(x_t.unsqueeze(0)), pad_frame(x_ref.unsqueeze(0)));
  return epistemic_map(x_t, x_ref, crop_frame(flow, x_t.size(1), x_t.size(2)));
}

HeatMap predictive_map(const EnsemblePrediction& mv, bool remove_floor) {
  mv.validate();
  require(mv.members.front().dim() == 4 && mv.members.front().size(0) == 1 && mv.members.front().size(1) == 2,
          ErrorCode::kInvalidArgument, "predictive_map expects [1,2,H,W] flow members");
  EnsemblePrediction d = mv;
  for (auto& m : d.members) m = m.detach().to(torch::kFloat64);
  auto v = mixture_variance(d)[0].sum(0);
  if (remove_floor) v = (v - 2.0).clamp_min(0.0);
  return {v};
}

HeatMap predictive_map(CodecModelImpl& model, const torch::Tensor& x_t, const torch::Tensor& x_ref,
                       bool remove_floor) {
  check_pair(x_t, x_ref);
  torch::NoGradGuard guard;
  const auto r = model.forward(x_t.unsqueeze(0), x_ref.unsqueeze(0), CodingMode::kInfer, nullptr,
                               CodingStage::kInterOnly);
  return predictive_map(r.mv_ensemble, remove_floor);
}

torch::Tensor normalize_minmax(const HeatMap& map) {
  const double lo = map.values.min().item<double>(), hi = map.values.max().item<double>();
  if (hi - lo <= 0) return torch::zeros_like(map.values);
  return (map.values - lo) / (hi - lo);
}

void write_heatmap_png(const std::string& path, const HeatMap& map) {
  auto n = (normalize_minmax(map) * 65535.0).round().to(torch::kInt32).contiguous();
  std::vector<uint16_t> px(n.data_ptr<int32_t>(), n.data_ptr<int32_t>() + n.numel());
  write_png_gray16(path, static_cast<int>(map.width()), static_cast<int>(map.height()), px);
}

void write_heatmap_raw(const std::string& path, const HeatMap& map) {
  auto f = map.values.to(torch::kFloat32).contiguous();
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(f.data_ptr<float>()), static_cast<std::streamsize>(f.numel() * 4));
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + path + "'");
}

HeatMap read_heatmap_raw(const std::string& path, int64_t height, int64_t width) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot read '" + path + "'");
  auto f = torch::empty({height, width}, torch::kFloat32);
  in.read(reinterpret_cast<char*>(f.data_ptr<float>()), static_cast<std::streamsize>(f.numel() * 4));
  require(static_cast<bool>(in), ErrorCode::kIo, "'" + path + "' is shorter than " + std::to_string(height) + "x" +
                                                     std::to_string(width) + " floats");
  return {f.to(torch::kFloat64)};
}

}  // namespace uncodec
