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

#include "uncodec/motion.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "uncodec/error.hpp"
#include "uncodec/layers.hpp"

namespace uncodec {

torch::Tensor bilinear_warp(const torch::Tensor& ref, const torch::Tensor& flow) {
  require(ref.dim() == 4 && flow.dim() == 4 && flow.size(1) == 2, ErrorCode::kInvalidArgument,
          "bilinear_warp expects ref [N,C,H,W] and flow [N,2,H,W]");
  require(ref.size(0) == flow.size(0) && ref.size(2) == flow.size(2) && ref.size(3) == flow.size(3),
          ErrorCode::kInvalidArgument, "bilinear_warp: reference and flow shapes differ");
  const int64_t n = ref.size(0), c = ref.size(1), h = ref.size(2), w = ref.size(3);
  const auto opts = flow.options();

  auto xs = torch::arange(w, opts).view({1, 1, w});
  auto ys = torch::arange(h, opts).view({1, h, 1});
  auto gx = (xs + flow.select(1, 0)).clamp(0, static_cast<double>(w - 1));
  auto gy = (ys + flow.select(1, 1)).clamp(0, static_cast<double>(h - 1));

  // floor() carries no gradient, so d/dg of (g - floor(g)) is 1 everywhere:
  // at integer positions this is the right-sided derivative.
  auto x0 = gx.floor();
  auto y0 = gy.floor();
  auto wx = (gx - x0).unsqueeze(1);
  auto wy = (gy - y0).unsqueeze(1);
  // A non-finite flow must not index out of bounds; its NaN weights still
  // poison the output so callers see the divergence.
  auto x0i = x0.nan_to_num(0).to(torch::kLong);
  auto y0i = y0.nan_to_num(0).to(torch::kLong);
  auto x1i = (x0i + 1).clamp_max(w - 1);
  auto y1i = (y0i + 1).clamp_max(h - 1);

  auto flat = ref.reshape({n, c, h * w});
  auto sample = [&](const torch::Tensor& yi, const torch::Tensor& xi) {
    auto idx = (yi * w + xi).reshape({n, 1, h * w}).expand({n, c, h * w});
    return flat.gather(2, idx).reshape({n, c, h, w});
  };
  auto top = sample(y0i, x0i) * (1 - wx) + sample(y0i, x1i) * wx;
  auto bottom = sample(y1i, x0i) * (1 - wx) + sample(y1i, x1i) * wx;
  return top * (1 - wy) + bottom * wy;
}

torch::Tensor motion_mse_loss(const torch::Tensor& current, const torch::Tensor& ref, const torch::Tensor& flow) {
  require(current.sizes() == ref.sizes(), ErrorCode::kInvalidArgument, "motion_mse_loss: frame shapes differ");
  return (current - bilinear_warp(ref, flow)).pow(2).mean();
}

MotionNetImpl::MotionNetImpl(int channels, int width, int levels) {
  require(levels >= 1 && width >= 1, ErrorCode::kInvalidArgument, "motion network needs >= 1 level");
  for (int l = 0; l < levels; ++l) {
    auto stack = nn::conv_stack(2 * channels + 2, width, 2, 5);
    nn::scale_last_conv(stack, 0.1);
    stacks_.push_back(register_module("level" + std::to_string(l), stack));
  }
}

torch::Tensor MotionNetImpl::forward(const torch::Tensor& current, const torch::Tensor& ref) {
  const int64_t scale = int64_t{1} << (levels() - 1);
  require(current.size(2) % scale == 0 && current.size(3) % scale == 0, ErrorCode::kInvalidArgument,
          "motion network input must be divisible by " + std::to_string(scale));
  std::vector<torch::Tensor> cur_pyr{current}, ref_pyr{ref};
  for (int l = 1; l < levels(); ++l) {
    cur_pyr.push_back(torch::avg_pool2d(cur_pyr.back(), 2));
    ref_pyr.push_back(torch::avg_pool2d(ref_pyr.back(), 2));
  }
  torch::Tensor flow;
  // stacks_[0] runs at the coarsest level.
  for (int l = 0; l < levels(); ++l) {
    const auto& cur = cur_pyr[levels() - 1 - l];
    const auto& rf = ref_pyr[levels() - 1 - l];
    if (!flow.defined()) {
      flow = torch::zeros({cur.size(0), 2, cur.size(2), cur.size(3)}, cur.options());
    } else {
      flow = 2.0 * torch::nn::functional::interpolate(
                       flow, torch::nn::functional::InterpolateFuncOptions()
                                 .size(std::vector<int64_t>{cur.size(2), cur.size(3)})
                                 .mode(torch::kBilinear)
                                 .align_corners(false));
    }
    auto warped = bilinear_warp(rf, flow);
    flow = flow + stacks_[l]->forward(torch::cat({cur, warped, flow}, 1));
  }
  return flow;
}

void write_flow(const std::string& path, const torch::Tensor& flow) {
  require(flow.dim() == 3 && flow.size(0) == 2, ErrorCode::kInvalidArgument, "write_flow expects [2,H,W]");
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + path + "'");
  const float tag = 202021.25f;
  const int32_t w = static_cast<int32_t>(flow.size(2)), h = static_cast<int32_t>(flow.size(1));
  auto hw2 = flow.detach().to(torch::kFloat32).permute({1, 2, 0}).contiguous();
  out.write(reinterpret_cast<const char*>(&tag), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(hw2.data_ptr<float>()), hw2.numel() * 4);
}

torch::Tensor read_flow(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot read '" + path + "'");
  float tag = 0;
  int32_t w = 0, h = 0;
  in.read(reinterpret_cast<char*>(&tag), 4);
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  require(in && tag == 202021.25f && w > 0 && h > 0, ErrorCode::kIo, "'" + path + "' is not a flow file");
  auto hw2 = torch::empty({h, w, 2}, torch::kFloat32);
  in.read(reinterpret_cast<char*>(hw2.data_ptr<float>()), hw2.numel() * 4);
  require(static_cast<bool>(in), ErrorCode::kIo, "truncated flow file '" + path + "'");
  return hw2.permute({2, 0, 1}).contiguous();
}

Image8 flow_to_color(const torch::Tensor& flow, double max_magnitude) {
  require(flow.dim() == 3 && flow.size(0) == 2, ErrorCode::kInvalidArgument, "flow_to_color expects [2,H,W]");
  auto f = flow.detach().to(torch::kFloat64).contiguous();
  const int h = static_cast<int>(f.size(1)), w = static_cast<int>(f.size(2));
  auto acc = f.accessor<double, 3>();
  double max_mag = max_magnitude;
  if (max_mag <= 0) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) max_mag = std::max(max_mag, std::hypot(acc[0][y][x], acc[1][y][x]));
  }
  Image8 img{w, h, 3, std::vector<uint8_t>(static_cast<std::size_t>(w) * h * 3)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dx = acc[0][y][x], dy = acc[1][y][x];
      const double sat = max_mag > 0 ? std::min(1.0, std::hypot(dx, dy) / max_mag) : 0.0;
      const double hue = (std::atan2(-dy, -dx) / std::numbers::pi + 1.0) * 3.0;  // [0, 6)
      const int sector = static_cast<int>(hue) % 6;
      const double frac = hue - std::floor(hue);
      double rgb[3];
      const double rising = frac, falling = 1.0 - frac;
      switch (sector) {
        case 0: rgb[0] = 1; rgb[1] = rising; rgb[2] = 0; break;
        case 1: rgb[0] = falling; rgb[1] = 1; rgb[2] = 0; break;
        case 2: rgb[0] = 0; rgb[1] = 1; rgb[2] = rising; break;
        case 3: rgb[0] = 0; rgb[1] = falling; rgb[2] = 1; break;
        case 4: rgb[0] = rising; rgb[1] = 0; rgb[2] = 1; break;
        default: rgb[0] = 1; rgb[1] = 0; rgb[2] = falling; break;
      }
      for (int c = 0; c < 3; ++c) {
        const double v = 1.0 - sat * (1.0 - rgb[c]);  // white at zero motion
        img.pixels[(static_cast<std::size_t>(y) * w + x) * 3 + c] = static_cast<uint8_t>(std::lround(255.0 * v));
      }
    }
  }
  return img;
}

}  // namespace uncodec
