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

#include "uncodec/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "uncodec/error.hpp"

namespace uncodec {
namespace {

struct Wave {
  double fx, fy, phase, amp;
};

struct Texture {
  std::vector<double> base;               // per channel
  std::vector<std::vector<Wave>> waves;   // per channel

  double at(int c, double x, double y) const {
    double v = base[c];
    for (const auto& w : waves[c]) v += w.amp * std::sin(2.0 * std::numbers::pi * (w.fx * x + w.fy * y) + w.phase);
    return std::clamp(v, 0.0, 1.0);
  }
};

Texture random_texture(std::mt19937_64& rng, int channels, double max_freq, double amp) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Texture t;
  for (int c = 0; c < channels; ++c) {
    t.base.push_back(0.25 + 0.5 * u(rng));
    std::vector<Wave> waves;
    for (int k = 0; k < 3; ++k) {
      waves.push_back({(u(rng) * 2 - 1) * max_freq, (u(rng) * 2 - 1) * max_freq, u(rng) * 2 * std::numbers::pi,
                       amp * (0.5 + 0.5 * u(rng))});
    }
    t.waves.push_back(std::move(waves));
  }
  return t;
}

}  // namespace

SyntheticClip generate_clip(const SyntheticParams& p, uint64_t seed) {
  require(p.height >= 8 && p.width >= 8 && p.frames >= 1 && p.shapes >= 0, ErrorCode::kInvalidArgument,
          "invalid synthetic clip parameters");
  require(p.channels == 1 || p.channels == 3, ErrorCode::kInvalidArgument, "synthetic clips are RGB or luma");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const Texture background = random_texture(rng, p.channels, 0.08, 0.12);
  std::vector<Texture> textures;
  std::vector<ShapeState> state(p.shapes);
  std::vector<std::pair<double, double>> velocity(p.shapes);
  const double min_side = std::max(4.0, std::min(p.height, p.width) / 6.0);
  const double max_side = std::max(min_side, std::min(p.height, p.width) / 3.0);
  for (int s = 0; s < p.shapes; ++s) {
    textures.push_back(random_texture(rng, p.channels, 0.25, 0.2));
    auto& st = state[s];
    st.w = std::round(min_side + u(rng) * (max_side - min_side));
    st.h = std::round(min_side + u(rng) * (max_side - min_side));
    if (p.squares) st.h = st.w;
    st.x = u(rng) * (p.width - st.w);
    st.y = u(rng) * (p.height - st.h);
    const double speed = p.max_speed * (0.3 + 0.7 * u(rng));
    const double angle = u(rng) * 2 * std::numbers::pi;
    velocity[s] = {speed * std::cos(angle), speed * std::sin(angle)};
  }

  SyntheticClip clip;
  clip.sequence.name = "synthetic_" + std::to_string(seed);
  for (int t = 0; t < p.frames; ++t) {
    auto img = torch::empty({p.channels, p.height, p.width}, torch::kFloat32);
    auto acc = img.accessor<float, 3>();
    for (int y = 0; y < p.height; ++y) {
      for (int x = 0; x < p.width; ++x) {
        // Later shapes are drawn on top.
        int top = -1;
        for (int s = 0; s < p.shapes; ++s) {
          const auto& st = state[s];
          const double cx = x + 0.5, cy = y + 0.5;
          if (cx >= st.x && cx < st.x + st.w && cy >= st.y && cy < st.y + st.h) top = s;
        }
        for (int c = 0; c < p.channels; ++c) {
          acc[c][y][x] = static_cast<float>(top < 0 ? background.at(c, x, y)
                                                    : textures[top].at(c, x - state[top].x, y - state[top].y));
        }
      }
    }
    clip.sequence.frames.push_back(Frame{quantize_to_8bit(img)});
    clip.shapes.push_back(state);

    for (int s = 0; s < p.shapes; ++s) {
      auto& st = state[s];
      auto& [vx, vy] = velocity[s];
      st.x += vx;
      st.y += vy;
      if (st.x < 0 || st.x + st.w > p.width) {
        vx = -vx;
        st.x = std::clamp(st.x, 0.0, p.width - st.w);
      }
      if (st.y < 0 || st.y + st.h > p.height) {
        vy = -vy;
        st.y = std::clamp(st.y, 0.0, p.height - st.h);
      }
    }
  }
  return clip;
}

std::vector<VideoSequence> generate_corpus(const SyntheticParams& params, int sequences, uint64_t seed) {
  std::vector<VideoSequence> out;
  std::mt19937_64 seeder(seed);
  for (int i = 0; i < sequences; ++i) {
    auto clip = generate_clip(params, seeder());
    clip.sequence.name = "clip_" + std::to_string(i);
    out.push_back(std::move(clip.sequence));
  }
  return out;
}

}  // namespace uncodec
