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

#include "uncodec/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "uncodec/error.hpp"

namespace uncodec {
namespace {

using Rgb = std::array<uint8_t, 3>;

constexpr Rgb kPalette[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40},
                            {148, 103, 189}, {140, 86, 75}, {227, 119, 194}, {127, 127, 127}};

// 3x5 glyphs for tick labels, one row per 3-bit mask.
const std::array<uint8_t, 5>* glyph(char ch) {
  static const std::array<uint8_t, 5> digits[10] = {
      {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
      {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7}};
  static const std::array<uint8_t, 5> dot = {0, 0, 0, 0, 2}, minus = {0, 0, 7, 0, 0};
  if (ch >= '0' && ch <= '9') return &digits[ch - '0'];
  if (ch == '.') return &dot;
  if (ch == '-') return &minus;
  return nullptr;
}

struct Canvas {
  Image8 img;

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    auto* p = &img.pixels[(static_cast<std::size_t>(y) * img.width + x) * 3];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }
  void line(double x0, double y0, double x1, double y1, Rgb c) {
    const int steps = static_cast<int>(std::max(std::abs(x1 - x0), std::abs(y1 - y0))) + 1;
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
      const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
      set(x, y, c);
      set(x + 1, y, c);
      set(x, y + 1, c);
    }
  }
  void box(int cx, int cy, int r, Rgb c) {
    for (int y = -r; y <= r; ++y)
      for (int x = -r; x <= r; ++x) set(cx + x, cy + y, c);
  }
  void block(int x, int y, Rgb c) {  // 2x2 font pixel
    set(x, y, c);
    set(x + 1, y, c);
    set(x, y + 1, c);
    set(x + 1, y + 1, c);
  }
  void text(int x, int y, const std::string& s, Rgb c) {
    for (char ch : s) {
      if (const auto* g = glyph(ch)) {
        for (int row = 0; row < 5; ++row)
          for (int col = 0; col < 3; ++col)
            if ((*g)[row] & (4 >> col)) block(x + 2 * col, y + 2 * row, c);
      }
      x += 8;
    }
  }
};

std::string tick_label(double v, double step) {
  char buf[32];
  const int decimals = std::clamp(static_cast<int>(std::ceil(-std::log10(step))), 0, 4);
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

double nice_step(double span) {
  const double raw = span / 5;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10 * mag;
}

}  // namespace

Image8 render_rd_plot(const std::vector<RDCurve>& curves, int width, int height) {
  require(width >= 160 && height >= 120, ErrorCode::kInvalidArgument, "plot too small");
  Canvas cv;
  cv.img.width = width;
  cv.img.height = height;
  cv.img.channels = 3;
  cv.img.pixels.assign(static_cast<std::size_t>(width) * height * 3, 255);

  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& c : curves)
    for (const auto& p : c.points) {
      x_lo = std::min(x_lo, p.bpp);
      x_hi = std::max(x_hi, p.bpp);
      y_lo = std::min(y_lo, p.psnr_db);
      y_hi = std::max(y_hi, p.psnr_db);
    }
  if (!std::isfinite(x_lo)) return cv.img;
  if (x_hi - x_lo < 1e-9) x_lo -= 0.5, x_hi += 0.5;
  if (y_hi - y_lo < 1e-9) y_lo -= 0.5, y_hi += 0.5;
  const double xs = nice_step(x_hi - x_lo), ys = nice_step(y_hi - y_lo);
  x_lo = std::floor(x_lo / xs) * xs;
  x_hi = std::ceil(x_hi / xs) * xs;
  y_lo = std::floor(y_lo / ys) * ys;
  y_hi = std::ceil(y_hi / ys) * ys;

  const int left = 60, right = width - 20, top = 20, bottom = height - 40;
  auto px = [&](double v) { return left + (v - x_lo) / (x_hi - x_lo) * (right - left); };
  auto py = [&](double v) { return bottom - (v - y_lo) / (y_hi - y_lo) * (bottom - top); };
  const Rgb axis{0, 0, 0}, grid{225, 225, 225};
  for (double v = x_lo; v <= x_hi + xs / 2; v += xs) {
    cv.line(px(v), top, px(v), bottom, grid);
    cv.line(px(v), bottom, px(v), bottom + 5, axis);
    const auto s = tick_label(v, xs);
    cv.text(static_cast<int>(px(v)) - 4 * static_cast<int>(s.size()), bottom + 10, s, axis);
  }
  for (double v = y_lo; v <= y_hi + ys / 2; v += ys) {
    cv.line(left, py(v), right, py(v), grid);
    cv.line(left - 5, py(v), left, py(v), axis);
    const auto s = tick_label(v, ys);
    cv.text(left - 10 - 8 * static_cast<int>(s.size()), static_cast<int>(py(v)) - 5, s, axis);
  }
  cv.line(left, bottom, right, bottom, axis);
  cv.line(left, top, left, bottom, axis);

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const Rgb col = kPalette[i % std::size(kPalette)];
    const auto& pts = curves[i].points;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k > 0) cv.line(px(pts[k - 1].bpp), py(pts[k - 1].psnr_db), px(pts[k].bpp), py(pts[k].psnr_db), col);
      cv.box(static_cast<int>(std::lround(px(pts[k].bpp))), static_cast<int>(std::lround(py(pts[k].psnr_db))), 3, col);
    }
    // Legend swatch, top right, in curve order.
    cv.box(right - 12, top + 8 + 14 * static_cast<int>(i), 5, col);
  }
  return cv.img;
}

void write_rd_plot(const std::string& path, const std::vector<RDCurve>& curves) {
  write_png(path, render_rd_plot(curves));
}

}  // namespace uncodec
