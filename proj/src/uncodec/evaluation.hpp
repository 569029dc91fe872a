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

#include <array>
#include <span>
#include <string>
#include <vector>

#include "uncodec/frames.hpp"

namespace uncodec {

inline constexpr double kPsnrCapDb = 100.0;

/// 10 log10(1 / MSE) for signals in [0, 1]; kPsnrCapDb when MSE < 1e-10.
double psnr(const torch::Tensor& x, const torch::Tensor& y);

/// bits_total / (n_frames * height * width).
double sequence_bpp(double bits_total, int n_frames, int height, int width);

struct RDPoint {
  double bpp = 0;
  double psnr_db = 0;
  double lambda = 0;  // 0 when unknown
};

struct RDCurve {
  std::string label;
  std::vector<RDPoint> points;

  /// >= 4 finite points, bpp > 0 and strictly increasing.
  void validate() const;
  /// PSNR non-decreasing in bpp. Violations are legal but suspicious.
  bool psnr_monotone() const;
  void sort_by_bpp();
};

enum class BdMethod {
  kCubic,  // least-squares cubic of log10(bpp) over PSNR, integrated exactly
  kPchip,  // monotone piecewise-cubic Hermite interpolation
};

BdMethod parse_bd_method(const std::string& name);

/// Average rate difference of `test` against `anchor` at equal PSNR, in
/// percent (negative = savings). Integrates over the common PSNR interval,
/// which must span at least 1 dB. Throws kEvaluation otherwise.
double bd_rate(const RDCurve& test, const RDCurve& anchor, BdMethod method = BdMethod::kCubic);

/// Coefficients c0..c3 of the least-squares cubic y ~ sum c_i x^i.
std::array<double, 4> fit_cubic(std::span<const double> x, std::span<const double> y);

/// Monotone cubic Hermite interpolant through (x, y), x strictly increasing.
class Pchip {
 public:
  Pchip(std::vector<double> x, std::vector<double> y);
  double operator()(double t) const;
  /// Exact integral over [lo, hi] within the data range.
  double integral(double lo, double hi) const;

 private:
  std::vector<double> x_, y_, d_;
};

/// CSV with header `label,lambda,bpp,psnr_db`. Rows are grouped by label in
/// order of first appearance and sorted by bpp. Malformed rows throw kConfig
/// with the line number.
std::vector<RDCurve> parse_rd_csv(const std::string& text, const std::string& origin = "<csv>");
std::vector<RDCurve> read_rd_csv(const std::string& path);
std::string format_rd_csv(const std::vector<RDCurve>& curves);
void write_rd_csv(const std::string& path, const std::vector<RDCurve>& curves);

/// Labels of the form "method/dataset" are laid out as a method x dataset
/// grid. Each test curve is matched to the anchor with the same label, else
/// the anchor for the same dataset, else the only anchor curve.
struct BdTable {
  std::vector<std::string> methods, datasets;
  std::vector<std::vector<double>> percent;  // [method][dataset], NaN = absent
  std::string to_string() const;
};

BdTable bd_rate_table(const std::vector<RDCurve>& tests, const std::vector<RDCurve>& anchors,
                      BdMethod method = BdMethod::kCubic);

struct EvalResult {
  RDCurve curve;
  /// Per checkpoint: total P-frame stream bits and the model's estimate.
  std::vector<double> actual_p_bits, estimated_p_bits;
  /// Reported per checkpoint, e.g. for a printed summary.
  std::vector<std::string> checkpoints;
};

/// Encodes every sequence with each checkpoint (one rate point per
/// checkpoint), measuring real container bytes and decoded PSNR. bpp pools
/// all frames; PSNR is the mean over all frames.
EvalResult eval_model(const std::vector<std::string>& checkpoints, const std::vector<VideoSequence>& sequences,
                      int gop, const std::string& label);

}  // namespace uncodec
