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

#include "uncodec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "uncodec/checkpoint.hpp"
#include "uncodec/error.hpp"
#include "uncodec/sequence_codec.hpp"

namespace uncodec {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Cubic in the normalized variable u = (x - center) / scale.
struct Cubic {
  double center = 0, scale = 1;
  std::array<double, 4> c{};

  double antiderivative(double x) const {
    const double u = (x - center) / scale;
    return scale * u * (c[0] + u * (c[1] / 2 + u * (c[2] / 3 + u * c[3] / 4)));
  }
  double integral(double lo, double hi) const { return antiderivative(hi) - antiderivative(lo); }
};

Cubic fit_normalized(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 4, ErrorCode::kEvaluation, "cubic fit needs at least 4 points");
  Cubic f;
  double sum = 0;
  for (double v : x) sum += v;
  f.center = sum / static_cast<double>(x.size());
  f.scale = 0;
  for (double v : x) f.scale = std::max(f.scale, std::abs(v - f.center));
  require(f.scale > 0, ErrorCode::kEvaluation, "degenerate fit: all PSNR values are equal");
  // Normal equations A c = b with A_ij = sum u^(i+j).
  double a[4][5] = {};
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double u = (x[k] - f.center) / f.scale;
    double pw[7] = {1};
    for (int i = 1; i < 7; ++i) pw[i] = pw[i - 1] * u;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) a[i][j] += pw[i + j];
      a[i][4] += pw[i] * y[k];
    }
  }
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    require(std::abs(a[piv][col]) > 1e-12, ErrorCode::kEvaluation,
            "degenerate fit: fewer than 4 distinct PSNR values");
    std::swap(a[piv], a[col]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double m = a[r][col] / a[col][col];
      for (int j = col; j < 5; ++j) a[r][j] -= m * a[col][j];
    }
  }
  for (int i = 0; i < 4; ++i) f.c[i] = a[i][4] / a[i][i];
  return f;
}

struct LogRate {
  std::vector<double> psnr, log_rate;
};

LogRate log_rates(const RDCurve& curve) {
  curve.validate();
  LogRate r;
  for (const auto& p : curve.points) {
    r.psnr.push_back(p.psnr_db);
    r.log_rate.push_back(std::log10(p.bpp));
  }
  return r;
}

double pchip_endpoint(double h0, double h1, double d0, double d1) {
  double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
  if ((d > 0) != (d0 > 0) || d == 0) return 0;
  if ((d0 > 0) != (d1 > 0) && std::abs(d) > std::abs(3 * d0)) return 3 * d0;
  return d;
}

}  // namespace

double psnr(const torch::Tensor& x, const torch::Tensor& y) {
  require(x.sizes() == y.sizes(), ErrorCode::kInvalidArgument, "psnr: shapes differ");
  const double mse = (x.detach().to(torch::kFloat64) - y.detach().to(torch::kFloat64)).pow(2).mean().item<double>();
  if (mse < 1e-10) return kPsnrCapDb;
  return 10.0 * std::log10(1.0 / mse);
}

double sequence_bpp(double bits_total, int n_frames, int height, int width) {
  require(n_frames > 0 && height > 0 && width > 0, ErrorCode::kInvalidArgument, "sequence_bpp: dimensions must be positive");
  return bits_total / (static_cast<double>(n_frames) * height * width);
}

void RDCurve::validate() const {
  require(points.size() >= 4, ErrorCode::kEvaluation, "curve '" + label + "' has fewer than 4 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    require(std::isfinite(p.bpp) && std::isfinite(p.psnr_db) && p.bpp > 0, ErrorCode::kEvaluation,
            "curve '" + label + "': non-finite or non-positive point");
    require(i == 0 || p.bpp > points[i - 1].bpp, ErrorCode::kEvaluation,
            "curve '" + label + "': bpp must be strictly increasing");
  }
}

bool RDCurve::psnr_monotone() const {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].psnr_db < points[i - 1].psnr_db) return false;
  return true;
}

void RDCurve::sort_by_bpp() {
  std::stable_sort(points.begin(), points.end(), [](const RDPoint& a, const RDPoint& b) { return a.bpp < b.bpp; });
}

BdMethod parse_bd_method(const std::string& name) {
  if (name == "cubic") return BdMethod::kCubic;
  if (name == "pchip") return BdMethod::kPchip;
  fail(ErrorCode::kConfig, "unknown BD-rate method '" + name + "' (cubic or pchip)");
}

std::array<double, 4> fit_cubic(std::span<const double> x, std::span<const double> y) {
  const auto f = fit_normalized(x, y);
  // Expand sum c_i ((x - m) / s)^i into powers of x.
  std::array<double, 4> out{};
  const double m = f.center, s = f.scale;
  const double binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  for (int i = 0; i < 4; ++i) {
    const double ci = f.c[i] / std::pow(s, i);
    for (int j = 0; j <= i; ++j) out[j] += ci * binom[i][j] * std::pow(-m, i - j);
  }
  return out;
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  require(n >= 2 && n == y_.size(), ErrorCode::kEvaluation, "pchip needs at least 2 points");
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = x_[k + 1] - x_[k];
    require(h[k] > 0, ErrorCode::kEvaluation, "pchip: abscissae must be strictly increasing");
    delta[k] = (y_[k + 1] - y_[k]) / h[k];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (delta[k - 1] * delta[k] <= 0) continue;
    const double w1 = 2 * h[k] + h[k - 1], w2 = h[k] + 2 * h[k - 1];
    d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
  }
  d_[0] = pchip_endpoint(h[0], h[1], delta[0], delta[1]);
  d_[n - 1] = pchip_endpoint(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

double Pchip::operator()(double t) const {
  const std::size_t n = x_.size();
  std::size_t k = std::upper_bound(x_.begin(), x_.end(), t) - x_.begin();
  k = std::clamp<std::size_t>(k, 1, n - 1) - 1;
  const double h = x_[k + 1] - x_[k], s = (t - x_[k]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1];
}

double Pchip::integral(double lo, double hi) const {
  // Two-point Gauss-Legendre is exact for the cubic on each piece.
  const double g = 1.0 / std::sqrt(3.0);
  double total = 0;
  for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
    const double a = std::max(lo, x_[k]), b = std::min(hi, x_[k + 1]);
    if (b <= a) continue;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    total += half * ((*this)(mid - half * g) + (*this)(mid + half * g));
  }
  return total;
}

double bd_rate(const RDCurve& test, const RDCurve& anchor, BdMethod method) {
  const auto t = log_rates(test), a = log_rates(anchor);
  const double lo = std::max(*std::min_element(t.psnr.begin(), t.psnr.end()),
                             *std::min_element(a.psnr.begin(), a.psnr.end()));
  const double hi = std::min(*std::max_element(t.psnr.begin(), t.psnr.end()),
                             *std::max_element(a.psnr.begin(), a.psnr.end()));
  require(hi - lo >= 1.0, ErrorCode::kEvaluation,
          "curves '" + test.label + "' and '" + anchor.label + "' overlap by less than 1 dB in PSNR");
  double diff = 0;
  if (method == BdMethod::kCubic) {
    diff = fit_normalized(t.psnr, t.log_rate).integral(lo, hi) - fit_normalized(a.psnr, a.log_rate).integral(lo, hi);
  } else {
    auto pchip = [](const LogRate& r) {
      std::vector<std::size_t> order(r.psnr.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](auto i, auto j) { return r.psnr[i] < r.psnr[j]; });
      std::vector<double> x, y;
      for (auto i : order) {
        x.push_back(r.psnr[i]);
        y.push_back(r.log_rate[i]);
      }
      return Pchip(x, y);
    };
    diff = pchip(t).integral(lo, hi) - pchip(a).integral(lo, hi);
  }
  return (std::pow(10.0, diff / (hi - lo)) - 1.0) * 100.0;
}

std::vector<RDCurve> parse_rd_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header = false;
  std::vector<RDCurve> curves;
  std::map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(trim(cell));
    if (line.back() == ',') cols.emplace_back();
    const auto where = origin + ":" + std::to_string(lineno);
    if (!header) {
      require(cols == std::vector<std::string>{"label", "lambda", "bpp", "psnr_db"}, ErrorCode::kConfig,
              where + ": expected header 'label,lambda,bpp,psnr_db'");
      header = true;
      continue;
    }
    require(cols.size() == 4 && !cols[0].empty(), ErrorCode::kConfig, where + ": expected 4 columns");
    RDPoint p;
    try {
      std::size_t u1 = 0, u2 = 0, u3 = 0;
      p.lambda = cols[1].empty() ? 0.0 : std::stod(cols[1], &u1);
      p.bpp = std::stod(cols[2], &u2);
      p.psnr_db = std::stod(cols[3], &u3);
      require((cols[1].empty() || u1 == cols[1].size()) && u2 == cols[2].size() && u3 == cols[3].size(),
              ErrorCode::kConfig, where + ": malformed number");
    } catch (const std::logic_error&) {
      fail(ErrorCode::kConfig, where + ": malformed number");
    }
    require(std::isfinite(p.bpp) && std::isfinite(p.psnr_db) && p.bpp > 0, ErrorCode::kConfig,
            where + ": bpp must be positive and values finite");
    auto [it, fresh] = index.emplace(cols[0], curves.size());
    if (fresh) curves.push_back(RDCurve{cols[0], {}});
    curves[it->second].points.push_back(p);
  }
  require(header, ErrorCode::kConfig, origin + ": empty CSV");
  for (auto& c : curves) c.sort_by_bpp();
  return curves;
}

std::vector<RDCurve> read_rd_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rd_csv(ss.str(), path);
}

std::string format_rd_csv(const std::vector<RDCurve>& curves) {
  std::ostringstream os;
  os << "label,lambda,bpp,psnr_db\n" << std::setprecision(10);
  for (const auto& c : curves)
    for (const auto& p : c.points) os << c.label << ',' << p.lambda << ',' << p.bpp << ',' << p.psnr_db << '\n';
  return os.str();
}

void write_rd_csv(const std::string& path, const std::vector<RDCurve>& curves) {
  std::ofstream out(path);
  out << format_rd_csv(curves);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + path + "'");
}

BdTable bd_rate_table(const std::vector<RDCurve>& tests, const std::vector<RDCurve>& anchors, BdMethod method) {
  require(!anchors.empty(), ErrorCode::kEvaluation, "no anchor curves");
  auto split = [](const std::string& label) {
    const auto slash = label.find('/');
    if (slash == std::string::npos) return std::pair<std::string, std::string>{label, ""};
    return std::pair<std::string, std::string>{label.substr(0, slash), label.substr(slash + 1)};
  };
  BdTable table;
  auto slot = [](std::vector<std::string>& v, const std::string& s) {
    auto it = std::find(v.begin(), v.end(), s);
    if (it != v.end()) return static_cast<std::size_t>(it - v.begin());
    v.push_back(s);
    return v.size() - 1;
  };
  struct Cell {
    std::size_t method, dataset;
    double value;
  };
  std::vector<Cell> cells;
  for (const auto& t : tests) {
    const auto [method_name, dataset] = split(t.label);
    const RDCurve* anchor = nullptr;
    for (const auto& a : anchors)
      if (a.label == t.label) anchor = &a;
    if (anchor == nullptr) {
      std::vector<const RDCurve*> same;
      for (const auto& a : anchors)
        if (split(a.label).second == dataset) same.push_back(&a);
      if (same.size() == 1) anchor = same.front();
    }
    if (anchor == nullptr && anchors.size() == 1) anchor = &anchors.front();
    require(anchor != nullptr, ErrorCode::kEvaluation, "no unambiguous anchor for '" + t.label + "'");
    cells.push_back({slot(table.methods, method_name), slot(table.datasets, dataset), bd_rate(t, *anchor, method)});
  }
  table.percent.assign(table.methods.size(),
                       std::vector<double>(table.datasets.size(), std::numeric_limits<double>::quiet_NaN()));
  for (const auto& c : cells) table.percent[c.method][c.dataset] = c.value;
  return table;
}

std::string BdTable::to_string() const {
  std::size_t w0 = 6;
  for (const auto& m : methods) w0 = std::max(w0, m.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(w0)) << "method";
  for (const auto& d : datasets) os << "  " << std::right << std::setw(10) << (d.empty() ? "BD-rate" : d);
  os << '\n';
  for (std::size_t i = 0; i < methods.size(); ++i) {
    os << std::left << std::setw(static_cast<int>(w0)) << methods[i];
    for (std::size_t j = 0; j < datasets.size(); ++j) {
      std::ostringstream cell;
      if (std::isnan(percent[i][j])) {
        cell << "-";
      } else {
        // Print -0.0 as 0.0.
        const double v = std::abs(percent[i][j]) < 0.005 ? 0.0 : percent[i][j];
        cell << std::fixed << std::setprecision(2) << v << '%';
      }
      os << "  " << std::right << std::setw(10) << cell.str();
    }
    os << '\n';
  }
  return os.str();
}

EvalResult eval_model(const std::vector<std::string>& checkpoints, const std::vector<VideoSequence>& sequences,
                      int gop, const std::string& label) {
  require(!checkpoints.empty(), ErrorCode::kEvaluation, "eval needs at least one checkpoint");
  require(!sequences.empty(), ErrorCode::kEvaluation, "eval needs at least one sequence");
  EvalResult out;
  out.curve.label = label;
  std::string architecture;
  for (const auto& path : checkpoints) {
    auto ck = load_checkpoint(path);
    const auto echo = ck.model->config().echo();
    if (architecture.empty()) architecture = echo;
    require(echo == architecture, ErrorCode::kEvaluation,
            "checkpoint '" + path + "' has a different codec configuration from '" + checkpoints.front() + "'");
    double bits = 0, pixels = 0, psnr_sum = 0, actual = 0, estimated = 0;
    std::size_t frames = 0;
    for (const auto& seq : sequences) {
      const auto enc = encode_sequence(seq, make_gop(seq, gop), *ck.model);
      bits += 8.0 * static_cast<double>(enc.bytes.size());
      pixels += static_cast<double>(seq.size()) * seq.frames.front().height() * seq.frames.front().width();
      for (const auto& f : enc.frames) {
        psnr_sum += f.psnr_db;
        ++frames;
        if (f.type == 'P') {
          actual += 8.0 * static_cast<double>(f.mv_bytes + f.res_bytes);
          estimated += f.estimated_bits_mv + f.estimated_bits_res;
        }
      }
    }
    out.curve.points.push_back({bits / pixels, psnr_sum / static_cast<double>(frames), ck.config.get_real("loss.lambda")});
    out.actual_p_bits.push_back(actual);
    out.estimated_p_bits.push_back(estimated);
    out.checkpoints.push_back(path);
  }
  out.curve.sort_by_bpp();
  return out;
}

}  // namespace uncodec
