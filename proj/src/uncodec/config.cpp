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

#include "uncodec/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "uncodec/error.hpp"

namespace uncodec {
namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

bool parse_int(const std::string& s, int64_t* out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc() && ptr == last;
}

// Reals accept plain decimals and simple fractions such as "4/255".
bool parse_real(const std::string& s, double* out) {
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    double num = 0.0, den = 0.0;
    if (!parse_real(trim(s.substr(0, slash)), &num) || !parse_real(trim(s.substr(slash + 1)), &den)) return false;
    if (den == 0.0) return false;
    *out = num / den;
    return true;
  }
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    *out = std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size() && std::isfinite(*out);
}

bool parse_bool(const std::string& s, bool* out) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") {
    *out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "off" || s == "no") {
    *out = false;
    return true;
  }
  return false;
}

const KeySpec* find_key(const std::string& key) {
  for (const auto& spec : config_keys())
    if (spec.key == key) return &spec;
  return nullptr;
}

std::string validate(const KeySpec& spec, const std::string& value) {
  switch (spec.type) {
    case ValueType::kInt: {
      int64_t v = 0;
      if (!parse_int(value, &v)) fail(ErrorCode::kConfig, spec.key + ": expected an integer, got '" + value + "'");
      return std::to_string(v);
    }
    case ValueType::kReal: {
      double v = 0;
      if (!parse_real(value, &v)) fail(ErrorCode::kConfig, spec.key + ": expected a real number, got '" + value + "'");
      return value;
    }
    case ValueType::kBool: {
      bool v = false;
      if (!parse_bool(value, &v)) fail(ErrorCode::kConfig, spec.key + ": expected true/false, got '" + value + "'");
      return v ? "true" : "false";
    }
    case ValueType::kChoice:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end())
        fail(ErrorCode::kConfig, spec.key + ": '" + value + "' is not one of the accepted values");
      return value;
    case ValueType::kList: {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        double v = 0;
        if (!parse_real(trim(item), &v)) fail(ErrorCode::kConfig, spec.key + ": bad list element '" + item + "'");
      }
      return value;
    }
    case ValueType::kString:
      return value;
  }
  return value;
}

}  // namespace

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = {
      {"seed", ValueType::kInt, "0", "master seed; all randomness derives from it", {}},
      {"data.path", ValueType::kString, "", "frame directory (or directory of sequence directories); empty = synthetic corpus", {}},
      {"data.crop", ValueType::kInt, "64", "square training crop size in pixels", {}},
      {"data.gop", ValueType::kInt, "10", "GoP size used by encode/eval", {}},
      {"data.max_frames", ValueType::kInt, "100", "frames loaded per sequence", {}},
      {"data.seed", ValueType::kInt, "-1", "data sampling seed; -1 derives it from `seed`", {}},
      {"synth.sequences", ValueType::kInt, "32", "synthetic corpus: number of clips", {}},
      {"synth.frames", ValueType::kInt, "8", "synthetic corpus: frames per clip", {}},
      {"synth.height", ValueType::kInt, "64", "synthetic corpus: frame height", {}},
      {"synth.width", ValueType::kInt, "64", "synthetic corpus: frame width", {}},
      {"synth.shapes", ValueType::kInt, "2", "synthetic corpus: moving rectangles per clip", {}},
      {"synth.max_speed", ValueType::kReal, "3", "synthetic corpus: max per-frame displacement in pixels", {}},
      {"codec.h", ValueType::kInt, "4", "ensemble members per decoder", {}},
      {"codec.latent_channels_mv", ValueType::kInt, "64", "MV latent channels", {}},
      {"codec.latent_channels_res", ValueType::kInt, "96", "residual latent channels", {}},
      {"codec.hidden_channels", ValueType::kInt, "128", "auto-encoder hidden width", {}},
      {"codec.backbone_channels", ValueType::kInt, "64", "ensemble decoder backbone output width", {}},
      {"codec.branch_channels", ValueType::kInt, "32", "ensemble branch hidden width", {}},
      {"codec.motion_channels", ValueType::kInt, "32", "motion network width", {}},
      {"codec.motion_levels", ValueType::kInt, "3", "motion network pyramid levels", {}},
      {"codec.refine_channels", ValueType::kInt, "64", "refine net width", {}},
      {"codec.tail_mass", ValueType::kReal, "1e-9", "entropy model tail mass", {}},
      {"codec.max_support", ValueType::kInt, "4096", "max symbols per channel in the coded CDF tables", {}},
      {"loss.k", ValueType::kInt, "1", "ensemble-aware loss order statistic (1..h)", {}},
      {"loss.clip_mode", ValueType::kChoice, "route_to_kth", "ensemble-aware gradient semantics", {"route_to_kth", "detach_clipped"}},
      {"loss.lambda", ValueType::kReal, "1024", "rate-distortion trade-off", {}},
      {"fgsm.enabled", ValueType::kBool, "true", "adversarial perturbation of training frames", {}},
      {"fgsm.epsilon", ValueType::kReal, "4/255", "FGSM step size", {}},
      {"fgsm.scope", ValueType::kChoice, "both", "perturb the frame as input and target, or input only", {"both", "input_only"}},
      {"train.warmup_steps", ValueType::kInt, "2000", "motion warm-up steps (phase 1)", {}},
      {"train.total_steps", ValueType::kInt, "20000", "total optimizer steps", {}},
      {"train.lr_initial", ValueType::kReal, "1e-4", "learning rate before the decay step", {}},
      {"train.lr_decayed", ValueType::kReal, "1e-5", "learning rate from the decay step on", {}},
      {"train.lr_decay_step", ValueType::kInt, "16000", "step at which the learning rate drops", {}},
      {"train.batch", ValueType::kInt, "8", "crop pairs per step", {}},
      {"train.weight_decay", ValueType::kReal, "1e-4", "AdamW decoupled weight decay", {}},
      {"train.grad_clip", ValueType::kReal, "1", "global gradient-norm clip (0 disables)", {}},
      {"train.checkpoint_every", ValueType::kInt, "5000", "checkpoint period in steps (0 = final only)", {}},
      {"train.log_every", ValueType::kInt, "100", "metrics CSV period in steps", {}},
      {"train.ema_window", ValueType::kInt, "200", "loss EMA window in steps", {}},
      {"eval.lambdas", ValueType::kList, "256,512,1024,2048", "rate points for eval/ablate BD-rate", {}},
      {"eval.pairs", ValueType::kInt, "64", "held-out crop pairs for RD-loss evaluation", {}},
      {"viz.norm", ValueType::kChoice, "l2", "aleatoric map flow distance", {"l2", "l1"}},
      {"viz.gap_threshold", ValueType::kReal, "0.1", "min quantization gap that receives a perturbation", {}},
      {"viz.fraction", ValueType::kReal, "0.2", "perturbation as a fraction of the quantization gap", {}},
  };
  return keys;
}

std::string describe_config_keys() {
  std::ostringstream os;
  os << "Configuration keys (flat key=value; override with --set key=value):\n";
  for (const auto& k : config_keys()) {
    os << "  " << k.key << " = " << (k.default_value.empty() ? "\"\"" : k.default_value);
    if (!k.choices.empty()) {
      os << "  {";
      for (std::size_t i = 0; i < k.choices.size(); ++i) os << (i ? "," : "") << k.choices[i];
      os << "}";
    }
    os << "\n      " << k.help << "\n";
  }
  return os.str();
}

Config::Config() {
  for (const auto& k : config_keys()) values_[k.key] = k.default_value;
}

Config Config::from_text(std::string_view text, const std::string& origin) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::kConfig, origin + ":" + std::to_string(lineno) + ": expected key=value");
    try {
      cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const Error& e) {
      fail(ErrorCode::kConfig, origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kConfig, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str(), path);
}

void Config::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (spec == nullptr) fail(ErrorCode::kConfig, "unknown config key '" + key + "'");
  values_[key] = validate(*spec, value);
}

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    fail(ErrorCode::kConfig, "override '" + std::string(assignment) + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCode::kConfig, "unknown config key '" + key + "'");
  return it->second;
}

int64_t Config::get_int(const std::string& key) const {
  int64_t v = 0;
  if (!parse_int(raw(key), &v)) fail(ErrorCode::kConfig, key + " is not an integer");
  return v;
}

double Config::get_real(const std::string& key) const {
  double v = 0;
  if (!parse_real(raw(key), &v)) fail(ErrorCode::kConfig, key + " is not a real number");
  return v;
}

bool Config::get_bool(const std::string& key) const {
  bool v = false;
  if (!parse_bool(raw(key), &v)) fail(ErrorCode::kConfig, key + " is not a boolean");
  return v;
}

std::vector<double> Config::get_real_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(raw(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0;
    if (!parse_real(trim(item), &v)) fail(ErrorCode::kConfig, key + ": bad list element '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string Config::dump() const {
  std::ostringstream os;
  for (const auto& k : config_keys()) os << k.key << "=" << values_.at(k.key) << "\n";
  return os.str();
}

}  // namespace uncodec
