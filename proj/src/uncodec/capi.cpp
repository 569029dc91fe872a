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

#include "uncodec/uncodec.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "uncodec/checkpoint.hpp"
#include "uncodec/config.hpp"
#include "uncodec/error.hpp"
#include "uncodec/evaluation.hpp"
#include "uncodec/plot.hpp"
#include "uncodec/sequence_codec.hpp"
#include "uncodec/synthetic.hpp"
#include "uncodec/training.hpp"
#include "uncodec/uncertainty.hpp"

struct uncodec_config {
  uncodec::Config config;
};

struct uncodec_model {
  uncodec::Config config;
  uncodec::CodecModel model{nullptr};
};

namespace {

namespace fs = std::filesystem;
using uncodec::ErrorCode;

thread_local std::string g_last_error;

template <typename F>
uncodec_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return UNCODEC_OK;
  } catch (const uncodec::Error& e) {
    g_last_error = e.what();
    return static_cast<uncodec_status>(static_cast<int>(e.code()));
  } catch (const c10::Error& e) {
    g_last_error = std::string("tensor library error: ") + e.what_without_backtrace();
    return UNCODEC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return UNCODEC_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  uncodec::require(p != nullptr, ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

void copy_out(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed != nullptr) *needed = s.size() + 1;
  if (buf == nullptr && cap == 0) return;
  need(buf, "buf");
  uncodec::require(cap >= s.size() + 1, ErrorCode::kInvalidArgument,
                   "buffer too small: need " + std::to_string(s.size() + 1) + " bytes");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

void emit(uncodec_log_fn log, void* user, const std::string& line) {
  if (log != nullptr) log(line.c_str(), user);
}

std::vector<uncodec::VideoSequence> load_corpus(const std::string& dir, int max_frames) {
  uncodec::require(fs::is_directory(dir), ErrorCode::kIo, "no such directory '" + dir + "'");
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) subdirs.push_back(e.path());
  std::sort(subdirs.begin(), subdirs.end());
  std::vector<uncodec::VideoSequence> out;
  if (subdirs.empty()) {
    out.push_back(uncodec::load_frames(dir, max_frames));
  } else {
    for (const auto& d : subdirs) out.push_back(uncodec::load_frames(d.string(), max_frames));
  }
  return out;
}

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  uncodec::require(static_cast<bool>(in), ErrorCode::kIo, "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

extern "C" {

const char* uncodec_last_error(void) { return g_last_error.c_str(); }

const char* uncodec_version(void) { return "1.0.0"; }

uncodec_status uncodec_config_create(uncodec_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new uncodec_config{};
  });
}

uncodec_status uncodec_config_load(const char* path, uncodec_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new uncodec_config{uncodec::Config::from_file(path)};
  });
}

uncodec_status uncodec_config_set(uncodec_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    cfg->config.set(key, value);
  });
}

uncodec_status uncodec_config_apply(uncodec_config* cfg, const char* assignment) {
  return guarded([&] {
    need(cfg, "cfg");
    need(assignment, "assignment");
    cfg->config.apply_override(assignment);
  });
}

uncodec_status uncodec_config_get(const uncodec_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(cfg, "cfg");
    need(key, "key");
    copy_out(cfg->config.raw(key), buf, cap, needed);
  });
}

uncodec_status uncodec_config_dump(const uncodec_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(cfg, "cfg");
    copy_out(cfg->config.dump(), buf, cap, needed);
  });
}

uncodec_status uncodec_describe_keys(char* buf, size_t cap, size_t* needed) {
  return guarded([&] { copy_out(uncodec::describe_config_keys(), buf, cap, needed); });
}

void uncodec_config_free(uncodec_config* cfg) { delete cfg; }

uncodec_status uncodec_model_create(const uncodec_config* cfg, uncodec_model** out) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out, "out");
    torch::manual_seed(static_cast<uint64_t>(cfg->config.get_int("seed")));
    auto m = std::make_unique<uncodec_model>();
    m->config = cfg->config;
    m->model = uncodec::CodecModel(uncodec::CodecConfig::from_config(cfg->config));
    m->model->eval();
    *out = m.release();
  });
}

uncodec_status uncodec_model_load(const char* path, uncodec_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto ck = uncodec::load_checkpoint(path);
    *out = new uncodec_model{ck.config, ck.model};
  });
}

uncodec_status uncodec_model_save(const uncodec_model* model, const char* dir) {
  return guarded([&] {
    need(model, "model");
    need(dir, "dir");
    uncodec::save_checkpoint(dir, *model->model, model->config);
  });
}

uncodec_status uncodec_model_info_get(const uncodec_model* model, uncodec_model_info* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    out->h = model->model->config().h;
    out->channels = model->model->config().channels;
    out->parameters = uncodec::count_parameters(model->model->parameters());
    out->model_id = model->model->model_id();
  });
}

uncodec_status uncodec_model_size_report(const uncodec_model* model, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(model, "model");
    copy_out(model->model->size_report().to_string(), buf, cap, needed);
  });
}

uncodec_status uncodec_model_config(const uncodec_model* model, uncodec_config** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = new uncodec_config{model->config};
  });
}

void uncodec_model_free(uncodec_model* model) { delete model; }

uncodec_status uncodec_train(const uncodec_config* cfg, const char* out_dir, uncodec_log_fn log, void* user) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out_dir, "out_dir");
    const int64_t every = cfg->config.get_int("train.log_every");
    uncodec::train(cfg->config, out_dir, [&](const uncodec::StepStats& s) {
      if ((s.step + 1) % every != 0) return;
      std::ostringstream os;
      os << "step " << s.step + 1 << (s.phase2 ? " [rd]" : " [warm-up]") << " loss=" << s.loss
         << " bpp_mv=" << s.bpp_mv << " bpp_res=" << s.bpp_res << " psnr=" << s.psnr_db << " lr=" << s.lr;
      emit(log, user, os.str());
    });
  });
}

uncodec_status uncodec_ablate(const uncodec_config* cfg, const int* hs, size_t n_h, const int* ks, size_t n_k,
                              const int* fgsm_modes, size_t n_fgsm, int use_config_lambda, const char* out_dir,
                              uncodec_log_fn log, void* user) {
  return guarded([&] {
    need(cfg, "cfg");
    need(hs, "hs");
    need(ks, "ks");
    need(fgsm_modes, "fgsm_modes");
    need(out_dir, "out_dir");
    std::vector<int> h(hs, hs + n_h), k(ks, ks + n_k);
    std::vector<bool> f;
    for (size_t i = 0; i < n_fgsm; ++i) f.push_back(fgsm_modes[i] != 0);
    const auto lambdas = use_config_lambda ? std::vector<double>{cfg->config.get_real("loss.lambda")}
                                           : cfg->config.get_real_list("eval.lambdas");
    fs::create_directories(out_dir);
    uncodec::ablate(cfg->config, h, k, f, lambdas, out_dir, [&](const std::string& line) { emit(log, user, line); });
  });
}

uncodec_status uncodec_encode_directory(uncodec_model* model, const char* frames_dir, int gop, int max_frames,
                                        const char* out_path, const char* recon_dir,
                                        uncodec_coding_summary* summary) {
  return guarded([&] {
    need(model, "model");
    need(frames_dir, "frames_dir");
    need(out_path, "out_path");
    uncodec::require(gop >= 1, ErrorCode::kConfig, "GoP size must be >= 1");
    const auto seq = uncodec::load_frames(frames_dir, max_frames);
    const auto enc = uncodec::encode_sequence(seq, uncodec::make_gop(seq, gop), *model->model);
    std::ofstream out(out_path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(enc.bytes.data()), static_cast<std::streamsize>(enc.bytes.size()));
    uncodec::require(static_cast<bool>(out), ErrorCode::kIo, std::string("cannot write '") + out_path + "'");
    if (recon_dir != nullptr) uncodec::save_sequence(recon_dir, enc.reconstruction);
    if (summary != nullptr) *summary = {static_cast<uint32_t>(seq.size()), static_cast<uint32_t>(gop), enc.bytes.size(), enc.bpp, enc.psnr_db};
  });
}

uncodec_status uncodec_decode_file(uncodec_model* model, const char* in_path, const char* out_dir,
                                   uncodec_coding_summary* summary) {
  return guarded([&] {
    need(model, "model");
    need(in_path, "in_path");
    need(out_dir, "out_dir");
    const auto bytes = read_file(in_path);
    const auto seq = uncodec::decode_sequence(bytes, *model->model);
    uncodec::save_sequence(out_dir, seq);
    if (summary != nullptr) {
      const auto h = uncodec::read_sequence_header(bytes);
      *summary = {h.frame_count, h.gop_size, bytes.size(),
                  uncodec::sequence_bpp(8.0 * static_cast<double>(bytes.size()), static_cast<int>(h.frame_count),
                                        h.height, h.width),
                  std::nan("")};
    }
  });
}

uncodec_status uncodec_eval(const char* const* checkpoints, size_t n_checkpoints, const char* data_dir,
                            const uncodec_config* cfg, const char* label, const char* csv_path, const char* plot_path,
                            uncodec_log_fn log, void* user) {
  return guarded([&] {
    need(checkpoints, "checkpoints");
    uncodec::require(n_checkpoints >= 1, ErrorCode::kEvaluation, "eval needs at least one checkpoint");
    std::vector<std::string> paths;
    for (size_t i = 0; i < n_checkpoints; ++i) {
      need(checkpoints[i], "checkpoint path");
      paths.emplace_back(checkpoints[i]);
    }
    uncodec::Config config = cfg != nullptr ? cfg->config : uncodec::load_checkpoint(paths.front()).config;
    const auto sequences = data_dir != nullptr
                               ? load_corpus(data_dir, static_cast<int>(config.get_int("data.max_frames")))
                               : uncodec::load_held_out_data(config);
    const auto result = uncodec::eval_model(paths, sequences, static_cast<int>(config.get_int("data.gop")),
                                            label != nullptr ? label : "model");
    for (size_t i = 0; i < result.checkpoints.size(); ++i) {
      std::ostringstream os;
      os << result.checkpoints[i] << ": P-frame bits actual=" << result.actual_p_bits[i]
         << " estimated=" << result.estimated_p_bits[i];
      emit(log, user, os.str());
    }
    for (const auto& p : result.curve.points) {
      std::ostringstream os;
      os << "lambda=" << p.lambda << " bpp=" << p.bpp << " psnr=" << p.psnr_db;
      emit(log, user, os.str());
    }
    if (!result.curve.psnr_monotone()) emit(log, user, "warning: PSNR decreases with rate on this curve");
    if (csv_path != nullptr) uncodec::write_rd_csv(csv_path, {result.curve});
    if (plot_path != nullptr) uncodec::write_rd_plot(plot_path, {result.curve});
  });
}

uncodec_status uncodec_bd_rate(const double* test_bpp, const double* test_psnr, size_t n_test,
                               const double* anchor_bpp, const double* anchor_psnr, size_t n_anchor,
                               uncodec_bd_method method, double* percent) {
  return guarded([&] {
    need(test_bpp, "test_bpp");
    need(test_psnr, "test_psnr");
    need(anchor_bpp, "anchor_bpp");
    need(anchor_psnr, "anchor_psnr");
    need(percent, "percent");
    uncodec::RDCurve t{"test", {}}, a{"anchor", {}};
    for (size_t i = 0; i < n_test; ++i) t.points.push_back({test_bpp[i], test_psnr[i], 0});
    for (size_t i = 0; i < n_anchor; ++i) a.points.push_back({anchor_bpp[i], anchor_psnr[i], 0});
    t.sort_by_bpp();
    a.sort_by_bpp();
    *percent = uncodec::bd_rate(t, a, method == UNCODEC_BD_PCHIP ? uncodec::BdMethod::kPchip : uncodec::BdMethod::kCubic);
  });
}

uncodec_status uncodec_bd_rate_csv(const char* test_csv, const char* anchor_csv, uncodec_bd_method method, char* buf,
                                   size_t cap, size_t* needed) {
  return guarded([&] {
    need(test_csv, "test_csv");
    need(anchor_csv, "anchor_csv");
    const auto table = uncodec::bd_rate_table(
        uncodec::read_rd_csv(test_csv), uncodec::read_rd_csv(anchor_csv),
        method == UNCODEC_BD_PCHIP ? uncodec::BdMethod::kPchip : uncodec::BdMethod::kCubic);
    copy_out(table.to_string(), buf, cap, needed);
  });
}

uncodec_status uncodec_plot_csv(const char* const* csv_paths, size_t n, const char* plot_path) {
  return guarded([&] {
    need(csv_paths, "csv_paths");
    need(plot_path, "plot_path");
    std::vector<uncodec::RDCurve> curves;
    for (size_t i = 0; i < n; ++i) {
      need(csv_paths[i], "csv path");
      auto c = uncodec::read_rd_csv(csv_paths[i]);
      curves.insert(curves.end(), c.begin(), c.end());
    }
    uncodec::write_rd_plot(plot_path, curves);
  });
}

uncodec_status uncodec_viz_uncertainty(uncodec_model* model, const char* kind, const char* frame_ref,
                                       const char* frame_cur, const char* out_dir, const uncodec_config* cfg,
                                       double* mean_value) {
  return guarded([&] {
    need(model, "model");
    need(kind, "kind");
    need(frame_ref, "frame_ref");
    need(frame_cur, "frame_cur");
    need(out_dir, "out_dir");
    const uncodec::Config& c = cfg != nullptr ? cfg->config : model->config;
    const int channels = model->model->config().channels;
    const auto ref = uncodec::load_frame(frame_ref, channels);
    const auto cur = uncodec::load_frame(frame_cur, channels);
    uncodec::require(ref.data.sizes() == cur.data.sizes(), ErrorCode::kInvalidArgument, "frames differ in size");
    const std::string k = kind;
    uncodec::HeatMap map;
    if (k == "aleatoric") {
      map = uncodec::aleatoric_map(*model->model, cur.data, ref.data, uncodec::parse_flow_norm(c.get_string("viz.norm")),
                                   c.get_real("viz.gap_threshold"), c.get_real("viz.fraction"));
    } else if (k == "epistemic") {
      map = uncodec::epistemic_map(*model->model, cur.data, ref.data);
    } else if (k == "predictive") {
      map = uncodec::predictive_map(*model->model, cur.data, ref.data);
    } else {
      uncodec::fail(ErrorCode::kConfig, "unknown map kind '" + k + "' (aleatoric, epistemic or predictive)");
    }
    fs::create_directories(out_dir);
    const auto base = fs::path(out_dir);
    uncodec::write_heatmap_png((base / (k + ".png")).string(), map);
    uncodec::write_heatmap_raw(
        (base / (k + "_" + std::to_string(map.width()) + "x" + std::to_string(map.height()) + ".f32")).string(), map);
    if (mean_value != nullptr) *mean_value = map.mean();
  });
}

uncodec_status uncodec_generate_synthetic(const uncodec_config* cfg, const char* out_dir) {
  return guarded([&] {
    need(cfg, "cfg");
    need(out_dir, "out_dir");
    const auto& c = cfg->config;
    uncodec::SyntheticParams p;
    p.height = static_cast<int>(c.get_int("synth.height"));
    p.width = static_cast<int>(c.get_int("synth.width"));
    p.frames = static_cast<int>(c.get_int("synth.frames"));
    p.shapes = static_cast<int>(c.get_int("synth.shapes"));
    p.max_speed = c.get_real("synth.max_speed");
    const auto corpus = uncodec::generate_corpus(p, static_cast<int>(c.get_int("synth.sequences")),
                                                 uncodec::resolve_data_seed(c));
    for (const auto& seq : corpus) uncodec::save_sequence((fs::path(out_dir) / seq.name).string(), seq);
  });
}

}  // extern "C"
