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

// uncodec: command-line front end over the C API.

#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uncodec/uncodec.h"

namespace {

struct Failure {
  uncodec_status status;
};

void check(uncodec_status s) {
  if (s != UNCODEC_OK) throw Failure{s};
}

std::string fetch(uncodec_status (*fn)(char*, size_t, size_t*)) {
  size_t need = 0;
  check(fn(nullptr, 0, &need));
  std::string s(need, '\0');
  check(fn(s.data(), s.size(), nullptr));
  s.resize(need - 1);
  return s;
}

std::string key_help() {
  return fetch([](char* b, size_t c, size_t* n) { return uncodec_describe_keys(b, c, n); });
}

void print_line(const char* line, void*) {
  std::fprintf(stderr, "%s\n", line);
  std::fflush(stderr);
}

// Owns a config assembled from an optional file plus --set overrides.
struct ConfigArgs {
  std::string path;
  std::vector<std::string> sets;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", path, "flat key=value configuration file");
    cmd->add_option("--set", sets, "override, key=value (repeatable)")->expected(1, -1);
  }
  uncodec_config* build() const {
    uncodec_config* cfg = nullptr;
    check(path.empty() ? uncodec_config_create(&cfg) : uncodec_config_load(path.c_str(), &cfg));
    for (const auto& s : sets) {
      const auto st = uncodec_config_apply(cfg, s.c_str());
      if (st != UNCODEC_OK) {
        uncodec_config_free(cfg);
        throw Failure{st};
      }
    }
    return cfg;
  }
};

struct ConfigHandle {
  uncodec_config* p;
  explicit ConfigHandle(uncodec_config* c) : p(c) {}
  ~ConfigHandle() { uncodec_config_free(p); }
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
};

struct ModelHandle {
  uncodec_model* p = nullptr;
  explicit ModelHandle(const std::string& path) { check(uncodec_model_load(path.c_str(), &p)); }
  explicit ModelHandle(uncodec_config* cfg) { check(uncodec_model_create(cfg, &p)); }
  ~ModelHandle() { uncodec_model_free(p); }
  ModelHandle(const ModelHandle&) = delete;
  ModelHandle& operator=(const ModelHandle&) = delete;
};

std::vector<int> parse_ints(const std::string& list) {
  std::vector<int> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      std::fprintf(stderr, "error: '%s' is not an integer list\n", list.c_str());
      throw Failure{UNCODEC_ERR_CONFIG};
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uncodec: learned video codec with ensemble decoders"};
  app.require_subcommand(1);
  app.footer(key_help());
  const std::string keys = key_help();

  // train
  ConfigArgs train_cfg;
  std::string train_out = "runs/train";
  auto* train = app.add_subcommand("train", "train a P-frame model");
  train_cfg.attach(train);
  train->add_option("--out", train_out, "output directory (metrics, checkpoints)");
  train->footer(keys);

  // encode / decode
  std::string enc_in, enc_ckpt, enc_out, enc_recon;
  int enc_gop = -1, enc_max = -1;
  auto* encode = app.add_subcommand("encode", "encode a directory of PNG frames");
  encode->add_option("--input", enc_in, "frame directory")->required();
  encode->add_option("--checkpoint", enc_ckpt, "checkpoint directory or model.bin")->required();
  encode->add_option("--out", enc_out, "output bitstream")->required();
  encode->add_option("--gop", enc_gop, "GoP size (default: checkpoint data.gop)");
  encode->add_option("--max-frames", enc_max, "frames to code (default: checkpoint data.max_frames)");
  encode->add_option("--recon", enc_recon, "write encoder-side reconstructions here");
  encode->footer(keys);

  std::string dec_in, dec_ckpt, dec_out;
  auto* decode = app.add_subcommand("decode", "decode a bitstream to PNG frames");
  decode->add_option("--input", dec_in, "bitstream")->required();
  decode->add_option("--checkpoint", dec_ckpt, "checkpoint directory or model.bin")->required();
  decode->add_option("--out", dec_out, "output frame directory")->required();
  decode->footer(keys);

  // eval
  ConfigArgs eval_cfg;
  std::vector<std::string> eval_ckpts;
  std::string eval_data, eval_label = "model", eval_csv = "rd.csv", eval_plot;
  auto* eval = app.add_subcommand("eval", "RD points from real bitstreams, one per checkpoint");
  eval->add_option("--checkpoints", eval_ckpts, "one checkpoint per rate point")->required()->expected(1, -1);
  eval->add_option("--data", eval_data, "frame directory or directory of them (default: held-out synthetic)");
  eval->add_option("--label", eval_label, "curve label in the CSV");
  eval->add_option("--csv", eval_csv, "CSV output (label,lambda,bpp,psnr_db)");
  eval->add_option("--out", eval_plot, "RD plot image (PNG)");
  eval_cfg.attach(eval);
  eval->footer(keys);

  // bdrate
  std::string bd_test, bd_anchor, bd_method = "cubic", bd_plot;
  auto* bdrate = app.add_subcommand("bdrate", "BD-rate of test curves against anchor curves");
  bdrate->add_option("test", bd_test, "test CSV")->required();
  bdrate->add_option("anchor", bd_anchor, "anchor CSV")->required();
  bdrate->add_option("--method", bd_method, "cubic or pchip")->check(CLI::IsMember({"cubic", "pchip"}));
  bdrate->add_option("--out", bd_plot, "also plot both files' curves to this PNG");
  bdrate->footer(keys);

  // viz-uncertainty
  ConfigArgs viz_cfg;
  std::string viz_kind, viz_ckpt, viz_out;
  std::vector<std::string> viz_frames;
  auto* viz = app.add_subcommand("viz-uncertainty", "aleatoric, epistemic or predictive uncertainty map");
  viz->add_option("--kind", viz_kind, "map kind")->required()->check(
      CLI::IsMember({"aleatoric", "epistemic", "predictive"}));
  viz->add_option("--frames", viz_frames, "reference frame, then current frame")->required()->expected(2);
  viz->add_option("--checkpoint", viz_ckpt, "checkpoint directory or model.bin")->required();
  viz->add_option("--out", viz_out, "output directory")->required();
  viz_cfg.attach(viz);
  viz->footer(keys);

  // ablate
  ConfigArgs abl_cfg;
  std::string abl_h = "1,2,4", abl_k = "1", abl_fgsm = "1", abl_out = "runs/ablate";
  bool abl_single = false;
  auto* abl = app.add_subcommand("ablate", "train and compare a grid of (h, k, fgsm) models");
  abl->add_option("--h-list", abl_h, "ensemble sizes, comma-separated");
  abl->add_option("--k-list", abl_k, "k values, comma-separated (cells with k > h are skipped)");
  abl->add_option("--fgsm-list", abl_fgsm, "FGSM modes, comma-separated 0/1");
  abl->add_flag("--single-lambda", abl_single, "train at loss.lambda only (no BD-rate column)");
  abl->add_option("--out", abl_out, "output directory");
  abl_cfg.attach(abl);
  abl->footer(keys);

  // gen-synthetic
  ConfigArgs gen_cfg;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-synthetic", "write the synthetic moving-shapes corpus as PNG frames");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen_cfg.attach(gen);
  gen->footer(keys);

  // info
  ConfigArgs info_cfg;
  std::string info_ckpt;
  auto* info = app.add_subcommand("info", "model size report for a checkpoint or a configuration");
  info->add_option("--checkpoint", info_ckpt, "checkpoint directory or model.bin");
  info_cfg.attach(info);
  info->footer(keys);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return UNCODEC_ERR_CONFIG;
  }

  try {
    if (train->parsed()) {
      ConfigHandle cfg(train_cfg.build());
      check(uncodec_train(cfg.p, train_out.c_str(), print_line, nullptr));
      std::printf("trained model written under %s/ckpt\n", train_out.c_str());
    } else if (encode->parsed()) {
      ModelHandle model(enc_ckpt);
      uncodec_config* raw = nullptr;
      check(uncodec_model_config(model.p, &raw));
      ConfigHandle cfg(raw);
      auto get_int = [&](const char* key) {
        char buf[64];
        check(uncodec_config_get(cfg.p, key, buf, sizeof buf, nullptr));
        return std::stoi(buf);
      };
      const int gop = enc_gop > 0 ? enc_gop : get_int("data.gop");
      const int max_frames = enc_max >= 0 ? enc_max : get_int("data.max_frames");
      uncodec_coding_summary s{};
      check(uncodec_encode_directory(model.p, enc_in.c_str(), gop, max_frames, enc_out.c_str(),
                                     enc_recon.empty() ? nullptr : enc_recon.c_str(), &s));
      std::printf("frames=%u gop=%u bytes=%llu bpp=%.6f psnr=%.4f dB\n", s.frames, s.gop,
                  static_cast<unsigned long long>(s.bytes), s.bpp, s.psnr_db);
    } else if (decode->parsed()) {
      ModelHandle model(dec_ckpt);
      uncodec_coding_summary s{};
      check(uncodec_decode_file(model.p, dec_in.c_str(), dec_out.c_str(), &s));
      std::printf("frames=%u gop=%u bytes=%llu bpp=%.6f\n", s.frames, s.gop,
                  static_cast<unsigned long long>(s.bytes), s.bpp);
    } else if (eval->parsed()) {
      const bool own_cfg = !eval_cfg.path.empty() || !eval_cfg.sets.empty();
      ConfigHandle cfg(own_cfg ? eval_cfg.build() : nullptr);
      std::vector<const char*> paths;
      for (const auto& c : eval_ckpts) paths.push_back(c.c_str());
      check(uncodec_eval(paths.data(), paths.size(), eval_data.empty() ? nullptr : eval_data.c_str(), cfg.p,
                         eval_label.c_str(), eval_csv.c_str(), eval_plot.empty() ? nullptr : eval_plot.c_str(),
                         print_line, nullptr));
      std::printf("wrote %s\n", eval_csv.c_str());
    } else if (bdrate->parsed()) {
      const auto method = bd_method == "pchip" ? UNCODEC_BD_PCHIP : UNCODEC_BD_CUBIC;
      size_t need = 0;
      check(uncodec_bd_rate_csv(bd_test.c_str(), bd_anchor.c_str(), method, nullptr, 0, &need));
      std::string table(need, '\0');
      check(uncodec_bd_rate_csv(bd_test.c_str(), bd_anchor.c_str(), method, table.data(), table.size(), nullptr));
      std::fputs(table.c_str(), stdout);
      if (!bd_plot.empty()) {
        const char* files[] = {bd_test.c_str(), bd_anchor.c_str()};
        check(uncodec_plot_csv(files, 2, bd_plot.c_str()));
      }
    } else if (viz->parsed()) {
      ModelHandle model(viz_ckpt);
      const bool own_cfg = !viz_cfg.path.empty() || !viz_cfg.sets.empty();
      ConfigHandle cfg(own_cfg ? viz_cfg.build() : nullptr);
      double mean = 0;
      check(uncodec_viz_uncertainty(model.p, viz_kind.c_str(), viz_frames[0].c_str(), viz_frames[1].c_str(),
                                    viz_out.c_str(), cfg.p, &mean));
      std::printf("%s map written to %s (mean %.6g)\n", viz_kind.c_str(), viz_out.c_str(), mean);
    } else if (abl->parsed()) {
      ConfigHandle cfg(abl_cfg.build());
      const auto hs = parse_ints(abl_h), ks = parse_ints(abl_k), fg = parse_ints(abl_fgsm);
      check(uncodec_ablate(cfg.p, hs.data(), hs.size(), ks.data(), ks.size(), fg.data(), fg.size(),
                           abl_single ? 1 : 0, abl_out.c_str(), print_line, nullptr));
      std::printf("ablation tables written to %s\n", abl_out.c_str());
    } else if (gen->parsed()) {
      ConfigHandle cfg(gen_cfg.build());
      check(uncodec_generate_synthetic(cfg.p, gen_out.c_str()));
      std::printf("synthetic corpus written to %s\n", gen_out.c_str());
    } else if (info->parsed()) {
      std::unique_ptr<ModelHandle> model;
      if (!info_ckpt.empty()) {
        model = std::make_unique<ModelHandle>(info_ckpt);
      } else {
        ConfigHandle cfg(info_cfg.build());
        model = std::make_unique<ModelHandle>(cfg.p);
      }
      size_t need = 0;
      check(uncodec_model_size_report(model->p, nullptr, 0, &need));
      std::string report(need, '\0');
      check(uncodec_model_size_report(model->p, report.data(), report.size(), nullptr));
      std::fputs(report.c_str(), stdout);
    }
  } catch (const Failure& f) {
    const char* msg = uncodec_last_error();
    if (*msg != '\0') std::fprintf(stderr, "error: %s\n", msg);
    return static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return UNCODEC_ERR_INTERNAL;
  }
  return 0;
}
