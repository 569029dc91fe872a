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

#ifndef UNCODEC_UNCODEC_H_
#define UNCODEC_UNCODEC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(UNCODEC_BUILDING_LIBRARY)
#define UNCODEC_API __attribute__((visibility("default")))
#else
#define UNCODEC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as the command-line tool's exit codes. */
typedef enum uncodec_status {
  UNCODEC_OK = 0,
  UNCODEC_ERR_INTERNAL = 1,
  UNCODEC_ERR_CONFIG = 2,
  UNCODEC_ERR_DIVERGENCE = 3,
  UNCODEC_ERR_BITSTREAM = 4,
  UNCODEC_ERR_EVALUATION = 5,
  UNCODEC_ERR_IO = 6,
  UNCODEC_ERR_INVALID_ARGUMENT = 7
} uncodec_status;

typedef struct uncodec_config uncodec_config;
typedef struct uncodec_model uncodec_model;

/* Receives one human-readable progress line. */
typedef void (*uncodec_log_fn)(const char* line, void* user);

/* Message of the last failed call on this thread ("" if none). */
UNCODEC_API const char* uncodec_last_error(void);
UNCODEC_API const char* uncodec_version(void);

/* String outputs: the text plus NUL is copied into buf when it fits in cap.
   *needed (optional) receives the required size. buf may be NULL with cap 0
   to query the size. A short buffer yields UNCODEC_ERR_INVALID_ARGUMENT. */

/* Configuration: every key has a default; unknown keys are rejected. */
UNCODEC_API uncodec_status uncodec_config_create(uncodec_config** out);
UNCODEC_API uncodec_status uncodec_config_load(const char* path, uncodec_config** out);
UNCODEC_API uncodec_status uncodec_config_set(uncodec_config* cfg, const char* key, const char* value);
/* "key=value" */
UNCODEC_API uncodec_status uncodec_config_apply(uncodec_config* cfg, const char* assignment);
UNCODEC_API uncodec_status uncodec_config_get(const uncodec_config* cfg, const char* key, char* buf, size_t cap,
                                              size_t* needed);
UNCODEC_API uncodec_status uncodec_config_dump(const uncodec_config* cfg, char* buf, size_t cap, size_t* needed);
UNCODEC_API uncodec_status uncodec_describe_keys(char* buf, size_t cap, size_t* needed);
UNCODEC_API void uncodec_config_free(uncodec_config* cfg);

typedef struct uncodec_model_info {
  int32_t h;
  int32_t channels;
  int64_t parameters;
  uint32_t model_id;
} uncodec_model_info;

/* Fresh, randomly initialized model seeded by the config's `seed`. */
UNCODEC_API uncodec_status uncodec_model_create(const uncodec_config* cfg, uncodec_model** out);
/* `path` is a checkpoint directory or its model.bin. */
UNCODEC_API uncodec_status uncodec_model_load(const char* path, uncodec_model** out);
UNCODEC_API uncodec_status uncodec_model_save(const uncodec_model* model, const char* dir);
UNCODEC_API uncodec_status uncodec_model_info_get(const uncodec_model* model, uncodec_model_info* out);
UNCODEC_API uncodec_status uncodec_model_size_report(const uncodec_model* model, char* buf, size_t cap,
                                                     size_t* needed);
/* Copy of the configuration the model was created or trained with. */
UNCODEC_API uncodec_status uncodec_model_config(const uncodec_model* model, uncodec_config** out);
UNCODEC_API void uncodec_model_free(uncodec_model* model);

/* Training writes <out_dir>/metrics.csv, config.cfg and ckpt/step_%08d. */
UNCODEC_API uncodec_status uncodec_train(const uncodec_config* cfg, const char* out_dir, uncodec_log_fn log,
                                         void* user);

/* Ablation grid; fgsm_modes holds 0/1 values. Lambdas come from eval.lambdas
   unless use_config_lambda is set, in which case loss.lambda alone is used. */
UNCODEC_API uncodec_status uncodec_ablate(const uncodec_config* cfg, const int* hs, size_t n_h, const int* ks,
                                          size_t n_k, const int* fgsm_modes, size_t n_fgsm, int use_config_lambda,
                                          const char* out_dir, uncodec_log_fn log, void* user);

typedef struct uncodec_coding_summary {
  uint32_t frames;
  uint32_t gop;
  uint64_t bytes;
  double bpp;
  double psnr_db; /* mean per-frame PSNR; encode only */
} uncodec_coding_summary;

/* Codes the *.png frames of `frames_dir` (lexical order, at most max_frames
   when > 0). recon_dir (optional) receives the encoder-side reconstructions. */
UNCODEC_API uncodec_status uncodec_encode_directory(uncodec_model* model, const char* frames_dir, int gop,
                                                    int max_frames, const char* out_path, const char* recon_dir,
                                                    uncodec_coding_summary* summary);
UNCODEC_API uncodec_status uncodec_decode_file(uncodec_model* model, const char* in_path, const char* out_dir,
                                               uncodec_coding_summary* summary);

/* One RD point per checkpoint over the sequences in data_dir (a frame
   directory or a directory of them); NULL data_dir uses the held-out
   synthetic corpus of cfg. Writes label,lambda,bpp,psnr_db rows to csv_path
   and an RD plot to plot_path (both optional). */
UNCODEC_API uncodec_status uncodec_eval(const char* const* checkpoints, size_t n_checkpoints, const char* data_dir,
                                        const uncodec_config* cfg, const char* label, const char* csv_path,
                                        const char* plot_path, uncodec_log_fn log, void* user);

typedef enum uncodec_bd_method { UNCODEC_BD_CUBIC = 0, UNCODEC_BD_PCHIP = 1 } uncodec_bd_method;

UNCODEC_API uncodec_status uncodec_bd_rate(const double* test_bpp, const double* test_psnr, size_t n_test,
                                           const double* anchor_bpp, const double* anchor_psnr, size_t n_anchor,
                                           uncodec_bd_method method, double* percent);
/* Formatted method x dataset BD-rate grid for two RD CSV files. */
UNCODEC_API uncodec_status uncodec_bd_rate_csv(const char* test_csv, const char* anchor_csv,
                                               uncodec_bd_method method, char* buf, size_t cap, size_t* needed);
UNCODEC_API uncodec_status uncodec_plot_csv(const char* const* csv_paths, size_t n, const char* plot_path);

/* kind: "aleatoric", "epistemic" or "predictive". frame_ref precedes
   frame_cur. Writes <kind>.png (16-bit, min-max normalized) and
   <kind>_<W>x<H>.f32 (raw float32) into out_dir. viz.* keys of cfg (optional)
   choose the norm and perturbation rule. */
UNCODEC_API uncodec_status uncodec_viz_uncertainty(uncodec_model* model, const char* kind, const char* frame_ref,
                                                   const char* frame_cur, const char* out_dir,
                                                   const uncodec_config* cfg, double* mean_value);

/* Synthetic corpus from the synth.* keys and `seed`, one directory per clip. */
UNCODEC_API uncodec_status uncodec_generate_synthetic(const uncodec_config* cfg, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* UNCODEC_UNCODEC_H_ */
