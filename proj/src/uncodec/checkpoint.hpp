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

#include <string>

#include "uncodec/codec_model.hpp"
#include "uncodec/config.hpp"

namespace uncodec {

// model.bin layout (little-endian): magic "UNCK", u32 version, u32 config
// length, config text, u32 tensor count, then per tensor: u32 name length,
// name, u32 rank, rank x u64 dims, float32 data.

struct Checkpoint {
  Config config;
  CodecModel model{nullptr};
  int64_t step = 0;
};

/// Writes <dir>/model.bin and <dir>/config.cfg (creating dir).
void save_checkpoint(const std::string& dir, const CodecModelImpl& model, const Config& config, int64_t step = 0);

/// `path` is a checkpoint directory or a model.bin file. Throws kIo for
/// unreadable files and kBitstream for malformed archives.
Checkpoint load_checkpoint(const std::string& path);

/// Loads parameters into an existing model whose architecture matches.
void load_parameters(const std::string& path, CodecModelImpl& model);

/// "<root>/step_%08d".
std::string checkpoint_dir(const std::string& root, int64_t step);

}  // namespace uncodec
