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

#include <cstdint>
#include <span>
#include <vector>

#include "uncodec/codec_model.hpp"
#include "uncodec/frames.hpp"

namespace uncodec {

// Container layout (little-endian): magic "UNCV", version u8, channels u8,
// GoP size u16, frame count u32, height u16, width u16, model_id u32. Then one
// record per frame: type byte 'I' followed by u32 length and PNG bytes, or
// type byte 'P' followed by u32 MV stream length, u32 residual stream length
// and the two entropy-coded streams.

inline constexpr uint8_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderBytes = 20;

struct SequenceHeader {
  uint8_t channels = 3;
  uint16_t gop_size = 1;
  uint32_t frame_count = 0;
  uint16_t height = 0, width = 0;
  uint32_t model_id = 0;
};

struct FrameRecord {
  char type = 'I';
  std::size_t bytes = 0;  // record size including its type byte and lengths
  std::size_t mv_bytes = 0, res_bytes = 0;
  double estimated_bits_mv = 0, estimated_bits_res = 0;
  double psnr_db = 0;
};

struct EncodedSequence {
  std::vector<uint8_t> bytes;
  /// Encoder-side reconstructions, exactly what the decoder will output.
  VideoSequence reconstruction;
  std::vector<FrameRecord> frames;
  double bpp = 0;
  double psnr_db = 0;  // mean of per-frame PSNR
};

/// Closed-loop coding: each P-frame is predicted from the previous
/// reconstruction, which is rounded to 8 bits before it is buffered.
EncodedSequence encode_sequence(const VideoSequence& seq, const GopStructure& gop, CodecModelImpl& model);

SequenceHeader read_sequence_header(std::span<const uint8_t> bytes);

/// Throws kBitstream on corrupt or truncated data (with the file offset) and
/// on a model_id mismatch.
VideoSequence decode_sequence(std::span<const uint8_t> bytes, CodecModelImpl& model);

}  // namespace uncodec
