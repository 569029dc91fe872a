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

#include "uncodec/entropy_model.hpp"

namespace uncodec {

// Byte-oriented range coder over kCdfPrecision-bit frequency tables. 32-bit
// range with carry propagation through a cached byte (the LZMA scheme): the
// range is renormalized whenever it drops below 2^24.

class RangeEncoder {
 public:
  /// Narrows to [cum_low, cum_low + freq) out of kCdfTotal. freq >= 1.
  void encode(uint32_t cum_low, uint32_t freq);
  void encode(const CdfTable& table, int32_t symbol);
  /// Flushes and returns the stream. The encoder must not be reused.
  std::vector<uint8_t> finish();

 private:
  void shift_low();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const uint8_t> data);

  /// Throws ErrorCode::kBitstream if the stream is inconsistent with the table
  /// or has to be read past its end.
  int32_t decode(const CdfTable& table);

 private:
  uint8_t next_byte();

  std::span<const uint8_t> data_;
  std::size_t pos_ = 0;
  uint32_t code_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
};

}  // namespace uncodec
