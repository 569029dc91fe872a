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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uncodec/entropy_model.hpp"

namespace uncodec {

/// Little-endian serialization helpers shared by the stream formats.
class ByteWriter {
 public:
  void u8(uint8_t v) { bytes_.push_back(v); }
  void u16(uint16_t v) { put(v, 2); }
  void u32(uint32_t v) { put(v, 4); }
  void u64(uint64_t v) { put(v, 8); }
  void f64(double v);
  void raw(std::span<const uint8_t> data) { bytes_.insert(bytes_.end(), data.begin(), data.end()); }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<uint8_t>& bytes() { return bytes_; }

 private:
  void put(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  std::vector<uint8_t> bytes_;
};

/// Bounds-checked reader; every overrun throws ErrorCode::kBitstream with the
/// offending offset.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data, std::size_t base_offset = 0)
      : data_(data), base_(base_offset) {}
  uint8_t u8() { return static_cast<uint8_t>(get(1)); }
  uint16_t u16() { return static_cast<uint16_t>(get(2)); }
  uint32_t u32() { return static_cast<uint32_t>(get(4)); }
  uint64_t u64() { return get(8); }
  double f64();
  std::span<const uint8_t> raw(std::size_t n);
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  /// Absolute offset of the cursor within the enclosing file.
  std::size_t offset() const { return base_ + pos_; }

 private:
  uint64_t get(int n);
  std::span<const uint8_t> data_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

enum class StreamKind : uint8_t { kMv = 0, kResidual = 1 };

inline constexpr uint8_t kStreamVersion = 1;
inline constexpr std::size_t kStreamHeaderBytes = 20;

/// Header of one entropy-coded latent: magic "UNCC", version u8, kind u8,
/// shape (C, H, W) as 3 x u16, model_id u32, payload length u32.
struct StreamHeader {
  StreamKind kind = StreamKind::kMv;
  uint16_t channels = 0, height = 0, width = 0;
  uint32_t model_id = 0;
  uint32_t payload_length = 0;
};

/// `code` is integer-valued, [C, H, W] or [1, C, H, W], and must lie inside
/// the tables' supports.
std::vector<uint8_t> entropy_encode(const torch::Tensor& code, std::span<const CdfTable> tables, uint32_t model_id,
                                    StreamKind kind);
std::vector<uint8_t> entropy_encode(const torch::Tensor& code, const EntropyModel& model, StreamKind kind);

struct DecodedStream {
  StreamHeader header;
  torch::Tensor code;  // float32 [C, H, W] holding exact integers
  std::size_t bytes_consumed = 0;
};

StreamHeader read_stream_header(ByteReader& reader);
DecodedStream entropy_decode(std::span<const uint8_t> bytes, std::span<const CdfTable> tables, uint32_t model_id);
DecodedStream entropy_decode(std::span<const uint8_t> bytes, const EntropyModel& model);

}  // namespace uncodec
