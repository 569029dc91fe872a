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

#include "uncodec/range_coder.hpp"

#include <algorithm>

#include "uncodec/error.hpp"

namespace uncodec {
namespace {
constexpr uint32_t kTop = uint32_t{1} << 24;
}

void RangeEncoder::encode(uint32_t cum_low, uint32_t freq) {
  const uint32_t r = range_ >> kCdfPrecision;
  low_ += static_cast<uint64_t>(r) * cum_low;
  range_ = r * freq;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode(const CdfTable& table, int32_t symbol) {
  require(symbol >= table.min_symbol() && symbol <= table.max_symbol(), ErrorCode::kInvalidArgument,
          "symbol " + std::to_string(symbol) + " outside the coded support [" + std::to_string(table.min_symbol()) +
              ", " + std::to_string(table.max_symbol()) + "]");
  const auto i = static_cast<std::size_t>(symbol - table.offset);
  encode(table.cdf[i], table.cdf[i + 1] - table.cdf[i]);
}

void RangeEncoder::shift_low() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t pending = cache_;
    do {
      out_.push_back(static_cast<uint8_t>(pending + carry));
      pending = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(static_cast<uint32_t>(low_) >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> data) : data_(data) {
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
  if (pos_ >= data_.size()) fail(ErrorCode::kBitstream, "range-coded payload truncated at byte " + std::to_string(pos_));
  return data_[pos_++];
}

int32_t RangeDecoder::decode(const CdfTable& table) {
  const uint32_t r = range_ >> kCdfPrecision;
  const uint32_t target = code_ / r;
  if (target >= kCdfTotal) fail(ErrorCode::kBitstream, "corrupt range-coded payload near byte " + std::to_string(pos_));
  // First cdf entry strictly greater than target; the symbol is the one before.
  const auto it = std::upper_bound(table.cdf.begin(), table.cdf.end(), target);
  const auto i = static_cast<std::size_t>(std::distance(table.cdf.begin(), it)) - 1;
  if (i + 1 >= table.cdf.size()) fail(ErrorCode::kBitstream, "corrupt range-coded payload near byte " + std::to_string(pos_));
  code_ -= r * table.cdf[i];
  range_ = r * (table.cdf[i + 1] - table.cdf[i]);
  while (range_ < kTop) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
  return table.offset + static_cast<int32_t>(i);
}

}  // namespace uncodec
