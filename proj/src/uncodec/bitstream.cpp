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

#include "uncodec/bitstream.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "uncodec/error.hpp"
#include "uncodec/range_coder.hpp"

namespace uncodec {

void ByteWriter::f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

uint64_t ByteReader::get(int n) {
  if (remaining() < static_cast<std::size_t>(n))
    fail(ErrorCode::kBitstream, "truncated stream at offset " + std::to_string(offset()));
  uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += n;
  return v;
}

std::span<const uint8_t> ByteReader::raw(std::size_t n) {
  if (remaining() < n)
    fail(ErrorCode::kBitstream, "truncated stream at offset " + std::to_string(offset()) + ": need " +
                                    std::to_string(n) + " bytes, have " + std::to_string(remaining()));
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::vector<uint8_t> entropy_encode(const torch::Tensor& code, std::span<const CdfTable> tables, uint32_t model_id,
                                    StreamKind kind) {
  auto c = code;
  if (c.dim() == 4) {
    require(c.size(0) == 1, ErrorCode::kInvalidArgument, "entropy_encode codes one latent at a time");
    c = c.squeeze(0);
  }
  require(c.dim() == 3, ErrorCode::kInvalidArgument, "entropy_encode expects a [C,H,W] code");
  for (int d = 0; d < 3; ++d)
    require(c.size(d) <= 0xFFFF, ErrorCode::kInvalidArgument, "code dimension exceeds 65535");

  std::vector<uint8_t> payload;
  if (c.numel() > 0) {
    require(c.size(0) == static_cast<int64_t>(tables.size()), ErrorCode::kInvalidArgument,
            "code has " + std::to_string(c.size(0)) + " channels, model has " + std::to_string(tables.size()));
    auto d = c.detach().to(torch::kFloat64).contiguous();
    require(torch::equal(d, d.round()), ErrorCode::kInvalidArgument, "entropy_encode: code is not integer-valued");
    const double* v = d.data_ptr<double>();
    const int64_t plane = c.size(1) * c.size(2);
    RangeEncoder enc;
    for (int64_t ch = 0; ch < c.size(0); ++ch)
      for (int64_t i = 0; i < plane; ++i) enc.encode(tables[ch], static_cast<int32_t>(v[ch * plane + i]));
    payload = enc.finish();
  }

  ByteWriter w;
  w.raw(std::string_view("UNCC"));
  w.u8(kStreamVersion);
  w.u8(static_cast<uint8_t>(kind));
  w.u16(static_cast<uint16_t>(c.size(0)));
  w.u16(static_cast<uint16_t>(c.size(1)));
  w.u16(static_cast<uint16_t>(c.size(2)));
  w.u32(model_id);
  w.u32(static_cast<uint32_t>(payload.size()));
  w.raw(payload);
  return std::move(w.bytes());
}

std::vector<uint8_t> entropy_encode(const torch::Tensor& code, const EntropyModel& model, StreamKind kind) {
  const auto tables = model.cdf_tables();
  return entropy_encode(code, tables, model.model_id(), kind);
}

StreamHeader read_stream_header(ByteReader& reader) {
  const std::size_t start = reader.offset();
  auto magic = reader.raw(4);
  if (std::memcmp(magic.data(), "UNCC", 4) != 0)
    fail(ErrorCode::kBitstream, "bad stream magic at offset " + std::to_string(start));
  const uint8_t version = reader.u8();
  if (version != kStreamVersion)
    fail(ErrorCode::kBitstream, "unsupported stream version " + std::to_string(version));
  StreamHeader h;
  const uint8_t kind = reader.u8();
  if (kind > 1) fail(ErrorCode::kBitstream, "unknown stream kind at offset " + std::to_string(start + 5));
  h.kind = static_cast<StreamKind>(kind);
  h.channels = reader.u16();
  h.height = reader.u16();
  h.width = reader.u16();
  h.model_id = reader.u32();
  h.payload_length = reader.u32();
  return h;
}

DecodedStream entropy_decode(std::span<const uint8_t> bytes, std::span<const CdfTable> tables, uint32_t model_id) {
  ByteReader reader(bytes);
  DecodedStream out;
  out.header = read_stream_header(reader);
  const auto& h = out.header;
  if (h.model_id != model_id)
    fail(ErrorCode::kBitstream, "stream was coded with model " + std::to_string(h.model_id) + ", decoder has " +
                                    std::to_string(model_id));
  auto payload = reader.raw(h.payload_length);
  out.code = torch::zeros({h.channels, h.height, h.width}, torch::kFloat32);
  if (out.code.numel() > 0) {
    if (h.channels != tables.size())
      fail(ErrorCode::kBitstream, "stream has " + std::to_string(h.channels) + " channels, model has " +
                                      std::to_string(tables.size()));
    float* v = out.code.data_ptr<float>();
    const int64_t plane = static_cast<int64_t>(h.height) * h.width;
    RangeDecoder dec(payload);
    for (int64_t ch = 0; ch < h.channels; ++ch)
      for (int64_t i = 0; i < plane; ++i) v[ch * plane + i] = static_cast<float>(dec.decode(tables[ch]));
  } else if (h.payload_length != 0) {
    fail(ErrorCode::kBitstream, "empty code with a non-empty payload");
  }
  out.bytes_consumed = reader.position();
  return out;
}

DecodedStream entropy_decode(std::span<const uint8_t> bytes, const EntropyModel& model) {
  const auto tables = model.cdf_tables();
  return entropy_decode(bytes, tables, model.model_id());
}

}  // namespace uncodec
