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

#include "uncodec/sequence_codec.hpp"

#include <string_view>

#include "uncodec/bitstream.hpp"
#include "uncodec/error.hpp"
#include "uncodec/evaluation.hpp"
#include "uncodec/png_io.hpp"

namespace uncodec {
namespace {

struct PCodes {
  torch::Tensor mv, res;
};

PCodes analyse_pframe(CodecModelImpl& model, const torch::Tensor& x, const torch::Tensor& ref) {
  PCodes c;
  c.mv = model.code_mv(model.encode_mv(model.estimate_motion(x, ref)));
  const auto refined = model.predict(model.mv_decoder->forward(c.mv), ref);
  c.res = model.code_residual(model.encode_residual(x - mixture_mean(refined)));
  return c;
}

Frame synthesize_frame(CodecModelImpl& model, const torch::Tensor& mv, const torch::Tensor& res, const Frame& ref) {
  const auto s = model.synthesize(mv, res, pad_frame(ref.batched()));
  return Frame{quantize_to_8bit(crop_frame(s.reconstruction, ref.height(), ref.width())[0]).contiguous()};
}

}  // namespace

EncodedSequence encode_sequence(const VideoSequence& seq, const GopStructure& gop, CodecModelImpl& model) {
  seq.validate(/*allow_single=*/true);
  require(gop.frame_count() == static_cast<int>(seq.size()), ErrorCode::kInvalidArgument,
          "GoP structure does not cover the sequence");
  require(gop.gop_size >= 1 && gop.gop_size <= 0xFFFF, ErrorCode::kInvalidArgument, "GoP size out of range");
  const auto& first = seq.frames.front();
  require(first.channels() == model.config().channels, ErrorCode::kInvalidArgument,
          "sequence channel count differs from the model");
  require(first.height() <= 0xFFFF && first.width() <= 0xFFFF, ErrorCode::kInvalidArgument, "frame too large");
  torch::NoGradGuard guard;
  const bool was_training = model.is_training();
  model.eval();
  const uint32_t id = model.model_id();

  EncodedSequence out;
  out.reconstruction.name = seq.name;
  ByteWriter w;
  w.raw(std::string_view("UNCV"));
  w.u8(kContainerVersion);
  w.u8(static_cast<uint8_t>(first.channels()));
  w.u16(static_cast<uint16_t>(gop.gop_size));
  w.u32(static_cast<uint32_t>(seq.size()));
  w.u16(static_cast<uint16_t>(first.height()));
  w.u16(static_cast<uint16_t>(first.width()));
  w.u32(id);

  for (std::size_t t = 0; t < seq.size(); ++t) {
    const auto& cur = seq.frames[t];
    FrameRecord rec;
    const std::size_t start = w.bytes().size();
    Frame recon;
    if (gop.is_i_frame(static_cast<int>(t))) {
      rec.type = 'I';
      const auto png = encode_png(frame_to_image(cur));
      w.u8('I');
      w.u32(static_cast<uint32_t>(png.size()));
      w.raw(png);
      recon = frame_from_image(decode_png(png, cur.channels()));
    } else {
      rec.type = 'P';
      const auto& ref = out.reconstruction.frames.back();
      const auto codes = analyse_pframe(model, pad_frame(cur.batched()), pad_frame(ref.batched()));
      const auto mv = entropy_encode(codes.mv, model.mv_tables(), id, StreamKind::kMv);
      const auto res = entropy_encode(codes.res, model.res_tables(), id, StreamKind::kResidual);
      rec.mv_bytes = mv.size();
      rec.res_bytes = res.size();
      rec.estimated_bits_mv = estimate_bits(model.mv_prior->likelihood(codes.mv));
      rec.estimated_bits_res = estimate_bits(model.res_prior->likelihood(codes.res));
      w.u8('P');
      w.u32(static_cast<uint32_t>(mv.size()));
      w.u32(static_cast<uint32_t>(res.size()));
      w.raw(mv);
      w.raw(res);
      recon = synthesize_frame(model, codes.mv, codes.res, ref);
    }
    rec.bytes = w.bytes().size() - start;
    rec.psnr_db = psnr(cur.data, recon.data);
    out.psnr_db += rec.psnr_db;
    out.frames.push_back(rec);
    out.reconstruction.frames.push_back(std::move(recon));
  }
  out.psnr_db /= static_cast<double>(seq.size());
  out.bytes = std::move(w.bytes());
  out.bpp = sequence_bpp(8.0 * static_cast<double>(out.bytes.size()), static_cast<int>(seq.size()), first.height(),
                         first.width());
  if (was_training) model.train();
  return out;
}

SequenceHeader read_sequence_header(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.raw(4);
  require(std::string(magic.begin(), magic.end()) == "UNCV", ErrorCode::kBitstream, "not a UNCV container");
  const uint8_t version = r.u8();
  require(version == kContainerVersion, ErrorCode::kBitstream,
          "unsupported container version " + std::to_string(version));
  SequenceHeader h;
  h.channels = r.u8();
  h.gop_size = r.u16();
  h.frame_count = r.u32();
  h.height = r.u16();
  h.width = r.u16();
  h.model_id = r.u32();
  require(h.channels == 1 || h.channels == 3, ErrorCode::kBitstream, "container: bad channel count");
  require(h.gop_size >= 1 && h.frame_count >= 1, ErrorCode::kBitstream, "container: empty sequence or zero GoP");
  require(h.height >= 8 && h.width >= 8, ErrorCode::kBitstream, "container: frame smaller than 8x8");
  return h;
}

VideoSequence decode_sequence(std::span<const uint8_t> bytes, CodecModelImpl& model) {
  const auto h = read_sequence_header(bytes);
  require(h.channels == model.config().channels, ErrorCode::kBitstream, "container channel count differs from model");
  torch::NoGradGuard guard;
  const bool was_training = model.is_training();
  model.eval();
  const uint32_t id = model.model_id();
  require(h.model_id == id, ErrorCode::kBitstream,
          "container was coded with model " + std::to_string(h.model_id) + ", decoder has " + std::to_string(id));
  const auto gop = make_gop(static_cast<int>(h.frame_count), h.gop_size);

  VideoSequence seq;
  ByteReader r(bytes.subspan(kContainerHeaderBytes), kContainerHeaderBytes);
  for (uint32_t t = 0; t < h.frame_count; ++t) try {
    const std::size_t record = r.offset();
    const uint8_t type = r.u8();
    const bool expect_i = gop.is_i_frame(static_cast<int>(t));
    require(type == (expect_i ? 'I' : 'P'), ErrorCode::kBitstream,
            "frame " + std::to_string(t) + " at offset " + std::to_string(record) + ": unexpected record type");
    if (expect_i) {
      const uint32_t len = r.u32();
      const auto png = r.raw(len);
      Frame f = frame_from_image(decode_png(png, h.channels));
      require(f.height() == h.height && f.width() == h.width, ErrorCode::kBitstream,
              "frame " + std::to_string(t) + ": I-frame size differs from the header");
      seq.frames.push_back(std::move(f));
      continue;
    }
    const uint32_t mv_len = r.u32();
    const uint32_t res_len = r.u32();
    const std::size_t mv_at = r.offset();
    const auto mv_bytes = r.raw(mv_len);
    const std::size_t res_at = r.offset();
    const auto res_bytes = r.raw(res_len);
    auto decode = [&](std::span<const uint8_t> s, const std::vector<CdfTable>& tables, StreamKind kind,
                      std::size_t at) {
      try {
        auto d = entropy_decode(s, tables, id);
        require(d.header.kind == kind, ErrorCode::kBitstream, "wrong stream kind");
        require(d.bytes_consumed == s.size(), ErrorCode::kBitstream, "stream length mismatch");
        return d.code.unsqueeze(0);
      } catch (const Error& e) {
        fail(e.code(), "frame " + std::to_string(t) + ", stream at offset " + std::to_string(at) + ": " + e.what());
      }
    };
    const auto mv = decode(mv_bytes, model.mv_tables(), StreamKind::kMv, mv_at);
    const auto res = decode(res_bytes, model.res_tables(), StreamKind::kResidual, res_at);
    const int64_t ph = (h.height + kPadMultiple - 1) / kPadMultiple, pw = (h.width + kPadMultiple - 1) / kPadMultiple;
    require(mv.size(2) == ph && mv.size(3) == pw && res.size(2) == ph && res.size(3) == pw, ErrorCode::kBitstream,
            "frame " + std::to_string(t) + ": latent size differs from the header");
    seq.frames.push_back(synthesize_frame(model, mv, res, seq.frames.back()));
  } catch (const Error& e) {
    if (std::string_view(e.what()).starts_with("frame ")) throw;
    fail(e.code(), "frame " + std::to_string(t) + ": " + e.what());
  }
  require(r.remaining() == 0, ErrorCode::kBitstream,
          "trailing bytes after the last frame at offset " + std::to_string(r.offset()));
  if (was_training) model.train();
  return seq;
}

}  // namespace uncodec
