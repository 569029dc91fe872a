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

#include "uncodec/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "uncodec/bitstream.hpp"
#include "uncodec/error.hpp"

namespace uncodec {
namespace fs = std::filesystem;
namespace {

constexpr uint32_t kVersion = 1;

std::string model_file(const std::string& path) {
  return fs::is_directory(path) ? (fs::path(path) / "model.bin").string() : path;
}

std::vector<uint8_t> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open checkpoint '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Archive {
  std::string config_text;
  int64_t step = 0;
  std::vector<std::pair<std::string, torch::Tensor>> tensors;
};

Archive parse(const std::string& path) {
  const auto bytes = read_all(path);
  ByteReader r(bytes);
  const auto magic = r.raw(4);
  require(std::string(magic.begin(), magic.end()) == "UNCK", ErrorCode::kBitstream,
          "'" + path + "' is not a model checkpoint");
  require(r.u32() == kVersion, ErrorCode::kBitstream, "unsupported checkpoint version in '" + path + "'");
  Archive a;
  a.step = static_cast<int64_t>(r.u64());
  const auto cfg = r.raw(r.u32());
  a.config_text.assign(cfg.begin(), cfg.end());
  const uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    const auto name = r.raw(r.u32());
    const uint32_t rank = r.u32();
    require(rank <= 8, ErrorCode::kBitstream, "bad tensor rank in '" + path + "'");
    std::vector<int64_t> dims;
    uint64_t numel = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      dims.push_back(static_cast<int64_t>(r.u64()));
      numel *= static_cast<uint64_t>(dims.back());
    }
    require(numel * 4 <= r.remaining(), ErrorCode::kBitstream, "truncated checkpoint '" + path + "'");
    const auto data = r.raw(numel * 4);
    auto t = torch::empty(dims, torch::kFloat32);
    std::memcpy(t.data_ptr<float>(), data.data(), data.size());
    a.tensors.emplace_back(std::string(name.begin(), name.end()), t);
  }
  require(r.remaining() == 0, ErrorCode::kBitstream, "trailing bytes in checkpoint '" + path + "'");
  return a;
}

void assign(const Archive& a, CodecModelImpl& model, const std::string& path) {
  auto params = model.named_parameters(/*recurse=*/true);
  require(a.tensors.size() == params.size(), ErrorCode::kConfig,
          "checkpoint '" + path + "' does not match the model architecture");
  torch::NoGradGuard guard;
  for (const auto& [name, t] : a.tensors) {
    auto* p = params.find(name);
    require(p != nullptr && p->sizes() == t.sizes(), ErrorCode::kConfig,
            "checkpoint '" + path + "': parameter '" + name + "' missing or mis-shaped");
    p->copy_(t);
  }
  model.invalidate_tables();
}

}  // namespace

std::string checkpoint_dir(const std::string& root, int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%08lld", static_cast<long long>(step));
  return (fs::path(root) / buf).string();
}

void save_checkpoint(const std::string& dir, const CodecModelImpl& model, const Config& config, int64_t step) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::kIo, "cannot create '" + dir + "': " + ec.message());
  const auto text = config.dump();
  ByteWriter w;
  w.raw(std::string_view("UNCK"));
  w.u32(kVersion);
  w.u64(static_cast<uint64_t>(step));
  w.u32(static_cast<uint32_t>(text.size()));
  w.raw(text);
  const auto params = model.named_parameters(true);
  w.u32(static_cast<uint32_t>(params.size()));
  for (const auto& item : params) {
    auto t = item.value().detach().to(torch::kFloat32).contiguous();
    w.u32(static_cast<uint32_t>(item.key().size()));
    w.raw(item.key());
    w.u32(static_cast<uint32_t>(t.dim()));
    for (auto d : t.sizes()) w.u64(static_cast<uint64_t>(d));
    w.raw(std::span<const uint8_t>(static_cast<const uint8_t*>(t.data_ptr()), t.numel() * 4));
  }
  const auto bin = (fs::path(dir) / "model.bin").string();
  std::ofstream out(bin, std::ios::binary);
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write '" + bin + "'");
  std::ofstream cfg(fs::path(dir) / "config.cfg");
  cfg << text;
  require(static_cast<bool>(cfg), ErrorCode::kIo, "cannot write config echo in '" + dir + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  const auto file = model_file(path);
  const auto archive = parse(file);
  Checkpoint ck;
  ck.config = Config::from_text(archive.config_text, file);
  ck.step = archive.step;
  ck.model = CodecModel(CodecConfig::from_config(ck.config));
  assign(archive, *ck.model, file);
  ck.model->eval();
  return ck;
}

void load_parameters(const std::string& path, CodecModelImpl& model) {
  const auto file = model_file(path);
  assign(parse(file), model, file);
}

}  // namespace uncodec
