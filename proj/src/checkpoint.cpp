/* Copyright 2026 The Bicompress Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "bicompress/checkpoint.hpp"

#include <fmt/format.h>

#include <cstring>
#include <fstream>
#include <iterator>

namespace bicompress {

namespace {

constexpr char kMagic[8] = {'B', 'I', 'C', 'K', 'P', 'T', '\r', '\n'};
constexpr std::size_t kPrefix = sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t);

std::uint64_t Fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

[[noreturn]] void Corrupt(const std::filesystem::path& path, const std::string& what) {
  throw CheckpointError(
      fmt::format("checkpoint {} (format v{}): {}", path.string(), kCheckpointVersion, what));
}

template <typename V>
void Append(std::string& out, V v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V ReadAt(const std::string& s, std::size_t pos) {
  V v;
  std::memcpy(&v, s.data() + pos, sizeof(V));
  return v;
}

struct Entry {
  std::string name;
  std::string kind;
  const Tensor<float>* tensor;
};

nlohmann::json ShapeJson(const Shape& s) { return {s.n, s.c, s.h, s.w}; }

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  std::vector<Entry> entries;
  for (const auto& [name, t] : ck.params) entries.push_back({name, "param", &t});
  for (const auto& [name, t] : ck.buffers) entries.push_back({name, "buffer", &t});
  nlohmann::json adam = nlohmann::json::object();
  for (const auto& [name, m] : ck.adam) {
    entries.push_back({name, "adam_m", &m.m});
    entries.push_back({name, "adam_v", &m.v});
    adam[name] = m.step;
  }

  nlohmann::json directory = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& e : entries) {
    directory.push_back(
        {{"name", e.name}, {"kind", e.kind}, {"shape", ShapeJson(e.tensor->shape())},
         {"offset", offset}, {"dtype", "float32"}});
    offset += e.tensor->numel() * sizeof(float);
  }
  const nlohmann::json header{{"config", ck.config},        {"iteration", ck.iteration},
                              {"history", ck.history},      {"adam_steps", ck.adam_steps},
                              {"adam_param_steps", adam},   {"tensors", directory},
                              {"payload_bytes", offset}};
  const std::string header_text = header.dump();

  std::string blob(kMagic, sizeof(kMagic));
  Append(blob, kCheckpointVersion);
  Append(blob, static_cast<std::uint64_t>(header_text.size()));
  blob += header_text;
  for (const auto& e : entries) {
    blob.append(reinterpret_cast<const char*>(e.tensor->data()), e.tensor->numel() * sizeof(float));
  }
  Append(blob, Fnv1a(blob.data(), blob.size()));

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Corrupt(path, "cannot open for writing");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) Corrupt(path, "write failed");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Corrupt(path, "cannot open");
  const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (blob.size() < kPrefix + sizeof(std::uint64_t)) Corrupt(path, "truncated file");
  if (std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) Corrupt(path, "bad magic");
  const auto version = ReadAt<std::uint32_t>(blob, sizeof(kMagic));
  if (version != kCheckpointVersion) {
    Corrupt(path, fmt::format("version mismatch: file has v{}", version));
  }
  const auto header_len = ReadAt<std::uint64_t>(blob, sizeof(kMagic) + sizeof(std::uint32_t));
  if (header_len > blob.size() - kPrefix - sizeof(std::uint64_t)) Corrupt(path, "truncated file");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(blob.substr(kPrefix, header_len));
  } catch (const nlohmann::json::exception&) {
    Corrupt(path, "corrupt header");
  }
  const std::uint64_t payload_bytes = header.value("payload_bytes", std::uint64_t{0});
  const std::size_t payload_at = kPrefix + header_len;
  const std::size_t expected = payload_at + payload_bytes + sizeof(std::uint64_t);
  if (blob.size() < expected) Corrupt(path, "truncated file");
  if (blob.size() > expected) Corrupt(path, "trailing bytes after checksum");
  const std::size_t body = blob.size() - sizeof(std::uint64_t);
  if (ReadAt<std::uint64_t>(blob, body) != Fnv1a(blob.data(), body)) {
    Corrupt(path, "checksum mismatch");
  }

  Checkpoint ck;
  try {
    ck.config = header.at("config");
    ck.iteration = header.at("iteration").get<std::int64_t>();
    ck.history = header.at("history");
    ck.adam_steps = header.at("adam_steps").get<std::int64_t>();
    const nlohmann::json& adam_steps = header.at("adam_param_steps");
    for (const auto& e : header.at("tensors")) {
      const auto dims = e.at("shape").get<std::vector<int>>();
      if (dims.size() != 4) Corrupt(path, "tensor with rank other than 4");
      Tensor<float> t(Shape{dims[0], dims[1], dims[2], dims[3]});
      const auto offset = e.at("offset").get<std::uint64_t>();
      if (offset + t.numel() * sizeof(float) > payload_bytes) Corrupt(path, "tensor outside payload");
      std::memcpy(t.data(), blob.data() + payload_at + offset, t.numel() * sizeof(float));
      const std::string name = e.at("name").get<std::string>();
      const std::string kind = e.at("kind").get<std::string>();
      if (kind == "param") {
        ck.params[name] = std::move(t);
      } else if (kind == "buffer") {
        ck.buffers[name] = std::move(t);
      } else if (kind == "adam_m" || kind == "adam_v") {
        auto& m = ck.adam[name];
        (kind == "adam_m" ? m.m : m.v) = std::move(t);
        m.step = adam_steps.at(name).get<std::int64_t>();
      } else {
        Corrupt(path, "unknown tensor kind '" + kind + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    Corrupt(path, std::string("malformed header: ") + e.what());
  }
  return ck;
}

Checkpoint Capture(const Network<float>& network, const Adam<float>* optimizer) {
  Checkpoint ck;
  for (const auto& [name, var] : network.params().params()) ck.params[name] = var.value();
  ck.buffers = network.params().buffers();
  if (optimizer) {
    ck.adam = optimizer->state();
    ck.adam_steps = optimizer->steps();
  }
  return ck;
}

bool IsStudentParameter(const std::string& name) {
  return name.rfind(HeadPrefix(Branch::kHdb) + ".", 0) == 0 ||
         name.rfind(HeadPrefix(Branch::kVdb) + ".", 0) == 0;
}

void Restore(const Checkpoint& ck, Network<float>& network, bool inference_only) {
  auto copy = [](const std::string& what, const std::string& name, const Tensor<float>& src,
                 Tensor<float>& dst) {
    if (src.shape() != dst.shape()) {
      throw CheckpointError(fmt::format("checkpoint (format v{}): {} '{}' has shape {}, model "
                                        "expects {}",
                                        kCheckpointVersion, what, name, src.shape().str(),
                                        dst.shape().str()));
    }
    dst.vec() = src.vec();
  };
  for (auto& [name, var] : network.params().params()) {
    auto it = ck.params.find(name);
    if (it == ck.params.end()) {
      if (inference_only && IsStudentParameter(name)) continue;
      throw CheckpointError(fmt::format("checkpoint (format v{}): missing parameter '{}'",
                                        kCheckpointVersion, name));
    }
    copy("parameter", name, it->second, var.mutable_value());
  }
  for (auto& [name, buf] : network.params().buffers()) {
    auto it = ck.buffers.find(name);
    if (it == ck.buffers.end()) {
      if (inference_only && IsStudentParameter(name)) continue;
      throw CheckpointError(fmt::format("checkpoint (format v{}): missing buffer '{}'",
                                        kCheckpointVersion, name));
    }
    copy("buffer", name, it->second, buf);
  }
}

void RestoreOptimizer(const Checkpoint& ck, Adam<float>& optimizer) {
  optimizer.state() = ck.adam;
  optimizer.set_steps(ck.adam_steps);
}

}  // namespace bicompress
