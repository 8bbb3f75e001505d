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

#ifndef BICOMPRESS_CHECKPOINT_HPP_
#define BICOMPRESS_CHECKPOINT_HPP_

// Binary checkpoint layout (little endian):
//
//   "BICKPT\r\n"            8-byte magic
//   u32                     format version
//   u64                     header length L
//   L bytes                 JSON header: config, iteration, history, adam,
//                           tensor directory {name, kind, shape, offset}
//   payload                 float32 tensor data in directory order
//   u64                     FNV-1a of every preceding byte

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "bicompress/network.hpp"
#include "bicompress/objective.hpp"

namespace bicompress {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json config = nlohmann::json::object();  // RunConfig snapshot
  std::int64_t iteration = 0;
  nlohmann::json history = nlohmann::json::array();
  std::map<std::string, Tensor<float>> params;
  std::map<std::string, Tensor<float>> buffers;
  std::int64_t adam_steps = 0;
  std::map<std::string, Adam<float>::Moments> adam;
};

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Copies parameters, buffers and (when given) optimizer state.
Checkpoint Capture(const Network<float>& network, const Adam<float>* optimizer);

// Branch heads whose parameters a checkpoint may lack when loaded for
// inference only.
bool IsStudentParameter(const std::string& name);

// Writes checkpoint tensors into `network`. Every parameter and buffer must be
// present with a matching shape, except student-head parameters when
// `inference_only` is set.
void Restore(const Checkpoint& checkpoint, Network<float>& network, bool inference_only = false);
void RestoreOptimizer(const Checkpoint& checkpoint, Adam<float>& optimizer);

}  // namespace bicompress

#endif  // BICOMPRESS_CHECKPOINT_HPP_
