// Copyright (c) 2026 The STVS Authors. All Rights Reserved.
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

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "stvs/network.hpp"
#include "stvs/weight_store.hpp"

namespace stvs {

inline nlohmann::json config_to_json(const NetworkConfig& c) {
  return {
      {"input_size", c.input_size},
      {"encoder_channels", c.encoder_channels},
      {"tm_channels", c.tm_channels},
      {"attention_channels", c.attention_channels},
      {"padding_policy", to_string(c.padding_policy)},
      {"num_tm_convs", c.num_tm_convs},
      {"shuffle_enabled", c.shuffle_enabled},
      {"attention_enabled", c.attention_enabled},
      {"temporal_enabled", c.temporal_enabled},
      {"residual_on_last", c.residual_on_last},
      {"upsample_mode", c.upsample_mode == UpsampleMode::Bilinear ? "bilinear" : "nearest"},
  };
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline NetworkConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  NetworkConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "input_size") c.input_size = v.get<std::int64_t>();
    else if (key == "encoder_channels") {
      auto chans = v.get<std::vector<std::int64_t>>();
      if (chans.size() != kNumStages) throw std::invalid_argument("encoder_channels needs 5 entries");
      std::copy(chans.begin(), chans.end(), c.encoder_channels.begin());
    } else if (key == "tm_channels") c.tm_channels = v.get<std::int64_t>();
    else if (key == "attention_channels") c.attention_channels = v.get<std::int64_t>();
    else if (key == "padding_policy") c.padding_policy = padding_policy_from_string(v.get<std::string>());
    else if (key == "num_tm_convs") c.num_tm_convs = v.get<int>();
    else if (key == "shuffle_enabled") c.shuffle_enabled = v.get<bool>();
    else if (key == "attention_enabled") c.attention_enabled = v.get<bool>();
    else if (key == "temporal_enabled") c.temporal_enabled = v.get<bool>();
    else if (key == "residual_on_last") c.residual_on_last = v.get<bool>();
    else if (key == "upsample_mode") {
      const auto m = v.get<std::string>();
      if (m == "bilinear") c.upsample_mode = UpsampleMode::Bilinear;
      else if (m == "nearest") c.upsample_mode = UpsampleMode::Nearest;
      else throw std::invalid_argument("upsample_mode must be bilinear or nearest");
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

inline NetworkConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return config_from_json(nlohmann::json::parse(in));
}

inline void save_config(const NetworkConfig& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config '" + path.string() + "'");
  out << config_to_json(c).dump(2) << '\n';
}

}  // namespace stvs
