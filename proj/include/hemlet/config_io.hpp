/*
 * Copyright 2026 The Hemlet Project
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>

#include "hemlet/hwconfig.hpp"
#include "hemlet/workload.hpp"

namespace hemlet::io {

struct ParsedConfig {
    workload::ViTModelSpec model;
    hw::SystemConfig system;
};

/// Accepts .toml or .json (sniffed by extension, then content). Unknown
/// sections or keys are ConfigErrors; omitted keys keep their defaults.
ParsedConfig parse_config_file(const std::string& path);

/// TOML subset: [section] headers, scalar key = value pairs, # comments.
ParsedConfig parse_toml(const std::string& text);
ParsedConfig parse_json_text(const std::string& text);

std::string to_toml(const ParsedConfig& cfg);
std::string to_json(const ParsedConfig& cfg);

}  // namespace hemlet::io
