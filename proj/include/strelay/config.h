// Copyright 2026 The STRelay Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STRELAY_CONFIG_H_
#define STRELAY_CONFIG_H_

#include <filesystem>
#include <string>

#include "json.hpp"

namespace strelay {

// Reads a run configuration: either a JSON object or flat `key=value`
// lines (blank lines and `#` comments ignored). key=value values are kept
// as strings; consumers convert them and reject unknown keys.
nlohmann::json load_config_file(const std::filesystem::path& path);
nlohmann::json parse_config_text(const std::string& text);

// Copies every key of `overrides` onto `base`.
void merge_config(nlohmann::json& base, const nlohmann::json& overrides);

}  // namespace strelay

#endif  // STRELAY_CONFIG_H_
