// Copyright (c) 2026 DTCF Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Flat `key = value` configuration text. Blank lines and lines starting with
// '#' are ignored; keys may not repeat.

#ifndef DTCF_BASE_KEY_VALUES_H_
#define DTCF_BASE_KEY_VALUES_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dtcf {

using KeyValues = std::map<std::string, std::string>;

KeyValues ParseKeyValues(std::string_view text);
KeyValues ReadKeyValueFile(const std::string& path);
std::string FormatKeyValues(const KeyValues& kv);

// Splits "key=value"; throws ConfigError when '=' is missing.
std::pair<std::string, std::string> SplitAssignment(std::string_view text);

// Typed readers. Errors name the key.
int64_t ParseInt(const std::string& key, const std::string& value);
double ParseDouble(const std::string& key, const std::string& value);
bool ParseBool(const std::string& key, const std::string& value);
std::vector<int64_t> ParseIntList(const std::string& key, const std::string& value);

std::string JoinInts(const std::vector<int64_t>& values);
// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double value);

}  // namespace dtcf

#endif  // DTCF_BASE_KEY_VALUES_H_
