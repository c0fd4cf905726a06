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

#include "dtcf/base/key_values.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "dtcf/base/error.h"

namespace dtcf {

namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::pair<std::string, std::string> SplitAssignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("expected key = value, got '" + std::string(text) + "'");
  }
  std::string key(Trim(text.substr(0, eq)));
  if (key.empty()) throw ConfigError("empty key in '" + std::string(text) + "'");
  return {key, std::string(Trim(text.substr(eq + 1)))};
}

KeyValues ParseKeyValues(std::string_view text) {
  KeyValues kv;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = Trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::pair<std::string, std::string> entry;
    try {
      entry = SplitAssignment(line);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!kv.emplace(entry).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" +
                        entry.first + "'");
    }
  }
  return kv;
}

KeyValues ReadKeyValueFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return ParseKeyValues(text.str());
}

std::string FormatKeyValues(const KeyValues& kv) {
  std::string out;
  for (const auto& [key, value] : kv) out += key + " = " + value + "\n";
  return out;
}

int64_t ParseInt(const std::string& key, const std::string& value) {
  int64_t v = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  }
  return v;
}

double ParseDouble(const std::string& key, const std::string& value) {
  double v = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
  return v;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + value + "'");
}

std::vector<int64_t> ParseIntList(const std::string& key, const std::string& value) {
  std::vector<int64_t> out;
  std::string_view rest = value;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(ParseInt(key, std::string(Trim(rest.substr(0, comma)))));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

std::string JoinInts(const std::vector<int64_t>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace dtcf
