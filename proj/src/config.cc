/*
 * Copyright 2026 The Semsteer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "semsteer/config.h"

#include <charconv>

#include "semsteer/byte_io.h"
#include "semsteer/error.h"

namespace semsteer {
namespace {

std::string_view Trim(std::string_view s) {
  const char* ws = " \t\r";
  const size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config key '" + key + "': '" + value +
                      "' is not a valid number");
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> ParseKeyValues(std::string_view text,
                                                  const std::string& source) {
  std::map<std::string, std::string> out;
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = Trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) +
                        ": expected key=value");
    }
    const std::string key(Trim(line.substr(0, eq)));
    if (key.empty()) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    }
    if (!out.emplace(key, std::string(Trim(line.substr(eq + 1)))).second) {
      throw ConfigError(source + ":" + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    }
  }
  return out;
}

RunConfig::RunConfig(std::string command,
                     std::map<std::string, std::string> defaults)
    : command_(std::move(command)), values_(std::move(defaults)) {}

void RunConfig::ApplyFile(const std::string& path) {
  Apply(ParseKeyValues(ReadFileBytes(path), path), path);
}

void RunConfig::Apply(const std::map<std::string, std::string>& values,
                      const std::string& source) {
  for (const auto& [k, v] : values) {
    if (!values_.contains(k)) {
      std::string known;
      for (const auto& [name, unused] : values_) {
        known += known.empty() ? name : ", " + name;
      }
      throw ConfigError(source + ": unknown key '" + k + "' for command '" +
                        command_ + "' (known: " + known + ")");
    }
  }
  for (const auto& [k, v] : values) values_[k] = v;
}

const std::string& RunConfig::Get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("no config key '" + key + "'");
  return it->second;
}

double RunConfig::GetDouble(const std::string& key) const {
  return ParseNumber<double>(key, Get(key));
}

int64_t RunConfig::GetInt(const std::string& key) const {
  return ParseNumber<int64_t>(key, Get(key));
}

uint64_t RunConfig::GetUint(const std::string& key) const {
  return ParseNumber<uint64_t>(key, Get(key));
}

bool RunConfig::GetBool(const std::string& key) const {
  const std::string& v = Get(key);
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

void RunConfig::Set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string RunConfig::Manifest() const {
  std::string out = "command = " + command_ + "\n";
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace semsteer
