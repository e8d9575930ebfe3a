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

#ifndef SEMSTEER_CONFIG_H_
#define SEMSTEER_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semsteer {

// Parses `key = value` lines. Blank lines and lines starting with '#' are
// ignored; keys may not repeat. `source` names the text in error messages.
std::map<std::string, std::string> ParseKeyValues(std::string_view text,
                                                  const std::string& source);

// Effective settings of one command: defaults, overridden by a config file,
// overridden by command-line flags. Only keys present in the defaults are
// accepted.
class RunConfig {
 public:
  RunConfig(std::string command, std::map<std::string, std::string> defaults);

  // Throws ConfigError naming the first unknown key.
  void ApplyFile(const std::string& path);
  void Apply(const std::map<std::string, std::string>& values,
             const std::string& source);

  const std::string& command() const { return command_; }
  const std::map<std::string, std::string>& values() const { return values_; }
  bool Has(const std::string& key) const { return values_.contains(key); }

  const std::string& Get(const std::string& key) const;
  double GetDouble(const std::string& key) const;
  int64_t GetInt(const std::string& key) const;
  uint64_t GetUint(const std::string& key) const;
  bool GetBool(const std::string& key) const;
  void Set(const std::string& key, const std::string& value);

  // `command = ...` followed by every effective key in sorted order.
  std::string Manifest() const;

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
};

}  // namespace semsteer

#endif  // SEMSTEER_CONFIG_H_
