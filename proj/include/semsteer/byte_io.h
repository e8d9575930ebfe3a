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

#ifndef SEMSTEER_BYTE_IO_H_
#define SEMSTEER_BYTE_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "semsteer/error.h"

namespace semsteer {

// Little-endian append-only writer over a byte string.
class ByteWriter {
 public:
  void PutU16(uint16_t v) { PutLe(v); }
  void PutU32(uint32_t v) { PutLe(v); }
  void PutU64(uint64_t v) { PutLe(v); }
  void PutF32(float v) { PutLe(std::bit_cast<uint32_t>(v)); }
  void PutF64(double v) { PutLe(std::bit_cast<uint64_t>(v)); }
  void PutBytes(std::string_view bytes) { out_.append(bytes); }
  void PutString(std::string_view s) {
    PutU32(static_cast<uint32_t>(s.size()));
    PutBytes(s);
  }

  const std::string& bytes() const { return out_; }
  std::string Take() { return std::move(out_); }

 private:
  template <typename T>
  void PutLe(T v) {
    for (size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }

  std::string out_;
};

// Little-endian reader; every read is bounds-checked and reports the offset.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  uint16_t GetU16() { return GetLe<uint16_t>(); }
  uint32_t GetU32() { return GetLe<uint32_t>(); }
  uint64_t GetU64() { return GetLe<uint64_t>(); }
  float GetF32() { return std::bit_cast<float>(GetLe<uint32_t>()); }
  double GetF64() { return std::bit_cast<double>(GetLe<uint64_t>()); }
  std::string_view GetBytes(size_t n) {
    Require(n);
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::string GetString() { return std::string(GetBytes(GetU32())); }

  size_t offset() const { return pos_; }
  size_t remaining() const { return bytes_.size() - pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Require(size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError("truncated input at byte offset " +
                        std::to_string(pos_) + ": need " + std::to_string(n) +
                        " bytes, have " + std::to_string(bytes_.size() - pos_));
    }
  }

  template <typename T>
  T GetLe() {
    Require(sizeof(T));
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }

  std::string_view bytes_;
  size_t pos_ = 0;
};

std::string ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, std::string_view bytes);

}  // namespace semsteer

#endif  // SEMSTEER_BYTE_IO_H_
